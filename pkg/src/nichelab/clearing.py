"""Clearing: cap every niche at kappa winners, zero out the rest.

The procedure walks the population in sorted order (raw fitness descending,
the current offspring before equal-fitness incumbents, then original
population order). Each still-unprocessed positive-fitness individual opens a
niche; individuals within distance < sigma of it either fill the niche up to
kappa winners or are cleared. Cleared individuals keep their raw fitness; the
`cleared` flag is authoritative and the effective fitness of 0 is derived
from it.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from .core import Bitstring, Individual, Population, ValidationError, hamming


class DistanceMeasure(str, Enum):
    GENOTYPIC = "genotypic"
    PHENOTYPIC = "phenotypic"


def distance(measure: DistanceMeasure, x: Bitstring, y: Bitstring) -> int:
    if x.n != y.n:
        raise ValidationError("distance needs equal-length bitstrings")
    if measure == DistanceMeasure.GENOTYPIC:
        return hamming(x, y)
    return abs(x.ones_count - y.ones_count)


@dataclass(frozen=True)
class ClearingParams:
    sigma: float
    kappa: int

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValidationError("clearing radius sigma must be > 0")
        if not (isinstance(self.kappa, int) and self.kappa >= 1):
            raise ValidationError("niche capacity kappa must be an integer >= 1")


def derived_param(value: float) -> int:
    """Rounding convention for derived parameters like sigma = sqrt(n) or
    kappa = mu / 2: floor, with a minimum of 1."""
    return max(1, int(value))


def _sweep(members, params: ClearingParams, measure: DistanceMeasure, offspring_index):
    m = len(members)
    raws = [ind.raw_fitness for ind in members]
    order = sorted(
        range(m), key=lambda i: (-raws[i], 0 if i == offspring_index else 1)
    )
    cleared = [False] * m
    owner = [-1] * m
    for pos, i in enumerate(order):
        if cleared[i] or raws[i] <= 0:
            continue
        winners = 1
        for j in order[pos + 1 :]:
            if cleared[j] or raws[j] <= 0:
                continue
            if distance(measure, members[i].genotype, members[j].genotype) < params.sigma:
                if winners < params.kappa:
                    winners += 1
                else:
                    cleared[j] = True
                    owner[j] = i
    return order, cleared, owner


def clear(
    population: Population,
    params: ClearingParams,
    measure: DistanceMeasure,
    offspring_index: int | None = None,
) -> Population:
    """Return a population with cleared flags and effective fitnesses set.

    offspring_index marks the member that sorts before equal-fitness
    incumbents (the freshly created offspring during a step); None applies
    plain stable original order.
    """
    _, cleared, _ = _sweep(population.members, params, measure, offspring_index)
    new_members = [
        replace(
            ind,
            cleared=c,
            effective_fitness=0.0 if c else ind.raw_fitness,
        )
        for ind, c in zip(population.members, cleared)
    ]
    return Population(members=new_members, generation=population.generation)


def niche_report(
    population: Population,
    params: ClearingParams,
    measure: DistanceMeasure,
    offspring_index: int | None = None,
) -> list:
    """(winner_index, dominated_indices) pairs, winners in processing order.

    Recomputes the sweep from raw fitnesses, so the result is well-defined
    whether or not the population already carries cleared flags.
    """
    order, cleared, owner = _sweep(population.members, params, measure, offspring_index)
    report = []
    for i in order:
        if cleared[i] or population.members[i].raw_fitness <= 0:
            continue
        dominated = sorted(j for j in range(len(owner)) if owner[j] == i)
        report.append((i, dominated))
    return report


def is_winner(individual: Individual) -> bool:
    return (not individual.cleared) and individual.raw_fitness > 0
