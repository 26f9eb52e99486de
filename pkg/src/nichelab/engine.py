"""(mu+1) EA engine with optional clearing.

One generation: pick a parent uniformly from the mu members, create one
offspring by standard bit mutation, add it to the population, re-run clearing
on all mu+1 individuals (the offspring sorts before equal-fitness
incumbents), pick z uniformly among the minimum-effective-fitness members
(offspring excluded), and keep the offspring iff its effective fitness is at
least z's, removing z; otherwise discard the offspring.

run() dispatches to one of two numba backends: the general genotype engine,
or an exact ones-count-class engine when the landscape is a function of
unitation, clearing distance is phenotypic, and targets are 0^n / 1^n (see
_kernels). step() is the pure-Python reference of the same semantics and
consumes the RNG draw-for-draw identically to the kernels.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels as K
from .clearing import ClearingParams, DistanceMeasure, clear, is_winner
from .core import (
    Bitstring,
    Individual,
    Population,
    RngHandle,
    ValidationError,
    binomial_flip_cdf,
    hamming,
    mutate,
    random_bitstring,
)
from .landscapes import Landscape

TRACE_COLUMNS = (
    "generation",
    "best_raw_fitness",
    "min_ones",
    "max_ones",
    "potential",
    "num_winners",
    "num_cleared",
)

_CHUNK = 1 << 20


@dataclass
class EaConfig:
    landscape: Landscape
    mu: int
    clearing: ClearingParams | None = None
    distance: DistanceMeasure | None = None
    init_mode: str = "uniform"  # "uniform" | "copies"
    init_genotype: Bitstring | None = None
    targets: list = field(default_factory=list)
    generation_cap: int | None = None
    seed: int = 0
    stream: int = 0
    trace_every: int = 100
    snapshot_every: int = 0
    engine: str = "auto"  # "auto" | "genotype" | "class"
    track_ages: bool = False
    winner_reference: Bitstring | None = None
    potential_reference: Bitstring | None = None
    monitor_niches: bool = False
    stop_when_all_classes: bool = False
    time_budget_s: float | None = None

    @property
    def n(self) -> int:
        return self.landscape.n

    def validate(self) -> None:
        n = self.landscape.n
        if self.mu < 1:
            raise ValidationError("population size mu must be >= 1")
        if self.clearing is not None:
            if self.mu < 2:
                raise ValidationError("clearing runs need mu >= 2")
            if self.distance is None:
                raise ValidationError("clearing needs a distance measure")
            if self.clearing.kappa > self.mu:
                raise ValidationError("niche capacity kappa must be <= mu")
        if self.init_mode not in ("uniform", "copies"):
            raise ValidationError(f"unknown init mode {self.init_mode!r}")
        if self.init_mode == "copies":
            if self.init_genotype is None:
                raise ValidationError("copies init needs a genotype")
            if self.init_genotype.n != n:
                raise ValidationError("init genotype length must equal n")
        if not self.targets:
            raise ValidationError("at least one target genotype is required (no stop condition)")
        seen = set()
        for t in self.targets:
            if t.n != n:
                raise ValidationError("target length must equal n")
            if t in seen:
                raise ValidationError("duplicate target genotype")
            seen.add(t)
        if self.generation_cap is not None and self.generation_cap < 1:
            raise ValidationError("generation cap must be >= 1")
        if self.trace_every < 0 or self.snapshot_every < 0:
            raise ValidationError("trace/snapshot intervals must be >= 0")
        if self.engine not in ("auto", "genotype", "class"):
            raise ValidationError(f"unknown engine {self.engine!r}")
        if self.track_ages and self.winner_reference is None:
            raise ValidationError("age tracking needs a winner reference genotype")
        for ref in (self.winner_reference, self.potential_reference):
            if ref is not None and ref.n != n:
                raise ValidationError("reference genotype length must equal n")
        if self.engine == "class" and not self._class_engine_ok():
            raise ValidationError("class engine needs a unitation landscape, "
                                  "phenotypic distance, 0^n/1^n targets and "
                                  "references, and no genotype snapshots")
        if (self.monitor_niches or self.stop_when_all_classes) and n > 62:
            raise ValidationError("niche monitoring supports n <= 62")
        if (self.monitor_niches or self.stop_when_all_classes) and not self._class_engine_ok():
            raise ValidationError("niche monitoring needs the class engine")
        if self.time_budget_s is not None and self.time_budget_s <= 0:
            raise ValidationError("time budget must be positive")

    def _class_engine_ok(self) -> bool:
        n = self.landscape.n
        extremes = (Bitstring.zeros(n), Bitstring.ones(n))
        if not self.landscape.is_unitation():
            return False
        if self.clearing is not None and self.distance != DistanceMeasure.PHENOTYPIC:
            return False
        if any(t not in extremes for t in self.targets):
            return False
        for ref in (self.winner_reference, self.potential_reference):
            if ref is not None and ref not in extremes:
                return False
        if self.snapshot_every > 0:
            return False
        return True

    def resolved_engine(self) -> str:
        if self.engine == "genotype":
            return "genotype"
        if self.engine == "class":
            return "class"
        return "class" if self._class_engine_ok() else "genotype"

    def to_json_dict(self) -> dict:
        out = {
            "landscape": self.landscape.to_json_dict(),
            "mu": self.mu,
            "clearing": None,
            "init": {"mode": self.init_mode},
            "targets": [t.to01() for t in self.targets],
            "generation_cap": self.generation_cap,
            "seed": self.seed,
            "stream": self.stream,
            "trace_every": self.trace_every,
            "snapshot_every": self.snapshot_every,
            "engine": self.engine,
        }
        if self.clearing is not None:
            out["clearing"] = {
                "sigma": self.clearing.sigma,
                "kappa": self.clearing.kappa,
                "distance": self.distance.value,
            }
        if self.init_genotype is not None:
            out["init"]["genotype"] = self.init_genotype.to01()
        if self.track_ages:
            out["track_ages"] = True
        if self.winner_reference is not None:
            out["winner_reference"] = self.winner_reference.to01()
        if self.potential_reference is not None:
            out["potential_reference"] = self.potential_reference.to01()
        if self.monitor_niches:
            out["monitor_niches"] = True
        if self.stop_when_all_classes:
            out["stop_when_all_classes"] = True
        if self.time_budget_s is not None:
            out["time_budget_s"] = self.time_budget_s
        return out

    @classmethod
    def from_json_dict(cls, d: dict) -> "EaConfig":
        if not isinstance(d, dict):
            raise ValidationError("run config must be a JSON object")
        if "landscape" not in d:
            raise ValidationError("run config needs a landscape")
        landscape = Landscape.from_json_dict(d["landscape"])
        mu = d.get("mu")
        if not isinstance(mu, int) or isinstance(mu, bool):
            raise ValidationError("mu must be an integer")
        clearing = None
        distance = None
        cd = d.get("clearing")
        if cd is not None:
            if not isinstance(cd, dict):
                raise ValidationError("clearing must be an object or null")
            try:
                kappa = int(cd["kappa"])
                clearing = ClearingParams(sigma=float(cd["sigma"]), kappa=kappa)
                distance = DistanceMeasure(cd.get("distance", "genotypic"))
            except KeyError as e:
                raise ValidationError(f"clearing config missing {e}") from None
            except ValueError as e:
                raise ValidationError(str(e)) from None
        init = d.get("init", {"mode": "uniform"})
        init_mode = init.get("mode", "uniform")
        init_genotype = None
        if "genotype" in init:
            init_genotype = _parse_genotype(init["genotype"])
        targets = [_parse_genotype(t) for t in d.get("targets", [])]
        cfg = cls(
            landscape=landscape,
            mu=mu,
            clearing=clearing,
            distance=distance,
            init_mode=init_mode,
            init_genotype=init_genotype,
            targets=targets,
            generation_cap=d.get("generation_cap"),
            seed=int(d.get("seed", 0)),
            stream=int(d.get("stream", 0)),
            trace_every=int(d.get("trace_every", 100)),
            snapshot_every=int(d.get("snapshot_every", 0)),
            engine=d.get("engine", "auto"),
            track_ages=bool(d.get("track_ages", False)),
            monitor_niches=bool(d.get("monitor_niches", False)),
            stop_when_all_classes=bool(d.get("stop_when_all_classes", False)),
            time_budget_s=d.get("time_budget_s"),
        )
        if "winner_reference" in d:
            cfg.winner_reference = _parse_genotype(d["winner_reference"])
        if "potential_reference" in d:
            cfg.potential_reference = _parse_genotype(d["potential_reference"])
        cfg.validate()
        return cfg


def _parse_genotype(s) -> Bitstring:
    if not isinstance(s, str):
        raise ValidationError("genotype must be a 0/1 string")
    try:
        return Bitstring.from_str(s)
    except ValueError as e:
        raise ValidationError(str(e)) from None


@dataclass
class RunOutcome:
    status: str  # "Success" | "Timeout"
    generations: int
    first_hits: dict
    final_population: Population
    genotypes_canonical: bool = False
    seed: int = 0
    stream: int = 0
    budget_exceeded: bool = False
    f1_tie_breaks: int = 0
    trace: np.ndarray | None = None
    snapshots: list = field(default_factory=list)
    ages_tracked: bool = False
    niche_violation_generation: int | None = None
    all_classes_generation: int | None = None

    def to_json_dict(self) -> dict:
        return {
            "status": self.status,
            "generations": self.generations,
            "first_hits": dict(self.first_hits),
            "seed": self.seed,
            "stream": self.stream,
            "budget_exceeded": self.budget_exceeded,
            "f1_tie_breaks": self.f1_tie_breaks,
            "final_population": population_snapshot_dict(
                self.final_population, self.generations, self.genotypes_canonical
            ),
            "niche_violation_generation": self.niche_violation_generation,
            "all_classes_generation": self.all_classes_generation,
        }


def population_snapshot_dict(population: Population, generation: int,
                             genotypes_canonical: bool = False) -> dict:
    members = []
    for ind in population.members:
        members.append({
            "genotype": ind.genotype.to01(),
            "ones": ind.genotype.ones_count,
            "raw_fitness": ind.raw_fitness,
            "cleared": bool(ind.cleared),
            "winner": is_winner(ind),
        })
    n = population.members[0].genotype.n if population.members else 0
    return {
        "generation": generation,
        "n": n,
        "genotypes_canonical": genotypes_canonical,
        "members": members,
    }


def potential(population: Population, winner_genotype: Bitstring) -> int:
    """Sum of Hamming distances from every member to the winner genotype."""
    return sum(hamming(ind.genotype, winner_genotype) for ind in population.members)


def age_profile(population: Population, winner_genotype: Bitstring,
                generation: int | None = None, instrumented: bool = True) -> list:
    """Per-member ages: generations since the most recent ancestor whose
    genotype equaled the winner genotype; members that are the winner
    genotype have age 0."""
    if not instrumented:
        raise ValidationError("age profile queried on a run without age tracking")
    gen = population.generation if generation is None else generation
    ages = []
    for ind in population.members:
        if ind.genotype == winner_genotype:
            ages.append(0)
        else:
            ages.append(gen - ind.winner_ancestor_generation)
    return ages


def step(population: Population, config: EaConfig, rng: RngHandle) -> Population:
    """One generation, pure Python. Matches the kernels' RNG protocol:
    parent draw, flip-count uniform, flip positions, (f1 tie-breaks inside
    evaluation), then the worst-member draw."""
    mu = len(population.members)
    if mu < 1:
        raise ValidationError("population is empty")
    gen = population.generation + 1
    parent = population.members[rng.randint(mu)]
    y_geno = mutate(parent.genotype, rng)
    raw_y = config.landscape.evaluate(y_geno, rng)
    wref = config.winner_reference
    if wref is not None and y_geno == wref:
        wag = gen
    elif wref is not None and parent.genotype == wref:
        wag = gen - 1
    else:
        wag = parent.winner_ancestor_generation
    y = Individual(genotype=y_geno, raw_fitness=raw_y, birth_generation=gen,
                   winner_ancestor_generation=wag)
    star = Population(members=population.members + [y], generation=population.generation)
    if config.clearing is not None:
        star = clear(star, config.clearing, config.distance, offspring_index=mu)
    else:
        star = Population(
            members=[replace(i, cleared=False, effective_fitness=i.raw_fitness)
                     for i in star.members],
            generation=star.generation,
        )
    eff = [i.effective_fitness for i in star.members]
    min_eff = min(eff[:mu])
    pool = [i for i in range(mu) if eff[i] == min_eff]
    z = pool[rng.randint(len(pool))]
    if eff[mu] >= eff[z]:
        members = star.members[:z] + star.members[z + 1:]
    else:
        members = star.members[:mu]
    return Population(members=members, generation=gen)


# ---------------------------------------------------------------------------
# kernel-backed run


class _KernelState:
    """Mutable array state shared with a kernel across chunked calls."""


def _landscape_kind(landscape: Landscape) -> int:
    if landscape.is_unitation():
        return 0
    return 1 if landscape.variant == "f2" else 2


def _initial_members(config: EaConfig, rng: RngHandle) -> list:
    if config.init_mode == "uniform":
        genos = [random_bitstring(config.n, rng) for _ in range(config.mu)]
    else:
        genos = [config.init_genotype] * config.mu
    members = []
    for g in genos:
        raw = config.landscape.evaluate(g, rng)
        members.append(Individual(genotype=g, raw_fitness=raw))
    return members


def _setup_common(config: EaConfig, members: list):
    n = config.n
    mu = config.mu
    land = config.landscape
    cand = land.candidate_values()
    if cand.shape[0] >= (1 << 22):
        raise ValidationError("landscape has too many distinct values")
    if land.is_unitation():
        rank_table = np.searchsorted(cand, land.values).astype(np.int64)
        table = land.values.astype(np.float64)
    else:
        rank_table = np.zeros(1, dtype=np.int64)
        table = np.zeros(1, dtype=np.float64)
    raw = np.zeros(mu + 1, dtype=np.float64)
    rank = np.zeros(mu + 1, dtype=np.int64)
    ones = np.zeros(mu + 1, dtype=np.int64)
    for i, ind in enumerate(members):
        raw[i] = ind.raw_fitness
        ones[i] = ind.genotype.ones_count
        if land.is_unitation():
            rank[i] = rank_table[ones[i]]
        else:
            rank[i] = int(np.searchsorted(cand, ind.raw_fitness))
    seq = np.zeros(mu + 1, dtype=np.int64)
    seq[:mu] = np.arange(mu)
    order = np.zeros(mu + 1, dtype=np.int32)
    order[:mu] = sorted(range(mu), key=lambda i: (-rank[i], seq[i]))
    order[mu] = mu  # scratch placeholder, overwritten every generation
    by_age = np.arange(mu, dtype=np.int32)
    age_pos = np.zeros(mu + 1, dtype=np.int32)
    age_pos[:mu] = np.arange(mu)
    age_pos[mu] = -1
    cleared = np.zeros(mu + 1, dtype=np.uint8)
    zero_members = int(np.sum(raw[:mu] <= 0.0))
    return cand, table, rank_table, raw, rank, ones, seq, order, by_age, age_pos, cleared, zero_members


def _trace_buffer(config: EaConfig, max_steps: int) -> np.ndarray:
    if config.trace_every <= 0:
        return np.zeros((1, 7))
    return np.zeros((max_steps // config.trace_every + 3, 7))


def _gen0_trace_row(config: EaConfig, members: list) -> np.ndarray:
    pop = Population(members=list(members), generation=0)
    if config.clearing is not None:
        pop = clear(pop, config.clearing, config.distance)
    onesv = [ind.genotype.ones_count for ind in pop.members]
    winners = sum(1 for ind in pop.members if is_winner(ind))
    ncleared = sum(1 for ind in pop.members if ind.cleared)
    potv = 0
    ref = _potential_ref(config)
    if ref is not None:
        potv = sum(hamming(ind.genotype, ref) for ind in pop.members)
    best = max(ind.raw_fitness for ind in pop.members)
    return np.array([[0.0, best, min(onesv), max(onesv), potv, winners, ncleared]])


def _potential_ref(config: EaConfig) -> Bitstring | None:
    if config.potential_reference is not None:
        return config.potential_reference
    if config.trace_every > 0 or config.winner_reference is not None:
        return config.winner_reference or config.targets[0]
    return None


def run(config: EaConfig) -> RunOutcome:
    config.validate()
    rng = RngHandle(config.seed, config.stream)
    backend = config.resolved_engine()
    members = _initial_members(config, rng)

    first_hits = {}
    counts0 = {}
    for t in config.targets:
        counts0[t] = sum(1 for ind in members if ind.genotype == t)
        first_hits[t.to01()] = 0 if counts0[t] > 0 else None
    if all(c > 0 for c in counts0.values()):
        final = Population(members=list(members), generation=0)
        if config.clearing is not None:
            final = clear(final, config.clearing, config.distance)
        trace = _gen0_trace_row(config, final.members) if config.trace_every > 0 else None
        return RunOutcome(status="Success", generations=0, first_hits=first_hits,
                          final_population=final, seed=config.seed,
                          stream=config.stream, trace=trace,
                          ages_tracked=config.track_ages)

    if backend == "class":
        return _run_class(config, rng, members, first_hits)
    return _run_genotype(config, rng, members, first_hits)


def _words_array(b: Bitstring) -> np.ndarray:
    return b.words.astype(np.uint64)


def _run_genotype(config: EaConfig, rng: RngHandle, members: list,
                  first_hits: dict) -> RunOutcome:
    n, mu = config.n, config.mu
    W = (n + 63) // 64
    land = config.landscape
    kind = _landscape_kind(land)
    (cand, table, rank_table, raw, rank, ones, seq, order, by_age, age_pos,
     cleared, zero_members) = _setup_common(config, members)

    pop = np.zeros((mu + 1, W), dtype=np.uint64)
    for i, ind in enumerate(members):
        pop[i, :] = ind.genotype.words
    if land.is_unitation():
        pk_words = np.zeros((1, W), dtype=np.uint64)
        pk_a = np.zeros(1)
        pk_b = np.zeros(1)
    else:
        pk_words = np.zeros((len(land.peaks), W), dtype=np.uint64)
        for p, peak in enumerate(land.peaks):
            pk_words[p, :] = peak.position.words
        pk_a = np.array([p.a for p in land.peaks])
        pk_b = np.array([p.b for p in land.peaks])

    targets_words = np.zeros((len(config.targets), W), dtype=np.uint64)
    for t, tgt in enumerate(config.targets):
        targets_words[t, :] = tgt.words
    target_count = np.zeros(len(config.targets), dtype=np.int64)
    first_hit = np.full(len(config.targets), -1, dtype=np.int64)
    target_tag = np.full(mu + 1, -1, dtype=np.int64)
    for i, ind in enumerate(members):
        for t, tgt in enumerate(config.targets):
            if ind.genotype == tgt:
                target_tag[i] = t
                target_count[t] += 1
                if first_hit[t] < 0:
                    first_hit[t] = 0
                break

    pot_ref = _potential_ref(config)
    potential_on = 1 if (pot_ref is not None) else 0
    pot_ref_words = _words_array(pot_ref) if pot_ref is not None else np.zeros(W, dtype=np.uint64)
    h_ref = np.zeros(mu + 1, dtype=np.int64)
    pot0 = 0
    if potential_on:
        for i, ind in enumerate(members):
            h_ref[i] = hamming(ind.genotype, pot_ref)
            pot0 += h_ref[i]

    winner_on = 1 if config.winner_reference is not None else 0
    winner_words = (_words_array(config.winner_reference) if winner_on
                    else np.zeros(W, dtype=np.uint64))
    winner_tag = np.zeros(mu + 1, dtype=np.int64)
    if winner_on:
        for i, ind in enumerate(members):
            winner_tag[i] = 1 if ind.genotype == config.winner_reference else 0
    age_on = 1 if config.track_ages else 0
    wag = np.zeros(mu + 1, dtype=np.int64)

    clearing_on = 1 if config.clearing is not None else 0
    sigma = config.clearing.sigma if clearing_on else 1.0
    kappa = config.clearing.kappa if clearing_on else 1
    dist_kind = 0
    if clearing_on and config.distance == DistanceMeasure.PHENOTYPIC:
        dist_kind = 1

    chosen = np.zeros(n, dtype=np.int64)
    zpool = np.zeros(mu + 1, dtype=np.int32)
    tie_scratch = np.zeros(2 * max(1, pk_a.shape[0]), dtype=np.int64)
    binom_cdf = binomial_flip_cdf(n)
    rng_s = np.array(rng.state(), dtype=np.uint64)

    out_state = np.zeros(12, dtype=np.int64)
    out_state[1] = mu  # seq counter
    out_state[2] = pot0
    out_state[5] = zero_members
    out_state[8] = mu  # scratch row
    out_state[9] = -1
    out_state[10] = -1

    gen_cap = config.generation_cap if config.generation_cap is not None else (1 << 60)
    chunk = _CHUNK
    if config.snapshot_every > 0:
        chunk = config.snapshot_every
    trace_parts = []
    if config.trace_every > 0:
        trace_parts.append(_gen0_trace_row(config, members))
    trace_buf = _trace_buffer(config, chunk)
    snapshots = []
    if config.snapshot_every > 0:
        p0 = Population(members=list(members), generation=0)
        if config.clearing is not None:
            p0 = clear(p0, config.clearing, config.distance)
        snapshots.append((0, p0))
    budget_exceeded = False
    t0 = time.monotonic()

    while True:
        status = K._gt_run(
            n, mu, W,
            pop, ones, raw, rank, seq, order, cleared, by_age, age_pos,
            target_tag, winner_tag, h_ref, wag,
            kind, table, rank_table, pk_words, pk_a, pk_b, cand,
            clearing_on, float(sigma), kappa, dist_kind,
            binom_cdf, chosen, zpool, tie_scratch,
            targets_words, target_count, first_hit,
            potential_on, pot_ref_words, age_on, winner_on, winner_words,
            config.trace_every, trace_buf,
            gen_cap, chunk,
            rng_s, out_state,
        )
        if config.trace_every > 0 and out_state[4] > 0:
            trace_parts.append(trace_buf[: out_state[4]].copy())
            out_state[4] = 0
        gen_now = int(out_state[0])
        if config.snapshot_every > 0 and snapshots[-1][0] != gen_now:
            snap = _materialize_genotype(config, pop, ones, raw, cleared,
                                         by_age, wag)
            snap.generation = gen_now
            snapshots.append((gen_now, snap))
        if status != K.STATUS_RUNNING:
            break
        if (config.time_budget_s is not None
                and time.monotonic() - t0 > config.time_budget_s):
            budget_exceeded = True
            break

    final = _materialize_genotype(config, pop, ones, raw, cleared, by_age, wag)
    return _finish(config, first_hits, first_hit, status, out_state, final,
                   False, trace_parts, snapshots, budget_exceeded)


def _materialize_genotype(config, pop, ones, raw, cleared, by_age, wag) -> Population:
    members = []
    for q in range(config.mu):
        row = int(by_age[q])
        g = Bitstring(config.n, pop[row].copy())
        c = bool(cleared[row])
        members.append(Individual(
            genotype=g, raw_fitness=float(raw[row]),
            effective_fitness=0.0 if c or raw[row] <= 0 else float(raw[row]),
            cleared=c, winner_ancestor_generation=int(wag[row]),
        ))
    return Population(members=members, generation=0)


def _run_class(config: EaConfig, rng: RngHandle, members: list,
               first_hits: dict) -> RunOutcome:
    n, mu = config.n, config.mu
    (cand, table, rank_table, raw, rank, ones, seq, order, by_age, age_pos,
     cleared, zero_members) = _setup_common(config, members)
    cls = ones.copy()

    hist = np.zeros(n + 1, dtype=np.int64)
    for i in range(mu):
        hist[cls[i]] += 1
    target_cls = np.array([t.ones_count for t in config.targets], dtype=np.int64)
    # a 0^n / 1^n target is present iff its ones-count class is occupied
    first_hit = np.full(len(config.targets), -1, dtype=np.int64)
    for t in range(len(config.targets)):
        if hist[target_cls[t]] > 0:
            first_hit[t] = 0

    pot_ref = _potential_ref(config)
    potential_on = 1 if pot_ref is not None else 0
    pot_ref_cls = 0
    pot0 = 0
    if potential_on:
        pot_ref_cls = 0 if pot_ref.ones_count == 0 else n
        for i in range(mu):
            pot0 += cls[i] if pot_ref_cls == 0 else n - cls[i]
    winner_on = 1 if config.winner_reference is not None else 0
    winner_cls = -1
    if winner_on:
        winner_cls = config.winner_reference.ones_count
    age_on = 1 if config.track_ages else 0
    wag = np.zeros(mu + 1, dtype=np.int64)

    clearing_on = 1 if config.clearing is not None else 0
    sigma = config.clearing.sigma if clearing_on else 1.0
    kappa = config.clearing.kappa if clearing_on else 1

    zpool = np.zeros(mu + 1, dtype=np.int32)
    binom_cdf = binomial_flip_cdf(n)
    csr_count = np.zeros(n + 1, dtype=np.int32)
    csr_start = np.zeros(n + 2, dtype=np.int32)
    csr_pos = np.zeros(mu + 1, dtype=np.int32)
    ptr = np.zeros(n + 1, dtype=np.int32)
    cnt_after = np.zeros(n + 1, dtype=np.int64)
    memo = np.zeros(n + 1, dtype=np.uint8)
    rng_s = np.array(rng.state(), dtype=np.uint64)

    out_state = np.zeros(12, dtype=np.int64)
    out_state[1] = mu
    out_state[2] = pot0
    out_state[5] = zero_members
    out_state[8] = mu
    out_state[9] = -1
    out_state[10] = -1
    monitor_on = 1 if config.monitor_niches else 0
    stop_all = 1 if config.stop_when_all_classes else 0
    if monitor_on:
        mask = 0
        init_pop = Population(members=list(members), generation=0)
        if config.clearing is not None:
            init_pop = clear(init_pop, config.clearing, config.distance)
        for ind in init_pop.members:
            if is_winner(ind):
                mask |= 1 << ind.genotype.ones_count
        out_state[11] = mask

    gen_cap = config.generation_cap if config.generation_cap is not None else (1 << 60)
    chunk = _CHUNK
    trace_parts = []
    if config.trace_every > 0:
        trace_parts.append(_gen0_trace_row(config, members))
    trace_buf = _trace_buffer(config, chunk)
    budget_exceeded = False
    t0 = time.monotonic()

    while True:
        status = K._cls_run(
            n, mu,
            cls, raw, rank, seq, order, cleared, by_age, age_pos, wag, hist,
            table, rank_table,
            clearing_on, float(sigma), kappa,
            binom_cdf, zpool,
            target_cls, first_hit,
            potential_on, pot_ref_cls, age_on, winner_on, winner_cls,
            monitor_on, stop_all,
            csr_count, csr_start, csr_pos, ptr, cnt_after, memo,
            config.trace_every, trace_buf,
            gen_cap, chunk,
            rng_s, out_state,
        )
        if config.trace_every > 0 and out_state[4] > 0:
            trace_parts.append(trace_buf[: out_state[4]].copy())
            out_state[4] = 0
        if status != K.STATUS_RUNNING:
            break
        if (config.time_budget_s is not None
                and time.monotonic() - t0 > config.time_budget_s):
            budget_exceeded = True
            break

    members_out = []
    for q in range(mu):
        row = int(by_age[q])
        u = int(cls[row])
        g = Bitstring.zeros(n).flipped(range(n - u, n)) if u else Bitstring.zeros(n)
        c = bool(cleared[row])
        members_out.append(Individual(
            genotype=g, raw_fitness=float(raw[row]),
            effective_fitness=0.0 if c or raw[row] <= 0 else float(raw[row]),
            cleared=c, winner_ancestor_generation=int(wag[row]),
        ))
    final = Population(members=members_out, generation=0)
    return _finish(config, first_hits, first_hit, status, out_state, final,
                   True, trace_parts, [], budget_exceeded)


def _finish(config, first_hits, first_hit, status, out_state, final,
            canonical, trace_parts, snapshots, budget_exceeded) -> RunOutcome:
    generations = int(out_state[0])
    final.generation = generations
    for t, tgt in enumerate(config.targets):
        if first_hit[t] >= 0:
            first_hits[tgt.to01()] = int(first_hit[t])
    # Success iff every target genotype is present in the final population
    # (a budget interrupt is always a Timeout, flagged separately).
    success = all(
        any(ind.genotype.ones_count == t.ones_count if canonical
            else ind.genotype == t for ind in final.members)
        for t in config.targets
    ) and not budget_exceeded
    trace = None
    if config.trace_every > 0:
        trace = np.vstack(trace_parts) if trace_parts else np.zeros((0, 7))
    return RunOutcome(
        status="Success" if success else "Timeout",
        generations=generations,
        first_hits=first_hits,
        final_population=final,
        genotypes_canonical=canonical,
        seed=config.seed,
        stream=config.stream,
        budget_exceeded=budget_exceeded,
        f1_tie_breaks=int(out_state[6]),
        trace=trace,
        snapshots=snapshots,
        ages_tracked=config.track_ages,
        niche_violation_generation=int(out_state[9]) if out_state[9] >= 0 else None,
        all_classes_generation=int(out_state[10]) if out_state[10] >= 0 else None,
    )


def single_step_trials(population: Population, config: EaConfig, trials: int,
                       rng: RngHandle):
    """Repeat one-generation trials from a fixed population (genotype
    backend), returning (potential deltas, new-winner flags). Used to check
    the drift of the niche potential against its closed form."""
    if config.clearing is None or config.winner_reference is None:
        raise ValidationError("drift trials need clearing and a winner reference")
    n, mu = config.n, config.mu
    W = (n + 63) // 64
    land = config.landscape
    kind = _landscape_kind(land)
    members = population.members
    if len(members) != mu:
        raise ValidationError("population size does not match config.mu")
    (cand, table, rank_table, raw, rank, ones, seq, order, by_age, age_pos,
     cleared, zero_members) = _setup_common(config, members)
    pop = np.zeros((mu + 1, W), dtype=np.uint64)
    for i, ind in enumerate(members):
        pop[i, :] = ind.genotype.words
    pk_words = np.zeros((1, W), dtype=np.uint64)
    pk_a = np.zeros(1)
    pk_b = np.zeros(1)
    if not land.is_unitation():
        pk_words = np.zeros((len(land.peaks), W), dtype=np.uint64)
        for p, peak in enumerate(land.peaks):
            pk_words[p, :] = peak.position.words
        pk_a = np.array([p.a for p in land.peaks])
        pk_b = np.array([p.b for p in land.peaks])
    wref = config.winner_reference
    winner_words = _words_array(wref)
    winner_tag = np.zeros(mu + 1, dtype=np.int64)
    h_ref = np.zeros(mu + 1, dtype=np.int64)
    pot0 = 0
    for i, ind in enumerate(members):
        winner_tag[i] = 1 if ind.genotype == wref else 0
        h_ref[i] = hamming(ind.genotype, wref)
        pot0 += h_ref[i]
    target_tag = np.full(mu + 1, -1, dtype=np.int64)
    targets_words = np.zeros((1, W), dtype=np.uint64)
    target_count = np.zeros(1, dtype=np.int64)
    first_hit = np.full(1, -1, dtype=np.int64)
    wag = np.zeros(mu + 1, dtype=np.int64)
    dist_kind = 1 if config.distance == DistanceMeasure.PHENOTYPIC else 0

    state0 = np.zeros(12, dtype=np.int64)
    state0[1] = mu
    state0[2] = pot0
    state0[5] = zero_members
    state0[8] = mu
    state0[9] = -1
    state0[10] = -1

    chosen = np.zeros(n, dtype=np.int64)
    zpool = np.zeros(mu + 1, dtype=np.int32)
    tie_scratch = np.zeros(2 * max(1, pk_a.shape[0]), dtype=np.int64)
    binom_cdf = binomial_flip_cdf(n)
    rng_s = np.array(rng.state(), dtype=np.uint64)
    dphi = np.zeros(trials)
    new_winner = np.zeros(trials, dtype=np.uint8)

    work = [a.copy() for a in (pop, ones, raw, rank, seq, order, cleared,
                               by_age, age_pos, target_tag, winner_tag,
                               h_ref, wag)]
    K._gt_drift_trials(
        n, mu, W,
        pop, ones, raw, rank, seq, order, cleared, by_age, age_pos,
        target_tag, winner_tag, h_ref, wag,
        *work,
        kind, table, rank_table, pk_words, pk_a, pk_b, cand,
        float(config.clearing.sigma), config.clearing.kappa, dist_kind,
        binom_cdf, chosen, zpool, tie_scratch,
        targets_words, target_count, first_hit,
        _words_array(wref), winner_words,
        state0, rng_s, trials, dphi, new_winner,
    )
    return dphi, new_winner


def write_trace_csv(path, trace: np.ndarray) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(TRACE_COLUMNS) + "\n")
        for row in trace:
            fh.write("%d,%s,%d,%d,%d,%d,%d\n" % (
                int(row[0]), repr(float(row[1])), int(row[2]), int(row[3]),
                int(row[4]), int(row[5]), int(row[6])))
