"""Closed-form quantities for the (mu+1) EA with clearing.

Every function here is independent of the engine: these are the analytical
values the simulator is checked against, plus helpers the CLI exposes.

Takeover model: count the members of the best niche. One generation moves
the count i up when the parent is in the niche and the removed member is
not, down in the symmetric case, except that the last niche member cannot
be removed (it is a niche winner with full effective fitness while some
other member always sits at effective fitness zero or below it). That gives
a birth-death chain on {1, .., mu} absorbing at mu with

    p_i = q_i = i (mu - i) / mu^2,  q_1 = 0.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from numba import njit

from ._kernels import rng_randint, rng_uniform
from .core import ValidationError, xoshiro_seed_state

_EXACT_MU_LIMIT = 64


def drift_expectation(n: int, mu: int, kappa: int, phi: float) -> float:
    """Expected one-generation change of the niche potential at potential
    phi: 1 - (phi/mu) (2/n + kappa/(mu-kappa))."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    if not 1 <= kappa < mu:
        raise ValidationError("drift needs 1 <= kappa < mu")
    if not 0 <= phi <= mu * n:
        raise ValidationError("potential must lie in [0, mu*n]")
    return 1.0 - (phi / mu) * (2.0 / n + kappa / (mu - kappa))


def min_mu_for_distance(n: int, d: float, kappa: int) -> float:
    """Smallest population size keeping the potential drift positive while
    every member sits within distance d of the niche centre."""
    if kappa < 1:
        raise ValidationError("kappa must be >= 1")
    if n < 1:
        raise ValidationError("n must be >= 1")
    if not 0 <= d <= n / 2:
        raise ValidationError("distance must lie in [0, n/2]")
    raw = kappa * (d * n - 2 * d + 2) / (n - 2 * d + 2)
    return max(float(kappa), raw)


def moran_expected_takeover(mu: int, x0: int) -> Fraction:
    """Exact expected generations until the best niche fills the population,
    starting from x0 members. Kept rational; mu is capped because the exact
    sum is only needed at test scale (use the bounds or the Monte Carlo
    estimate beyond that)."""
    if mu < 2:
        raise ValidationError("takeover needs mu >= 2")
    if not 1 <= x0 <= mu:
        raise ValidationError("x0 must lie in [1, mu]")
    if mu > _EXACT_MU_LIMIT:
        raise ValidationError(f"exact takeover supports mu <= {_EXACT_MU_LIMIT}")
    # d_i = E_i - E_{i+1} follows d_i = d_{i-1} + mu^2 / (i (mu - i));
    # E_{x0} = sum of d_i over i in [x0, mu)
    total = Fraction(0)
    d = Fraction(0)
    for i in range(1, mu):
        d += Fraction(mu * mu, i * (mu - i))
        if i >= x0:
            total += d
    return total


def harmonic(k: int) -> float:
    if k < 1:
        raise ValidationError("harmonic number needs k >= 1")
    return float(sum(Fraction(1, j) for j in range(1, k + 1)))


def moran_takeover_bounds(mu: int, x0: int) -> tuple[float, float, float]:
    """(lower, upper, coarse_cap) for the expected takeover time.

    lower = (mu - x0) mu ln(mu - 1) / 2, upper = 4 (mu - x0) mu H(floor(mu/2)),
    coarse_cap = 4 mu^2 ln mu (an upper bound in cruder form).
    """
    if mu < 2:
        raise ValidationError("takeover needs mu >= 2")
    if not 1 <= x0 <= mu:
        raise ValidationError("x0 must lie in [1, mu]")
    lower = 0.5 * (mu - x0) * mu * math.log(mu - 1) if mu > 2 else 0.0
    upper = 4.0 * (mu - x0) * mu * harmonic(mu // 2)
    coarse = 4.0 * mu * mu * math.log(mu)
    return lower, upper, coarse


@njit(cache=True)
def _moran_mc(mu, x0, trials, rng_s, out):
    for t in range(trials):
        i = x0
        steps = 0.0
        while i < mu:
            p = np.float64(i * (mu - i)) / np.float64(mu * mu)
            r = 2.0 * p
            if i == 1:
                r = p
            # geometric skip to the next resolving generation
            u = 1.0 - rng_uniform(rng_s)
            steps += 1.0 + np.floor(np.log(u) / np.log1p(-r))
            if i == 1:
                i = 2
            elif rng_randint(rng_s, 2) == 0:
                i += 1
            else:
                i -= 1
        out[t] = steps


def moran_simulate(mu: int, x0: int, trials: int, seed: int = 0,
                   stream: int = 0) -> tuple[float, float]:
    """Monte Carlo mean and standard error of the takeover time."""
    if mu < 2:
        raise ValidationError("takeover needs mu >= 2")
    if not 1 <= x0 <= mu:
        raise ValidationError("x0 must lie in [1, mu]")
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    rng_s = np.array(xoshiro_seed_state(seed, stream), dtype=np.uint64)
    out = np.zeros(trials)
    _moran_mc(mu, x0, trials, rng_s, out)
    mean = float(np.mean(out))
    se = float(np.std(out) / math.sqrt(trials)) if trials > 1 else 0.0
    return mean, se


def fitness_level_bound(mu: int, n: float) -> float:
    """mu e n ln n: expected-generation bound for climbing a unimodal
    unitation profile with a (mu+1) EA."""
    if mu < 1:
        raise ValidationError("mu must be >= 1")
    if n <= 1:
        raise ValidationError("n must be > 1")
    return mu * math.e * n * math.log(n)
