"""Bitstring fitness landscapes: unitation tables, TwoMax, and peak families.

A landscape is one of four variants:

- "unitation": f(x) = values[|x|_1], values a table of n+1 nonnegative reals
- "twomax":    f(x) = max(|x|_1, n - |x|_1), the two-peak special case
- "f1":        nearest-peak landscape; value of the closest peak at x
- "f2":        max over peaks of a_i * G(x, p_i) + b_i

where G(x, p) = n - H(x, p) counts agreeing positions. f1 resolves
equidistant peaks by higher value, then uniformly at random.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import numpy as np

from .core import Bitstring, RngHandle, ValidationError, hamming

logger = logging.getLogger(__name__)

VARIANTS = ("twomax", "unitation", "f1", "f2")


def twomax_value(x: Bitstring) -> float:
    u = x.ones_count
    return float(max(u, x.n - u))


def twomax_table(n: int) -> np.ndarray:
    u = np.arange(n + 1)
    return np.maximum(u, n - u).astype(np.float64)


@dataclass(frozen=True)
class Peak:
    position: Bitstring
    a: float
    b: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValidationError("peak slope a must be > 0")
        if self.b < 0:
            raise ValidationError("peak offset b must be >= 0")


def g_value(x: Bitstring, p: Bitstring) -> int:
    """Number of positions where x agrees with p: n - H(x, p)."""
    return x.n - hamming(x, p)


def closest_peak(x: Bitstring, peaks: list, rng: RngHandle | None = None) -> int:
    """Index of the peak closest to x.

    Ties on distance are broken by higher peak value at x; remaining ties
    uniformly at random. The random stage draws from rng only when a genuine
    tie survives the first two stages.
    """
    if not peaks:
        raise ValidationError("closest_peak needs at least one peak")
    dists = [hamming(x, p.position) for p in peaks]
    dmin = min(dists)
    tied = [i for i, d in enumerate(dists) if d == dmin]
    if len(tied) > 1:
        vals = [peaks[i].a * g_value(x, peaks[i].position) + peaks[i].b for i in tied]
        vmax = max(vals)
        tied = [i for i, v in zip(tied, vals) if v == vmax]
    if len(tied) == 1:
        return tied[0]
    if rng is None:
        raise ValidationError("closest_peak tie needs an RNG to resolve")
    choice = tied[rng.randint(len(tied))]
    logger.info("closest_peak random tie-break among %d peaks", len(tied))
    return choice


def f1_value(x: Bitstring, peaks: list, rng: RngHandle | None = None) -> float:
    i = closest_peak(x, peaks, rng)
    return peaks[i].a * g_value(x, peaks[i].position) + peaks[i].b


def f2_value(x: Bitstring, peaks: list) -> float:
    if not peaks:
        raise ValidationError("f2 needs at least one peak")
    return max(p.a * g_value(x, p.position) + p.b for p in peaks)


def basin_boundary(a1: float, a2: float, b1: float, b2: float, n: int) -> float:
    """Threshold T = a2*n/(a1+a2) + (b2-b1)/(a1+a2) for two complementary
    peaks; callers classify x into the first peak's basin via G(x,p1) < T,
    with the orientation exactly as printed in the source analysis."""
    if a1 <= 0 or a2 <= 0:
        raise ValidationError("basin_boundary needs positive slopes")
    return a2 * n / (a1 + a2) + (b2 - b1) / (a1 + a2)


class Landscape:
    """Tagged union over the four variants with JSON round-tripping."""

    def __init__(self, variant: str, n: int, values=None, peaks=None):
        if variant not in VARIANTS:
            raise ValidationError(f"unknown landscape variant {variant!r}")
        if n < 1:
            raise ValidationError("landscape length must be >= 1")
        self.variant = variant
        self.n = n
        self.values = None
        self.peaks = None
        if variant == "twomax":
            self.values = twomax_table(n)
        elif variant == "unitation":
            values = np.asarray(values, dtype=np.float64)
            if values.shape != (n + 1,):
                raise ValidationError("unitation table must have length n+1")
            if not np.all(np.isfinite(values)) or np.any(values < 0):
                raise ValidationError("unitation table entries must be finite and >= 0")
            self.values = values.copy()
        else:
            if not peaks:
                raise ValidationError(f"{variant} needs a nonempty peak list")
            for p in peaks:
                if p.position.n != n:
                    raise ValidationError("peak position length must equal n")
            self.peaks = list(peaks)

    def is_unitation(self) -> bool:
        return self.variant in ("twomax", "unitation")

    def evaluate(self, x: Bitstring, rng: RngHandle | None = None) -> float:
        if x.n != self.n:
            raise ValidationError("genotype length does not match landscape")
        if self.is_unitation():
            return float(self.values[x.ones_count])
        if self.variant == "f2":
            return f2_value(x, self.peaks)
        return f1_value(x, self.peaks, rng)

    def candidate_values(self) -> np.ndarray:
        """Sorted unique array of every value the landscape can take,
        used to build integer fitness ranks for the simulation kernels."""
        if self.is_unitation():
            return np.unique(self.values)
        vals = set()
        for p in self.peaks:
            for g in range(self.n + 1):
                vals.add(p.a * g + p.b)
        return np.array(sorted(vals), dtype=np.float64)

    def to_json_dict(self) -> dict:
        out = {"variant": self.variant, "n": self.n}
        if self.variant == "unitation":
            out["values"] = [float(v) for v in self.values]
        elif self.peaks is not None:
            out["peaks"] = [
                {"position": p.position.to01(), "a": p.a, "b": p.b} for p in self.peaks
            ]
        return out

    @classmethod
    def from_json_dict(cls, d: dict) -> "Landscape":
        if not isinstance(d, dict):
            raise ValidationError("landscape JSON must be an object")
        variant = d.get("variant")
        if variant not in VARIANTS:
            raise ValidationError(f"unknown landscape variant {variant!r}")
        n = d.get("n")
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise ValidationError("landscape n must be a positive integer")
        values = d.get("values")
        peaks = None
        if "peaks" in d:
            peaks = []
            for pd in d["peaks"]:
                pos = pd.get("position")
                if not isinstance(pos, str):
                    raise ValidationError("peak position must be a 0/1 string")
                try:
                    bs = Bitstring.from_str(pos)
                except ValueError as e:
                    raise ValidationError(str(e)) from None
                peaks.append(Peak(bs, float(pd.get("a", 1.0)), float(pd.get("b", 0.0))))
        return cls(variant, n, values=values, peaks=peaks)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Landscape":
        with open(path) as fh:
            try:
                d = json.load(fh)
            except json.JSONDecodeError as e:
                raise ValidationError(f"landscape file is not valid JSON: {e}") from None
        return cls.from_json_dict(d)


def twomax(n: int) -> Landscape:
    return Landscape("twomax", n)


def complementary_peaks(n: int, d: int, a: float = 1.0, b: float = 0.0) -> list:
    """Peak pair (0^n, 0^(n-d) 1^d): first peak all zeros, second with d ones
    in the trailing positions, H(p1, p2) = d."""
    if not 1 <= d <= n:
        raise ValidationError("peak distance d must be in [1, n]")
    p1 = Bitstring.zeros(n)
    p2 = Bitstring.zeros(n).flipped(range(n - d, n))
    return [Peak(p1, a, b), Peak(p2, a, b)]
