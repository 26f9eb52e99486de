"""Core types: packed bitstrings, individuals, populations, and the RNG.

Bitstrings are stored packed, 64 positions per uint64 word, bit i living at
word i // 64, bit i % 64. Unused high bits of the last word are always zero
so that equality and hashing can work on the raw words.

The random number generator is xoshiro256++ seeded through splitmix64 from a
(seed, stream) pair. The same construction is reimplemented inside the numba
kernels; test_core cross-checks the two word streams, so any change here must
be mirrored there.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

_MASK64 = (1 << 64) - 1
_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15
_STREAM_MULT = 0xBF58476D1CE4E5B9


class ValidationError(ValueError):
    """A config, landscape, or parameter value failed validation."""


def _splitmix64(state: int) -> tuple[int, int]:
    state = (state + _SPLITMIX_GAMMA) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def xoshiro_seed_state(seed: int, stream: int) -> tuple[int, int, int, int]:
    """Derive the four xoshiro256++ state words for a (seed, stream) pair."""
    x = (seed & _MASK64) ^ ((stream & _MASK64) * _STREAM_MULT & _MASK64)
    words = []
    for _ in range(4):
        x, out = _splitmix64(x)
        words.append(out)
    if not any(words):
        words[0] = _SPLITMIX_GAMMA  # all-zero state is invalid for xoshiro
    return tuple(words)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class RngHandle:
    """Deterministic splittable RNG stream.

    Identical (seed, stream) pairs reproduce identical sequences on any
    platform: all state transitions are integer-only, and uniform() uses only
    exact float operations (a shift and a multiply by 2**-53).
    """

    __slots__ = ("seed", "stream", "_s")

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed)
        self.stream = int(stream)
        self._s = list(xoshiro_seed_state(self.seed, self.stream))

    def next_u64(self) -> int:
        s = self._s
        result = (_rotl((s[0] + s[3]) & _MASK64, 23) + s[0]) & _MASK64
        t = (s[1] << 17) & _MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def randint(self, bound: int) -> int:
        """Uniform integer in [0, bound) by bitmask rejection (unbiased)."""
        if bound <= 0:
            raise ValueError("randint bound must be positive")
        mask = bound - 1
        mask |= mask >> 1
        mask |= mask >> 2
        mask |= mask >> 4
        mask |= mask >> 8
        mask |= mask >> 16
        mask |= mask >> 32
        while True:
            r = self.next_u64() & mask
            if r < bound:
                return r

    def state(self) -> tuple[int, int, int, int]:
        return tuple(self._s)


class Bitstring:
    """Immutable fixed-length bitstring packed into uint64 words."""

    __slots__ = ("n", "words", "_hash")

    def __init__(self, n: int, words: np.ndarray):
        if n < 1:
            raise ValueError("bitstring length must be >= 1")
        expected = (n + 63) // 64
        if words.shape != (expected,) or words.dtype != np.uint64:
            raise ValueError("words array does not match length")
        words = words.copy()
        tail = n % 64
        if tail:
            words[-1] &= np.uint64((1 << tail) - 1)
        words.setflags(write=False)
        self.n = n
        self.words = words
        self._hash = hash((n, words.tobytes()))

    @classmethod
    def zeros(cls, n: int) -> "Bitstring":
        return cls(n, np.zeros((n + 63) // 64, dtype=np.uint64))

    @classmethod
    def ones(cls, n: int) -> "Bitstring":
        return cls(n, np.full((n + 63) // 64, _MASK64, dtype=np.uint64))

    @classmethod
    def from_str(cls, s: str) -> "Bitstring":
        n = len(s)
        if n == 0 or set(s) - {"0", "1"}:
            raise ValueError("bitstring literal must be nonempty over {0,1}")
        words = np.zeros((n + 63) // 64, dtype=np.uint64)
        acc = 0
        for i, c in enumerate(s):
            if c == "1":
                acc |= 1 << i
        for w in range(words.shape[0]):
            words[w] = (acc >> (64 * w)) & _MASK64
        return cls(n, words)

    def to01(self) -> str:
        return "".join("1" if self.bit(i) else "0" for i in range(self.n))

    def bit(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError("bit index out of range")
        return (int(self.words[i // 64]) >> (i % 64)) & 1

    @property
    def ones_count(self) -> int:
        return sum(int(w).bit_count() for w in self.words)

    def flipped(self, positions) -> "Bitstring":
        words = self.words.copy()
        for i in positions:
            if not 0 <= i < self.n:
                raise IndexError("flip position out of range")
            words[i // 64] ^= np.uint64(1 << (i % 64))
        return Bitstring(self.n, words)

    def complement(self) -> "Bitstring":
        return Bitstring(self.n, ~self.words)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Bitstring)
            and self.n == other.n
            and bool(np.array_equal(self.words, other.words))
        )

    def __hash__(self) -> int:
        return self._hash

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        if self.n <= 64:
            return f"Bitstring({self.to01()!r})"
        return f"Bitstring(n={self.n}, ones={self.ones_count})"


def hamming(a: Bitstring, b: Bitstring) -> int:
    if a.n != b.n:
        raise ValueError("hamming distance needs equal lengths")
    return int(sum(int(x ^ y).bit_count() for x, y in zip(a.words, b.words)))


@dataclass
class Individual:
    genotype: Bitstring
    raw_fitness: float
    effective_fitness: float = 0.0
    cleared: bool = False
    birth_generation: int = 0
    winner_ancestor_generation: int = 0

    def __post_init__(self):
        if not self.cleared and self.effective_fitness == 0.0:
            self.effective_fitness = self.raw_fitness


@dataclass
class Population:
    members: list = field(default_factory=list)
    generation: int = 0

    def __len__(self) -> int:
        return len(self.members)


def random_bitstring(n: int, rng: RngHandle) -> Bitstring:
    """Uniform random bitstring: one u64 draw per 64-bit block, in order,
    high bits of the last block discarded. The kernels follow the same
    protocol so trajectories can be compared draw-for-draw."""
    nwords = (n + 63) // 64
    words = np.empty(nwords, dtype=np.uint64)
    for w in range(nwords):
        words[w] = rng.next_u64()
    return Bitstring(n, words)


@lru_cache(maxsize=None)
def binomial_flip_cdf(n: int) -> np.ndarray:
    """CDF of Binomial(n, 1/n), used to sample the number of flipped bits.

    Computed with basic float operations only (no pow) so every platform
    produces the same table. binomial_flip_cdf(n)[n] is exactly 1.0.
    """
    if n == 1:
        return np.array([0.0, 1.0])
    q = (n - 1) / n
    pmf = np.empty(n + 1)
    p0 = 1.0
    for _ in range(n):
        p0 *= q
    pmf[0] = p0
    for k in range(n):
        # C(n,k+1)/C(n,k) = (n-k)/(k+1); each extra flip trades q for 1/n
        pmf[k + 1] = pmf[k] * (n - k) / ((k + 1) * (n - 1))
    cdf = np.cumsum(pmf)
    cdf[n] = 1.0
    return cdf


def sample_flip_count(n: int, rng: RngHandle) -> int:
    cdf = binomial_flip_cdf(n)
    u = rng.uniform()
    k = 0
    while u > cdf[k]:
        k += 1
    return k


def mutate(x: Bitstring, rng: RngHandle) -> Bitstring:
    """Standard bit mutation: each bit flips independently with prob 1/n.

    Sampled as k ~ Binomial(n, 1/n) flips at a uniform k-subset of positions,
    which has exactly the per-bit product distribution. Position draws use
    randint(n) with resampling on duplicates, in order, so kernels can mirror
    the draw sequence.
    """
    n = x.n
    k = sample_flip_count(n, rng)
    chosen = []
    while len(chosen) < k:
        pos = rng.randint(n)
        if pos not in chosen:
            chosen.append(pos)
    return x.flipped(chosen)
