"""Core types: bitstrings, the seeded RNG and its compiled twin, mutation."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numba import njit

from nichelab import _kernels as K
from nichelab.core import (
    Bitstring,
    RngHandle,
    binomial_flip_cdf,
    hamming,
    mutate,
    random_bitstring,
    sample_flip_count,
    xoshiro_seed_state,
)

bit_strings = st.text(alphabet="01", min_size=1, max_size=200)


# ---------------------------------------------------------------------------
# Bitstring


def test_bitstring_round_trip_examples():
    for s in ("0", "1", "0101", "1" * 64, "01" * 40):
        assert Bitstring.from_str(s).to01() == s


@given(bit_strings)
def test_bitstring_round_trip(s):
    b = Bitstring.from_str(s)
    assert b.to01() == s
    assert len(b) == len(s)
    assert b.ones_count == s.count("1")


@given(bit_strings)
def test_ones_plus_zeros_is_n(s):
    b = Bitstring.from_str(s)
    assert b.ones_count + b.to01().count("0") == b.n


def test_bitstring_bit_indexing():
    b = Bitstring.from_str("0110")
    assert [b.bit(i) for i in range(4)] == [0, 1, 1, 0]
    with pytest.raises(IndexError):
        b.bit(4)
    with pytest.raises(IndexError):
        b.bit(-1)


def test_bitstring_rejects_bad_input():
    with pytest.raises(ValueError):
        Bitstring.from_str("")
    with pytest.raises(ValueError):
        Bitstring.from_str("01x")
    with pytest.raises(ValueError):
        Bitstring(0, np.zeros(0, dtype=np.uint64))
    with pytest.raises(ValueError):
        Bitstring(10, np.zeros(2, dtype=np.uint64))  # wrong word count


def test_tail_bits_are_masked():
    # extra high bits in the last word must not leak into equality or counts
    words = np.full(2, 0xFFFFFFFFFFFFFFFF, dtype=np.uint64)
    b = Bitstring(65, words)
    assert b.ones_count == 65
    assert b == Bitstring.ones(65)
    assert hash(b) == hash(Bitstring.ones(65))


def test_flipped_and_complement():
    b = Bitstring.zeros(10)
    f = b.flipped([0, 9])
    assert f.to01() == "1000000001"
    assert b.to01() == "0" * 10  # immutable
    assert f.flipped([0, 9]) == b
    assert b.complement() == Bitstring.ones(10)
    with pytest.raises(IndexError):
        b.flipped([10])


@given(bit_strings, st.data())
def test_flipped_is_involution(s, data):
    b = Bitstring.from_str(s)
    pos = data.draw(st.lists(st.integers(0, b.n - 1), unique=True, max_size=b.n))
    assert b.flipped(pos).flipped(pos) == b


def test_equality_and_hash():
    a = Bitstring.from_str("0101")
    assert a == Bitstring.from_str("0101")
    assert a != Bitstring.from_str("0100")
    assert a != Bitstring.from_str("01010")
    assert a != "0101"
    assert hash(a) == hash(Bitstring.from_str("0101"))
    d = {a: 1}
    assert d[Bitstring.from_str("0101")] == 1


# ---------------------------------------------------------------------------
# hamming


def test_hamming_examples():
    assert hamming(Bitstring.from_str("1100"), Bitstring.from_str("0110")) == 2
    assert hamming(Bitstring.zeros(7), Bitstring.ones(7)) == 7
    with pytest.raises(ValueError):
        hamming(Bitstring.zeros(3), Bitstring.zeros(4))


@given(bit_strings, st.data())
def test_hamming_properties(s, data):
    a = Bitstring.from_str(s)
    t = data.draw(st.text(alphabet="01", min_size=a.n, max_size=a.n))
    b = Bitstring.from_str(t)
    d = hamming(a, b)
    assert d == hamming(b, a)
    assert 0 <= d <= a.n
    assert (d == 0) == (a == b)
    assert hamming(a, a.complement()) == a.n


# ---------------------------------------------------------------------------
# RngHandle and the compiled twin


def test_rng_determinism():
    a = RngHandle(seed=123, stream=7)
    b = RngHandle(seed=123, stream=7)
    assert [a.next_u64() for _ in range(50)] == [b.next_u64() for _ in range(50)]
    c = RngHandle(seed=123, stream=8)
    assert [RngHandle(123, 7).next_u64() for _ in range(5)] != [
        c.next_u64() for _ in range(5)
    ]


def test_uniform_range_and_randint_bounds():
    rng = RngHandle(5)
    us = [rng.uniform() for _ in range(2000)]
    assert all(0.0 <= u < 1.0 for u in us)
    assert 0.4 < sum(us) / len(us) < 0.6
    for bound in (1, 2, 3, 7, 64, 100):
        vals = [rng.randint(bound) for _ in range(500)]
        assert all(0 <= v < bound for v in vals)
        if bound > 1:
            assert len(set(vals)) > 1
    with pytest.raises(ValueError):
        rng.randint(0)


def test_randint_one_consumes_one_draw():
    # kernels rely on randint(1) advancing the stream by exactly one u64
    a = RngHandle(9)
    b = RngHandle(9)
    assert a.randint(1) == 0
    b.next_u64()
    assert a.state() == b.state()


@njit(cache=True)
def _drain_twin(s, n_u64, n_unif, bounds):
    u64s = np.empty(n_u64, dtype=np.uint64)
    for i in range(n_u64):
        u64s[i] = K.rng_next(s)
    unifs = np.empty(n_unif)
    for i in range(n_unif):
        unifs[i] = K.rng_uniform(s)
    ints = np.empty(bounds.shape[0], dtype=np.int64)
    for i in range(bounds.shape[0]):
        ints[i] = K.rng_randint(s, bounds[i])
    return u64s, unifs, ints


@pytest.mark.parametrize("seed,stream", [(0, 0), (1, 0), (123, 45), (2**63, 3)])
def test_compiled_rng_matches_python(seed, stream):
    """The numba twin must reproduce the Python stream word for word."""
    s = np.array(xoshiro_seed_state(seed, stream), dtype=np.uint64)
    bounds = np.array([1, 2, 3, 10, 100, 1000, 7, 64], dtype=np.int64)
    u64s, unifs, ints = _drain_twin(s, 20, 10, bounds)

    rng = RngHandle(seed, stream)
    assert [int(x) for x in u64s] == [rng.next_u64() for _ in range(20)]
    assert [float(x) for x in unifs] == [rng.uniform() for _ in range(10)]
    assert [int(x) for x in ints] == [rng.randint(int(b)) for b in bounds]
    # both sides must land on the same state afterwards
    assert tuple(int(x) for x in s) == rng.state()


def test_seed_state_never_all_zero():
    assert any(xoshiro_seed_state(0, 0))


# ---------------------------------------------------------------------------
# random_bitstring


def test_random_bitstring_basics():
    rng = RngHandle(0)
    b = random_bitstring(1, rng)
    assert b.n == 1 and b.to01() in ("0", "1")
    assert random_bitstring(30, RngHandle(4, 2)) == random_bitstring(30, RngHandle(4, 2))


def test_random_bitstring_mean_ones():
    rng = RngHandle(11)
    total = sum(random_bitstring(30, rng).ones_count for _ in range(10 ** 4))
    mean = total / 10 ** 4
    assert 14.5 <= mean <= 15.5


# ---------------------------------------------------------------------------
# mutation


def test_binomial_flip_cdf_values():
    assert binomial_flip_cdf(1).tolist() == [0.0, 1.0]
    for n in (2, 5, 10, 30, 100):
        cdf = binomial_flip_cdf(n)
        assert cdf.shape == (n + 1,)
        assert cdf[-1] == 1.0
        # non-decreasing, except the exact final clamp may sit one ulp
        # below the accumulated sum
        assert np.all(np.diff(cdf) >= -1e-15)
        assert np.all(np.diff(cdf[:-1]) >= 0)
        scipy_stats = pytest.importorskip("scipy.stats")
        ref = scipy_stats.binom.cdf(np.arange(n + 1), n, 1.0 / n)
        np.testing.assert_allclose(cdf, ref, rtol=0, atol=1e-12)


def test_mutate_n1_always_flips():
    rng = RngHandle(3)
    for _ in range(20):
        assert mutate(Bitstring.from_str("0"), rng).to01() == "1"
        assert mutate(Bitstring.from_str("1"), rng).to01() == "0"


def test_mutate_mean_flip_distance_n100():
    rng = RngHandle(17)
    x = Bitstring.zeros(100)
    total = sum(mutate(x, rng).ones_count for _ in range(10 ** 5))
    assert 0.97 <= total / 10 ** 5 <= 1.03


def test_mutate_n2_mask_distribution():
    # per-bit independence at n=2: all four flip masks have probability 1/4
    rng = RngHandle(23)
    x = Bitstring.from_str("00")
    counts = {"00": 0, "01": 0, "10": 0, "11": 0}
    trials = 4 * 10 ** 4
    for _ in range(trials):
        counts[mutate(x, rng).to01()] += 1
    for v in counts.values():
        # 5 sigma band around trials/4, sigma = sqrt(trials*p*(1-p))
        assert abs(v - trials / 4) < 5 * (trials * 0.25 * 0.75) ** 0.5


def test_flip_count_chi_square():
    """Flip counts for n=10 follow Binomial(10, 1/10) (GOF at alpha=0.001)."""
    scipy_stats = pytest.importorskip("scipy.stats")
    n, trials = 10, 10 ** 5
    rng = RngHandle(29)
    observed = np.zeros(n + 1)
    for _ in range(trials):
        observed[sample_flip_count(n, rng)] += 1
    expected = trials * np.diff(np.concatenate([[0.0], binomial_flip_cdf(n)]))
    # pool the sparse tail so every expected count is >= 5
    cut = int(np.searchsorted(expected < 5, True))
    obs = np.concatenate([observed[:cut], [observed[cut:].sum()]])
    exp = np.concatenate([expected[:cut], [expected[cut:].sum()]])
    _, pvalue = scipy_stats.chisquare(obs, exp)
    assert pvalue > 0.001


def test_mutate_leaves_parent_unchanged():
    x = Bitstring.from_str("0110")
    rng = RngHandle(1)
    mutate(x, rng)
    assert x.to01() == "0110"
