"""Fitness landscapes: unitation tables, TwoMax, nearest-peak families."""

import json
import logging

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nichelab.core import Bitstring, RngHandle, ValidationError, hamming
from nichelab.landscapes import (
    Landscape,
    Peak,
    basin_boundary,
    closest_peak,
    complementary_peaks,
    f1_value,
    f2_value,
    g_value,
    twomax,
    twomax_value,
)


def bs(s):
    return Bitstring.from_str(s)


def all_bitstrings(n):
    for v in range(2 ** n):
        yield Bitstring.from_str(format(v, f"0{n}b"))


# ---------------------------------------------------------------------------
# twomax


def test_twomax_examples():
    assert twomax_value(Bitstring.zeros(30)) == 30
    assert twomax_value(bs("0" * 15 + "1" * 15)) == 15
    assert twomax_value(bs("101")) == 2


def test_twomax_landscape_table():
    land = twomax(4)
    assert land.values.tolist() == [4, 3, 2, 3, 4]
    assert land.evaluate(bs("0110")) == 2.0


# ---------------------------------------------------------------------------
# g_value / closest_peak / f1 / f2


def test_g_value_examples():
    p = bs("1010")
    assert g_value(p, p) == 4
    assert g_value(p.complement(), p) == 0
    assert g_value(bs("1100"), p) == 2
    with pytest.raises(ValueError):
        g_value(bs("110"), p)


def test_closest_peak_examples():
    single = [Peak(bs("0110"), 1.0, 0.0)]
    assert closest_peak(bs("1111"), single) == 0

    # equidistant peaks resolved by higher weighted value
    peaks = [Peak(bs("0011"), 1.0, 0.0), Peak(bs("1100"), 2.0, 0.0)]
    assert closest_peak(bs("0000"), peaks) == 1

    # unique distance minimizer wins outright
    peaks = [Peak(bs("0001"), 1.0, 0.0), Peak(bs("0011"), 1.0, 0.0)]
    assert closest_peak(bs("0000"), peaks) == 0


def test_closest_peak_random_stage():
    """Randomness is consumed only when a genuine two-stage tie remains."""
    peaks = [Peak(bs("0011"), 1.0, 0.0), Peak(bs("1100"), 1.0, 0.0)]
    x = bs("0000")
    with pytest.raises(ValidationError):
        closest_peak(x, peaks)  # tie but no rng

    rng = RngHandle(0)
    before = rng.state()
    got = {closest_peak(x, peaks, rng) for _ in range(40)}
    assert got == {0, 1}
    assert rng.state() != before

    # no tie: the rng must stay untouched
    rng2 = RngHandle(0)
    closest_peak(bs("0111"), peaks, rng2)
    assert rng2.state() == RngHandle(0).state()

    with pytest.raises(ValidationError):
        closest_peak(x, [])


def test_closest_peak_tie_logs(caplog):
    peaks = [Peak(bs("0011"), 1.0, 0.0), Peak(bs("1100"), 1.0, 0.0)]
    with caplog.at_level(logging.INFO, logger="nichelab.landscapes"):
        closest_peak(bs("0000"), peaks, RngHandle(1))
    assert any("tie-break" in r.message for r in caplog.records)


def test_f1_examples():
    p1 = Peak(Bitstring.zeros(6), 1.0, 0.0)
    assert f1_value(p1.position, [p1]) == 6

    peaks = [p1, Peak(Bitstring.ones(6), 1.0, 0.0)]
    assert f1_value(bs("000011"), peaks) == 4
    # equidistant with equal values: either branch yields 3
    assert f1_value(bs("000111"), peaks, RngHandle(5)) == 3


def test_f2_examples():
    n = 10
    peaks = [Peak(Bitstring.zeros(n), 1.0, 0.0), Peak(Bitstring.ones(n), 1.0, 0.0)]
    for x in all_bitstrings(n):
        assert f2_value(x, peaks) == twomax_value(x)

    p = [Peak(bs("0000"), 1.0, 0.0), Peak(bs("1111"), 2.0, 0.0)]
    assert f2_value(bs("1111"), p) == 8  # a*n + b at the weighted peak
    assert f2_value(bs("1000"), p) == 3  # max(1*3, 2*1)
    with pytest.raises(ValidationError):
        f2_value(bs("0000"), [])


@given(st.integers(1, 12), st.data())
def test_f1_equals_f2_for_single_peak(n, data):
    pos = data.draw(st.text(alphabet="01", min_size=n, max_size=n))
    a = data.draw(st.floats(0.1, 5.0, allow_nan=False))
    b = data.draw(st.floats(0.0, 3.0, allow_nan=False))
    peaks = [Peak(bs(pos), a, b)]
    xs = data.draw(st.lists(st.text(alphabet="01", min_size=n, max_size=n),
                            min_size=1, max_size=8))
    for xv in xs:
        assert f1_value(bs(xv), peaks) == f2_value(bs(xv), peaks)


def test_twomax_equals_complementary_f2_exhaustive():
    for n in (2, 5, 12):
        peaks = [Peak(Bitstring.zeros(n), 1.0, 0.0),
                 Peak(Bitstring.ones(n), 1.0, 0.0)]
        land = Landscape("f2", n, peaks=peaks)
        for x in all_bitstrings(n):
            assert land.evaluate(x) == twomax_value(x)


# ---------------------------------------------------------------------------
# basin_boundary


def test_basin_boundary_examples():
    assert basin_boundary(1.0, 1.0, 0.0, 0.0, 30) == 15
    assert basin_boundary(1.0, 2.0, 0.0, 0.0, 30) == 20
    assert basin_boundary(1.0, 1.0, 0.0, 2.0, 10) == 6  # b2-b1 = a1+a2
    with pytest.raises(ValidationError):
        basin_boundary(0.0, 1.0, 0.0, 0.0, 10)


# ---------------------------------------------------------------------------
# Peak / Landscape validation


def test_peak_validation():
    with pytest.raises(ValidationError):
        Peak(bs("01"), 0.0, 0.0)
    with pytest.raises(ValidationError):
        Peak(bs("01"), 1.0, -1.0)


def test_landscape_validation():
    with pytest.raises(ValidationError):
        Landscape("hills", 4)
    with pytest.raises(ValidationError):
        Landscape("twomax", 0)
    with pytest.raises(ValidationError):
        Landscape("unitation", 3, values=[1, 2, 3])  # needs n+1 entries
    with pytest.raises(ValidationError):
        Landscape("unitation", 2, values=[1, -1, 0])
    with pytest.raises(ValidationError):
        Landscape("f1", 4, peaks=[])
    with pytest.raises(ValidationError):
        Landscape("f2", 4, peaks=[Peak(bs("01"), 1.0, 0.0)])
    land = twomax(4)
    with pytest.raises(ValidationError):
        land.evaluate(bs("01"))


def test_candidate_values_sorted_unique():
    peaks = [Peak(bs("0000"), 1.0, 0.0), Peak(bs("1111"), 2.0, 1.0)]
    vals = Landscape("f2", 4, peaks=peaks).candidate_values()
    assert np.all(np.diff(vals) > 0)
    assert set(vals.tolist()) == {0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 7.0, 9.0}


# ---------------------------------------------------------------------------
# JSON round trip


def test_landscape_json_round_trip(tmp_path):
    lands = [
        twomax(6),
        Landscape("unitation", 3, values=[3, 1, 1, 3]),
        Landscape("f1", 4, peaks=[Peak(bs("0011"), 1.5, 0.5)]),
        Landscape("f2", 4, peaks=complementary_peaks(4, 2)),
    ]
    for land in lands:
        path = tmp_path / f"{land.variant}.json"
        land.save(path)
        back = Landscape.load(path)
        assert back.variant == land.variant and back.n == land.n
        for x in all_bitstrings(land.n):
            rng1, rng2 = RngHandle(3), RngHandle(3)
            assert land.evaluate(x, rng1) == back.evaluate(x, rng2)


def test_landscape_json_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ValidationError):
        Landscape.load(bad)
    with pytest.raises(ValidationError):
        Landscape.from_json_dict([])
    with pytest.raises(ValidationError):
        Landscape.from_json_dict({"variant": "twomax", "n": "ten"})
    with pytest.raises(ValidationError):
        Landscape.from_json_dict(
            {"variant": "f2", "n": 4, "peaks": [{"position": 7}]}
        )


# ---------------------------------------------------------------------------
# complementary_peaks


def test_complementary_peaks():
    for n, d in ((10, 1), (10, 5), (10, 10), (7, 3)):
        p1, p2 = complementary_peaks(n, d)
        assert p1.position == Bitstring.zeros(n)
        assert p2.position.ones_count == d
        assert hamming(p1.position, p2.position) == d
    with pytest.raises(ValidationError):
        complementary_peaks(10, 0)
    with pytest.raises(ValidationError):
        complementary_peaks(10, 11)
