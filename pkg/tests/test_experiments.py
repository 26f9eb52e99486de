"""Experiment harness tests: grid builders, the Wilson interval, CSV output,
stream layout, and reproducibility across worker counts."""

import csv
import math
import os

import pytest
from hypothesis import given, strategies as st

from nichelab.clearing import derived_param
from nichelab.core import ValidationError
from nichelab.experiments import (
    RUN_COLUMNS,
    STREAM_CELL_STRIDE,
    SUMMARY_COLUMNS,
    CellSpec,
    ExperimentConfig,
    _twomax_cell,
    fig4_config,
    fig6_config,
    run_experiment,
    table1_config,
    wilson_interval,
)


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _tiny_experiment(runs=6, mus=(4, 6)):
    cells = [CellSpec(label=f"mu={mu}", group="tiny",
                      run_config=_twomax_cell(8, mu, 1.0, 1, 2 * 10 ** 4))
             for mu in mus]
    return ExperimentConfig(name="tiny", cells=cells, runs_per_cell=runs,
                            base_seed=0)


# ---------------------------------------------------------------------------
# grid builders


def test_success_grid_has_full_parameter_cross():
    exp = table1_config(n=30)
    assert len(exp.cells) == 4 * 4 * 10  # sigma rules x kappa rules x mu
    assert exp.runs_per_cell == 100
    labels = [c.label for c in exp.cells]
    assert len(set(labels)) == len(labels)
    exp.validate()


def test_success_grid_kappa_rules_use_floor_counts():
    exp = table1_config(n=30, mus=[2], sigma_labels=["sigma=1"])
    by_label = {c.label: c for c in exp.cells}
    assert by_label["sigma=1 kappa=sqrt(mu) mu=2"].run_config["clearing"]["kappa"] == 1
    assert by_label["sigma=1 kappa=mu/2 mu=2"].run_config["clearing"]["kappa"] == 1
    assert by_label["sigma=1 kappa=mu mu=2"].run_config["clearing"]["kappa"] == 2
    assert derived_param(math.sqrt(2)) == 1


def test_success_grid_sigma_rule_keeps_exact_root():
    # the niche radius is a real threshold, not a count: sqrt(n) cells
    # carry the exact value rather than its floor
    exp = table1_config(n=30, kappa_labels=["kappa=1"], mus=[2])
    sigmas = {c.group: c.run_config["clearing"]["sigma"] for c in exp.cells}
    assert sigmas["sigma=sqrt(n)"] == math.sqrt(30)
    assert sigmas["sigma=n/2"] == 15.0
    assert sigmas["sigma=1"] == 1.0


def test_population_curve_grid_counts_and_endpoint():
    exp30 = fig4_config(30)
    mus30 = sorted({c.run_config["mu"] for c in exp30.cells})
    assert mus30 == [2, 4, 8, 16, 32, 64, 128, 225]
    assert len(exp30.cells) == 16  # eight sizes x two initialisations

    exp100 = fig4_config(100)
    mus100 = sorted({c.run_config["mu"] for c in exp100.cells})
    assert mus100[-1] == 100 * 100 // 4
    assert len(exp100.cells) == 24


def test_population_curve_biased_cells_start_from_all_zero():
    exp = fig4_config(30)
    biased = [c for c in exp.cells if c.group == "biased"]
    assert len(biased) == 8
    for c in biased:
        assert c.run_config["init"] == {"mode": "copies", "genotype": "0" * 30}
        assert c.run_config["clearing"]["sigma"] == 15.0


def test_distance_sweep_grid_counts():
    full = fig6_config(n=50)
    assert len(full.cells) == 100  # every d once per initialisation
    assert not full.full_extra_cells

    coarse = fig6_config(n=100)
    assert len(coarse.cells) == 16
    assert len(coarse.all_cells()) == 200


def test_distance_sweep_sigma_rules():
    mx = fig6_config(n=100, ds=[10, 100])
    by = {c.label: c for c in mx.cells}
    assert by["MaxFeasible uniform d=10"].run_config["clearing"]["sigma"] == 10.0
    # at d = n the radius saturates at n/2
    assert by["MaxFeasible uniform d=100"].run_config["clearing"]["sigma"] == 50.0

    mn = fig6_config(n=100, sigma_rule="MinFeasible", ds=[10])
    assert mn.cells[0].run_config["clearing"]["sigma"] == 5.0
    with pytest.raises(ValidationError):
        fig6_config(sigma_rule="Widest")


def test_distance_sweep_targets_are_the_two_peaks():
    exp = fig6_config(n=20, ds=[6])
    rc = exp.cells[0].run_config
    assert rc["targets"] == ["0" * 20, "0" * 14 + "1" * 6]
    assert rc["clearing"]["distance"] == "genotypic"
    assert exp.cells[0].d == 6


def test_grid_configs_round_trip_through_json(tmp_path):
    exp = fig6_config(n=100, runs=7)
    path = tmp_path / "exp.json"
    exp.save(path)
    back = ExperimentConfig.load(path)
    assert back.to_json_dict() == exp.to_json_dict()
    assert len(back.full_extra_cells) == len(exp.full_extra_cells)


# ---------------------------------------------------------------------------
# experiment config validation


def test_experiment_rejects_duplicate_labels():
    cell = CellSpec(label="same", group="g",
                    run_config=_twomax_cell(8, 4, 1.0, 1, 100))
    exp = ExperimentConfig(name="dup", cells=[cell, cell], runs_per_cell=2)
    with pytest.raises(ValidationError):
        exp.validate()


def test_experiment_rejects_empty_or_invalid():
    with pytest.raises(ValidationError):
        ExperimentConfig(name="x", cells=[], runs_per_cell=1).validate()
    exp = _tiny_experiment()
    exp.runs_per_cell = 0
    with pytest.raises(ValidationError):
        exp.validate()
    with pytest.raises(ValidationError):
        ExperimentConfig.from_json_dict({"name": "x"})
    with pytest.raises(ValidationError):
        ExperimentConfig.from_json_dict([1, 2])


def test_experiment_load_rejects_malformed_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ValidationError):
        ExperimentConfig.load(path)


# ---------------------------------------------------------------------------
# Wilson interval


def test_wilson_hand_values():
    lo, hi = wilson_interval(8, 10)
    assert lo == pytest.approx(0.4901624715366418, abs=1e-12)
    assert hi == pytest.approx(0.9433178485456247, abs=1e-12)


def test_wilson_boundary_cases():
    lo, hi = wilson_interval(0, 20)
    assert lo == 0.0
    assert 0.0 < hi < 0.2
    lo, hi = wilson_interval(20, 20)
    assert 0.8 < lo < 1.0
    assert hi == 1.0
    with pytest.raises(ValidationError):
        wilson_interval(0, 0)


@given(st.integers(1, 400), st.data())
def test_wilson_contains_point_estimate(runs, data):
    successes = data.draw(st.integers(0, runs))
    lo, hi = wilson_interval(successes, runs)
    p = successes / runs
    assert 0.0 <= lo <= p <= hi <= 1.0


@given(st.integers(1, 200), st.data())
def test_wilson_symmetric_under_complement(runs, data):
    successes = data.draw(st.integers(0, runs))
    lo, hi = wilson_interval(successes, runs)
    lo_c, hi_c = wilson_interval(runs - successes, runs)
    assert lo == pytest.approx(1.0 - hi_c, abs=1e-12)
    assert hi == pytest.approx(1.0 - lo_c, abs=1e-12)


# ---------------------------------------------------------------------------
# running experiments


def test_run_experiment_writes_consistent_csv(tmp_path):
    exp = _tiny_experiment()
    res = run_experiment(exp, str(tmp_path / "out"))
    runs = _read_csv(res["runs_csv"])
    summary = _read_csv(res["summary_csv"])
    assert list(runs[0].keys()) == list(RUN_COLUMNS)
    assert list(summary[0].keys()) == list(SUMMARY_COLUMNS)
    assert len(runs) == 2 * 6
    assert len(summary) == 2

    for ci, row in enumerate(summary):
        cell_runs = [r for r in runs if r["cell"] == row["cell"]]
        assert len(cell_runs) == int(row["runs"]) == 6
        successes = sum(1 for r in cell_runs if r["status"] == "Success")
        assert successes == int(row["successes"])
        rate = float(row["success_rate"])
        assert rate == successes / 6
        assert float(row["ci_low"]) <= rate <= float(row["ci_high"])
        gens = [int(r["generations"]) for r in cell_runs]
        assert float(row["mean_gens"]) == pytest.approx(sum(gens) / len(gens))
        # stream layout: cell index times the stride, plus the run index
        for r in cell_runs:
            assert int(r["stream"]) == ci * STREAM_CELL_STRIDE + int(r["run"])
            assert int(r["seed"]) == 0


def test_run_experiment_is_reproducible_byte_for_byte(tmp_path):
    exp = _tiny_experiment(runs=4)
    a = run_experiment(exp, str(tmp_path / "a"))
    b = run_experiment(exp, str(tmp_path / "b"))
    for key in ("runs_csv", "summary_csv"):
        with open(a[key], "rb") as fa, open(b[key], "rb") as fb:
            assert fa.read() == fb.read()


def test_worker_count_does_not_change_output(tmp_path):
    exp = _tiny_experiment(runs=4)
    serial = run_experiment(exp, str(tmp_path / "serial"), workers=1)
    pooled = run_experiment(exp, str(tmp_path / "pooled"), workers=2)
    for key in ("runs_csv", "summary_csv"):
        with open(serial[key], "rb") as fa, open(pooled[key], "rb") as fb:
            assert fa.read() == fb.read()


def test_full_grid_switch_adds_extra_cells_without_disturbing_base(tmp_path):
    base_cell = CellSpec(label="base", group="g",
                         run_config=_twomax_cell(8, 6, 1.0, 1, 10 ** 4))
    extra_cell = CellSpec(label="extra", group="g",
                          run_config=_twomax_cell(8, 4, 1.0, 1, 10 ** 4))
    exp = ExperimentConfig(name="split", cells=[base_cell],
                           runs_per_cell=3, full_extra_cells=[extra_cell])
    small = run_experiment(exp, str(tmp_path / "small"))
    full = run_experiment(exp, str(tmp_path / "full"), include_full=True)
    assert [s["cell"] for s in small["summaries"]] == ["base"]
    assert [s["cell"] for s in full["summaries"]] == ["base", "extra"]
    # the base cell's rows are identical in both modes
    small_rows = [r for r in _read_csv(small["runs_csv"]) if r["cell"] == "base"]
    full_rows = [r for r in _read_csv(full["runs_csv"]) if r["cell"] == "base"]
    assert small_rows == full_rows


def test_progress_callback_sees_every_run(tmp_path):
    exp = _tiny_experiment(runs=2)
    seen = []
    run_experiment(exp, str(tmp_path / "out"),
                   progress=lambda done, total: seen.append((done, total)))
    assert seen == [(i, 4) for i in range(1, 5)]


def test_success_rate_grows_with_population_size(tmp_path):
    # sigma=1, kappa=1: tiny populations cannot hold both peaks, large
    # ones do. Deterministic under the frozen seed.
    cells = [CellSpec(label=f"mu={mu}", group="grow",
                      run_config=_twomax_cell(12, mu, 1.0, 1, 2 * 10 ** 4))
             for mu in (2, 4, 8, 16)]
    exp = ExperimentConfig(name="mono", cells=cells, runs_per_cell=30)
    res = run_experiment(exp, str(tmp_path / "out"))
    rates = [s["success_rate"] for s in res["summaries"]]
    assert all(a <= b for a, b in zip(rates, rates[1:]))
    assert rates[0] <= 0.05
    assert rates[2] >= 0.95


def test_timed_out_runs_count_toward_generation_means(tmp_path):
    cap = 50
    cell = CellSpec(label="capped", group="g",
                    run_config=_twomax_cell(20, 4, 1.0, 1, cap))
    exp = ExperimentConfig(name="capped", cells=[cell], runs_per_cell=5)
    res = run_experiment(exp, str(tmp_path / "out"))
    s = res["summaries"][0]
    assert s["successes"] == 0
    assert s["mean_gens"] == cap
    assert s["median_gens"] == cap
