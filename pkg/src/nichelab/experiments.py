"""Declarative experiment harness.

An experiment is an explicit list of cells (one EA configuration each) run
`runs_per_cell` times. Every run is fully determined by (config, cell index,
run index): the RNG stream is cell_index * 2^20 + run_index on top of the
experiment's base seed, so results are reproducible regardless of worker
count or scheduling. Records are keyed by (cell, run) and sorted before
writing, which makes the CSV outputs byte-identical across re-runs.

Outputs: runs.csv (one row per run) and summary.csv (one row per cell with
success rate, 95% Wilson interval, and mean/median generations; timed-out
runs contribute the cap value to the generation statistics).
"""

from __future__ import annotations

import csv
import json
import math
import os
import statistics
from dataclasses import dataclass, field
from multiprocessing import get_context

from .clearing import derived_param
from .core import Bitstring, ValidationError
from .engine import EaConfig, run
from .landscapes import Landscape, complementary_peaks, twomax

STREAM_CELL_STRIDE = 1 << 20
_Z95 = 1.959963984540054

PARAM_COLUMNS = ("experiment", "cell", "group", "variant", "n", "mu", "sigma",
                 "kappa", "distance", "init", "d", "generation_cap")
RUN_COLUMNS = PARAM_COLUMNS + ("run", "seed", "stream", "status",
                               "budget_exceeded", "generations",
                               "first_hit_t0", "first_hit_t1")
SUMMARY_COLUMNS = PARAM_COLUMNS + ("runs", "successes", "success_rate",
                                   "ci_low", "ci_high", "mean_gens",
                                   "median_gens")


@dataclass(frozen=True)
class CellSpec:
    label: str
    group: str
    run_config: dict  # EaConfig JSON dict without seed/stream
    d: int | None = None

    def config(self, seed: int, stream: int,
               time_budget_s: float | None = None) -> EaConfig:
        doc = dict(self.run_config)
        doc["seed"] = seed
        doc["stream"] = stream
        if time_budget_s is not None:
            doc["time_budget_s"] = time_budget_s
        return EaConfig.from_json_dict(doc)


@dataclass
class ExperimentConfig:
    """Cells always run; full_extra_cells join only when the runner is asked
    for the full grid. Stream indices cover the combined list, so the base
    cells produce identical runs either way."""

    name: str
    cells: list
    runs_per_cell: int
    base_seed: int = 0
    time_budget_s: float | None = None
    full_extra_cells: list = field(default_factory=list)

    def all_cells(self) -> list:
        return list(self.cells) + list(self.full_extra_cells)

    def validate(self) -> None:
        if not self.name:
            raise ValidationError("experiment needs a name")
        if self.runs_per_cell < 1:
            raise ValidationError("runs_per_cell must be >= 1")
        if not self.cells:
            raise ValidationError("experiment has no cells")
        combined = self.all_cells()
        if len(combined) >= STREAM_CELL_STRIDE:
            raise ValidationError("too many cells for the stream layout")
        if self.runs_per_cell >= STREAM_CELL_STRIDE:
            raise ValidationError("too many runs per cell for the stream layout")
        labels = [c.label for c in combined]
        if len(set(labels)) != len(labels):
            raise ValidationError("cell labels must be unique")
        for c in combined:
            c.config(seed=self.base_seed, stream=0)  # validates

    def to_json_dict(self) -> dict:
        def cell_doc(c):
            return {"label": c.label, "group": c.group, "d": c.d,
                    "run_config": c.run_config}

        doc = {
            "name": self.name,
            "runs_per_cell": self.runs_per_cell,
            "base_seed": self.base_seed,
            "time_budget_s": self.time_budget_s,
            "cells": [cell_doc(c) for c in self.cells],
        }
        if self.full_extra_cells:
            doc["full_extra_cells"] = [cell_doc(c) for c in self.full_extra_cells]
        return doc

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ValidationError("experiment config must be a JSON object")

        def parse_cell(c):
            return CellSpec(label=c["label"], group=c.get("group", ""),
                            run_config=c["run_config"], d=c.get("d"))

        try:
            cfg = cls(name=doc["name"],
                      cells=[parse_cell(c) for c in doc["cells"]],
                      runs_per_cell=int(doc["runs_per_cell"]),
                      base_seed=int(doc.get("base_seed", 0)),
                      time_budget_s=doc.get("time_budget_s"),
                      full_extra_cells=[parse_cell(c) for c in
                                        doc.get("full_extra_cells", [])])
        except (KeyError, TypeError) as e:
            raise ValidationError(f"bad experiment config: {e}") from None
        cfg.validate()
        return cfg

    def save(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path: str) -> "ExperimentConfig":
        with open(path) as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as e:
                raise ValidationError(f"invalid JSON in {path}: {e}") from None
        return cls.from_json_dict(doc)


def wilson_interval(successes: int, runs: int) -> tuple[float, float]:
    if runs < 1:
        raise ValidationError("interval needs runs >= 1")
    z = _Z95
    p = successes / runs
    den = 1.0 + z * z / runs
    centre = (p + z * z / (2 * runs)) / den
    half = z * math.sqrt(p * (1 - p) / runs + z * z / (4 * runs * runs)) / den
    # clamp away rounding noise: the interval always contains p
    return min(p, max(0.0, centre - half)), max(p, min(1.0, centre + half))


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _cell_params(exp: ExperimentConfig, cell: CellSpec) -> dict:
    rc = cell.run_config
    land = rc["landscape"]
    clearing = rc.get("clearing")
    return {
        "experiment": exp.name,
        "cell": cell.label,
        "group": cell.group,
        "variant": land["variant"],
        "n": land["n"],
        "mu": rc["mu"],
        "sigma": float(clearing["sigma"]) if clearing else None,
        "kappa": clearing["kappa"] if clearing else None,
        "distance": clearing["distance"] if clearing else None,
        "init": rc.get("init", {"mode": "uniform"})["mode"],
        "d": cell.d,
        "generation_cap": rc.get("generation_cap"),
    }


def _run_one(exp: ExperimentConfig, cell_idx: int, run_idx: int) -> dict:
    cell = exp.all_cells()[cell_idx]
    stream = cell_idx * STREAM_CELL_STRIDE + run_idx
    cfg = cell.config(seed=exp.base_seed, stream=stream,
                      time_budget_s=exp.time_budget_s)
    out = run(cfg)
    row = _cell_params(exp, cell)
    hits = [out.first_hits[t.to01()] for t in cfg.targets]
    hits += [None] * (2 - len(hits))
    row.update({
        "run": run_idx,
        "seed": exp.base_seed,
        "stream": stream,
        "status": out.status,
        "budget_exceeded": int(out.budget_exceeded),
        "generations": out.generations,
        "first_hit_t0": hits[0],
        "first_hit_t1": hits[1],
    })
    return row


_POOL_EXP: ExperimentConfig | None = None


def _pool_init(doc: dict) -> None:
    global _POOL_EXP
    _POOL_EXP = ExperimentConfig.from_json_dict(doc)


def _pool_task(key: tuple) -> tuple:
    cell_idx, run_idx = key
    return cell_idx, run_idx, _run_one(_POOL_EXP, cell_idx, run_idx)


def run_experiment(exp: ExperimentConfig, out_dir: str, workers: int = 1,
                   progress=None, include_full: bool = False) -> dict:
    """Execute the experiment and write runs.csv + summary.csv in out_dir.

    include_full adds the config's full_extra_cells to the grid. progress,
    if given, is called with (done, total) after every run. Returns
    {"runs_csv": path, "summary_csv": path, "summaries": rows}.
    """
    exp.validate()
    os.makedirs(out_dir, exist_ok=True)
    active = exp.all_cells() if include_full else exp.cells
    keys = [(ci, ri) for ci in range(len(active))
            for ri in range(exp.runs_per_cell)]
    rows = {}
    done = 0
    if workers <= 1:
        for ci, ri in keys:
            rows[(ci, ri)] = _run_one(exp, ci, ri)
            done += 1
            if progress:
                progress(done, len(keys))
    else:
        ctx = get_context("fork")
        with ctx.Pool(workers, initializer=_pool_init,
                      initargs=(exp.to_json_dict(),)) as pool:
            for ci, ri, row in pool.imap_unordered(_pool_task, keys,
                                                   chunksize=1):
                rows[(ci, ri)] = row
                done += 1
                if progress:
                    progress(done, len(keys))

    runs_path = os.path.join(out_dir, "runs.csv")
    with open(runs_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RUN_COLUMNS)
        for key in sorted(rows):
            row = rows[key]
            w.writerow([_fmt(row[c]) for c in RUN_COLUMNS])

    summaries = []
    for ci, cell in enumerate(active):
        cell_rows = [rows[(ci, ri)] for ri in range(exp.runs_per_cell)]
        gens = [r["generations"] for r in cell_rows]
        successes = sum(1 for r in cell_rows if r["status"] == "Success")
        lo, hi = wilson_interval(successes, len(cell_rows))
        summary = _cell_params(exp, cell)
        summary.update({
            "runs": len(cell_rows),
            "successes": successes,
            "success_rate": successes / len(cell_rows),
            "ci_low": lo,
            "ci_high": hi,
            "mean_gens": float(statistics.fmean(gens)),
            "median_gens": float(statistics.median(gens)),
        })
        summaries.append(summary)

    summary_path = os.path.join(out_dir, "summary.csv")
    with open(summary_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SUMMARY_COLUMNS)
        for summary in summaries:
            w.writerow([_fmt(summary[c]) for c in SUMMARY_COLUMNS])

    return {"runs_csv": runs_path, "summary_csv": summary_path,
            "summaries": summaries}


# ---------------------------------------------------------------------------
# standard experiment grids


def _targets01(n: int) -> list:
    return [Bitstring.zeros(n).to01(), Bitstring.ones(n).to01()]


def _twomax_cell(n: int, mu: int, sigma: float, kappa: int, cap: int,
                 init_genotype: str | None = None) -> dict:
    rc = {
        "landscape": twomax(n).to_json_dict(),
        "mu": mu,
        "clearing": {"sigma": sigma, "kappa": kappa, "distance": "phenotypic"},
        "init": {"mode": "uniform"},
        "targets": _targets01(n),
        "generation_cap": cap,
        "trace_every": 0,
    }
    if init_genotype is not None:
        rc["init"] = {"mode": "copies", "genotype": init_genotype}
    return rc


def table1_config(n: int = 30, runs: int = 100, cap: int = 10 ** 6,
                  base_seed: int = 0, mus=None, sigma_labels=None,
                  kappa_labels=None) -> ExperimentConfig:
    """Success-rate grid: sigma in {1, 2, sqrt n, n/2} x kappa in
    {1, sqrt mu, mu/2, mu} x mu in powers of two up to 1024, phenotypic."""
    if mus is None:
        mus = [2 ** i for i in range(1, 11)]
    sigma_rules = [
        ("sigma=1", 1.0),
        ("sigma=2", 2.0),
        # the radius is a real threshold, so sqrt(n) is used exactly;
        # derived kappa values are counts and take the floor convention
        ("sigma=sqrt(n)", math.sqrt(n)),
        ("sigma=n/2", n / 2.0),
    ]
    kappa_rules = [
        ("kappa=1", lambda mu: 1),
        ("kappa=sqrt(mu)", lambda mu: derived_param(math.sqrt(mu))),
        ("kappa=mu/2", lambda mu: derived_param(mu / 2)),
        ("kappa=mu", lambda mu: mu),
    ]
    if sigma_labels is not None:
        sigma_rules = [r for r in sigma_rules if r[0] in sigma_labels]
    if kappa_labels is not None:
        kappa_rules = [r for r in kappa_rules if r[0] in kappa_labels]
    cells = []
    for s_label, sigma in sigma_rules:
        for k_label, k_of in kappa_rules:
            for mu in mus:
                cells.append(CellSpec(
                    label=f"{s_label} {k_label} mu={mu}",
                    group=s_label,
                    run_config=_twomax_cell(n, mu, sigma, k_of(mu), cap),
                ))
    return ExperimentConfig(name=f"table1-n{n}", cells=cells,
                            runs_per_cell=runs, base_seed=base_seed)


def fig4_config(n: int, runs: int = 100, cap: int = 10 ** 6,
                base_seed: int = 0, kappa: int = 1,
                mus=None) -> ExperimentConfig:
    """Runtime-vs-population curves: sigma=n/2, powers-of-two mu up to
    kappa n^2/4 plus that endpoint, uniform and biased (all copies of 0^n)
    initialisation."""
    mu_max = kappa * n * n // 4
    if mus is None:
        mus = []
        mu = 2
        while mu <= mu_max:
            mus.append(mu)
            mu *= 2
        if mus[-1] != mu_max:
            mus.append(mu_max)
    zeros = "0" * n
    cells = []
    for init_label, init_g in (("uniform", None), ("biased", zeros)):
        for mu in mus:
            cells.append(CellSpec(
                label=f"{init_label} mu={mu}",
                group=init_label,
                run_config=_twomax_cell(n, mu, n / 2.0, kappa, cap,
                                        init_genotype=init_g),
            ))
    return ExperimentConfig(name=f"fig4-n{n}", cells=cells,
                            runs_per_cell=runs, base_seed=base_seed)


FIG6_COARSE_DS = (1, 2, 5, 10, 25, 50, 75, 100)


def fig6_config(n: int = 100, sigma_rule: str = "MaxFeasible",
                runs: int = 100, cap: int = 10 ** 6, base_seed: int = 0,
                ds=None, mu: int = 32, kappa: int = 1) -> ExperimentConfig:
    """Two-peaks distance sweep: f2 with peaks 0^n and 0^{n-d}1^d (unit
    slopes), genotypic clearing, sigma = min(d, n/2) for MaxFeasible or d/2
    for MinFeasible, uniform and biased (all copies of 0^n) initialisation.

    For n > 50 the base grid is a coarse d sample; the remaining d values
    land in full_extra_cells (the runner's full-grid switch).
    """
    if sigma_rule not in ("MaxFeasible", "MinFeasible"):
        raise ValidationError("sigma_rule must be MaxFeasible or MinFeasible")
    if ds is not None:
        base_ds, extra_ds = list(ds), []
    elif n <= 50:
        base_ds, extra_ds = list(range(1, n + 1)), []
    else:
        base_ds = [d for d in FIG6_COARSE_DS if d <= n]
        extra_ds = [d for d in range(1, n + 1) if d not in base_ds]
    zeros = "0" * n

    def make_cells(dvals):
        out = []
        for init_label, init_g in (("uniform", None), ("biased", zeros)):
            for d in dvals:
                land = Landscape("f2", n, peaks=complementary_peaks(n, d))
                sigma = (min(float(d), n / 2.0) if sigma_rule == "MaxFeasible"
                         else d / 2.0)
                rc = {
                    "landscape": land.to_json_dict(),
                    "mu": mu,
                    "clearing": {"sigma": sigma, "kappa": kappa,
                                 "distance": "genotypic"},
                    "init": {"mode": "uniform"},
                    "targets": [p.position.to01() for p in land.peaks],
                    "generation_cap": cap,
                    "trace_every": 0,
                }
                if init_g is not None:
                    rc["init"] = {"mode": "copies", "genotype": init_g}
                out.append(CellSpec(
                    label=f"{sigma_rule} {init_label} d={d}",
                    group=f"{sigma_rule} {init_label}",
                    run_config=rc, d=d,
                ))
        return out

    return ExperimentConfig(name=f"fig6-{sigma_rule.lower()}-n{n}",
                            cells=make_cells(base_ds), runs_per_cell=runs,
                            base_seed=base_seed,
                            full_extra_cells=make_cells(extra_ds))
