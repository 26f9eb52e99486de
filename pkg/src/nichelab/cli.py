"""Command line interface.

Subcommands: run (single EA run with trace/snapshots), experiment
(make/run the standard grids), oracle (closed-form quantities as JSON),
snapshot (inspect a captured population with niche annotations).

Exit codes: 0 on success, 2 on configuration or input errors (a JSON error
object goes to stderr), nonzero on unexpected failures.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction

from . import engine, experiments, oracles
from .clearing import ClearingParams, DistanceMeasure, niche_report
from .core import Bitstring, Individual, Population, ValidationError
from .landscapes import basin_boundary


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as e:
        raise ValidationError(f"invalid JSON in {path}: {e}") from None
    except OSError as e:
        raise ValidationError(f"cannot read {path}: {e}") from None


def _write_json(doc, path: str | None) -> None:
    text = json.dumps(doc, indent=2)
    if path is None:
        print(text)
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


# ---------------------------------------------------------------------------
# run


def _snapshot_doc(config: engine.EaConfig, gen: int, population,
                  canonical: bool) -> dict:
    doc = engine.population_snapshot_dict(population, gen, canonical)
    doc["clearing"] = None
    if config.clearing is not None:
        doc["clearing"] = {
            "sigma": config.clearing.sigma,
            "kappa": config.clearing.kappa,
            "distance": config.distance.value,
        }
    return doc


def cmd_run(args) -> int:
    doc = _load_json(args.config)
    if args.seed is not None:
        doc["seed"] = args.seed
    elif "seed" not in doc:
        # no seed anywhere: draw one from entropy and report it so the run
        # stays replayable
        doc["seed"] = int.from_bytes(os.urandom(8), "little")
    if args.stream is not None:
        doc["stream"] = args.stream
    if args.trace_every is not None:
        doc["trace_every"] = args.trace_every
    if args.snapshot_every is not None:
        doc["snapshot_every"] = args.snapshot_every
    config = engine.EaConfig.from_json_dict(doc)
    outcome = engine.run(config)

    os.makedirs(args.out, exist_ok=True)
    result = outcome.to_json_dict()
    result["config"] = config.to_json_dict()
    if outcome.trace is not None:
        trace_path = os.path.join(args.out, "trace.csv")
        engine.write_trace_csv(trace_path, outcome.trace)
        result["trace_csv"] = trace_path
    if outcome.snapshots:
        snap_dir = os.path.join(args.out, "snapshots")
        os.makedirs(snap_dir, exist_ok=True)
        for gen, population in outcome.snapshots:
            path = os.path.join(snap_dir, f"gen_{gen}.json")
            _write_json(_snapshot_doc(config, gen, population,
                                      outcome.genotypes_canonical), path)
        result["snapshot_dir"] = snap_dir
    _write_json(result, os.path.join(args.out, "outcome.json"))
    print(json.dumps({"status": outcome.status,
                      "generations": outcome.generations,
                      "seed": config.seed,
                      "out": args.out}))
    return 0


# ---------------------------------------------------------------------------
# experiment


def cmd_experiment_make(args) -> int:
    if args.kind == "table1":
        cfg = experiments.table1_config(n=args.n or 30, runs=args.runs,
                                        cap=args.cap, base_seed=args.base_seed)
    elif args.kind == "fig4":
        if args.n is None:
            raise ValidationError("fig4 needs --n")
        cfg = experiments.fig4_config(n=args.n, runs=args.runs, cap=args.cap,
                                      base_seed=args.base_seed)
    else:
        cfg = experiments.fig6_config(n=args.n or 100,
                                      sigma_rule=args.sigma_rule,
                                      runs=args.runs, cap=args.cap,
                                      base_seed=args.base_seed)
    cfg.save(args.out)
    print(json.dumps({"config": args.out, "cells": len(cfg.cells),
                      "full_extra_cells": len(cfg.full_extra_cells)}))
    return 0


def cmd_experiment_run(args) -> int:
    exp = experiments.ExperimentConfig.from_json_dict(_load_json(args.config))
    if args.budget is not None:
        exp.time_budget_s = args.budget

    def progress(done, total):
        if done % max(1, total // 20) == 0 or done == total:
            print(f"{exp.name}: {done}/{total} runs", file=sys.stderr)

    result = experiments.run_experiment(exp, args.out, workers=args.workers,
                                        progress=progress if args.progress else None,
                                        include_full=args.full)
    print(json.dumps({"runs_csv": result["runs_csv"],
                      "summary_csv": result["summary_csv"],
                      "cells": len(result["summaries"])}))
    return 0


# ---------------------------------------------------------------------------
# oracle


def cmd_oracle(args) -> int:
    kind = args.kind
    if kind == "drift":
        value = oracles.drift_expectation(args.n, args.mu, args.kappa, args.phi)
        doc = {"kind": kind, "n": args.n, "mu": args.mu, "kappa": args.kappa,
               "phi": args.phi, "expected_change": value}
    elif kind == "moran":
        doc = {"kind": kind, "mu": args.mu, "x0": args.x0}
        if args.mu <= 64:
            exact = oracles.moran_expected_takeover(args.mu, args.x0)
            doc["expected_generations"] = float(exact)
            doc["exact_fraction"] = f"{exact.numerator}/{exact.denominator}"
        elif not args.trials:
            raise ValidationError("mu > 64 needs --trials for a Monte Carlo "
                                  "estimate (exact solver is capped)")
        if args.trials:
            mean, se = oracles.moran_simulate(args.mu, args.x0, args.trials,
                                              seed=args.seed, stream=args.stream)
            doc["mc_mean"] = mean
            doc["mc_se"] = se
            doc["trials"] = args.trials
    elif kind == "moran-bounds":
        lo, hi, coarse = oracles.moran_takeover_bounds(args.mu, args.x0)
        doc = {"kind": kind, "mu": args.mu, "x0": args.x0, "lower": lo,
               "upper": hi, "coarse_cap": coarse}
    elif kind == "min-mu":
        value = oracles.min_mu_for_distance(args.n, args.d, args.kappa)
        doc = {"kind": kind, "n": args.n, "d": args.d, "kappa": args.kappa,
               "min_mu": value}
    elif kind == "basin":
        value = basin_boundary(args.a1, args.a2, args.b1, args.b2, args.n)
        doc = {"kind": kind, "a1": args.a1, "a2": args.a2, "b1": args.b1,
               "b2": args.b2, "n": args.n, "boundary": value}
    else:  # fitness-level
        value = oracles.fitness_level_bound(args.mu, args.n)
        doc = {"kind": kind, "mu": args.mu, "n": args.n, "bound": value}
    print(json.dumps(doc))
    return 0


# ---------------------------------------------------------------------------
# snapshot


def _load_snapshots(run_dir: str) -> list:
    snap_dir = os.path.join(run_dir, "snapshots")
    if not os.path.isdir(snap_dir):
        raise ValidationError(f"no snapshots directory under {run_dir} "
                              "(run with --snapshot-every to capture them)")
    entries = []
    for name in os.listdir(snap_dir):
        if name.startswith("gen_") and name.endswith(".json"):
            try:
                gen = int(name[4:-5])
            except ValueError:
                continue
            entries.append((gen, os.path.join(snap_dir, name)))
    if not entries:
        raise ValidationError(f"no snapshot available in {snap_dir}")
    return sorted(entries)


def cmd_snapshot(args) -> int:
    entries = _load_snapshots(args.run_dir)
    final_gen = entries[-1][0]
    requested = args.generation if args.generation is not None else final_gen
    warning = None
    chosen = None
    for gen, path in entries:
        if gen <= requested:
            chosen = (gen, path)
    if chosen is None:
        raise ValidationError(f"no snapshot at or before generation "
                              f"{requested} (earliest is {entries[0][0]})")
    if requested > final_gen:
        warning = (f"requested generation {requested} is beyond the run end; "
                   f"returning the final snapshot (generation {final_gen})")
    doc = _load_json(chosen[1])
    out = {
        "requested_generation": requested,
        "generation": doc["generation"],
        "n": doc["n"],
        "genotypes_canonical": doc.get("genotypes_canonical", False),
        "members": doc["members"],
    }
    clearing = doc.get("clearing")
    if clearing is not None:
        members = [
            Individual(genotype=Bitstring.from_str(m["genotype"]),
                       raw_fitness=float(m["raw_fitness"]))
            for m in doc["members"]
        ]
        population = Population(members=members, generation=doc["generation"])
        params = ClearingParams(sigma=float(clearing["sigma"]),
                                kappa=int(clearing["kappa"]))
        measure = DistanceMeasure(clearing["distance"])
        report = niche_report(population, params, measure)
        out["niches"] = [{"winner": w, "dominated": dom} for w, dom in report]
    if warning:
        out["warning"] = warning
    _write_json(out, args.out)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="nichelab",
        description="Evolutionary niching laboratory: (mu+1) EA with "
                    "clearing on bitstring landscapes.")
    sub = p.add_subparsers(dest="command", required=True)

    pr = sub.add_parser("run", help="execute one EA run from a JSON config")
    pr.add_argument("config", help="run config JSON file")
    pr.add_argument("--out", default="run_out", help="output directory")
    pr.add_argument("--seed", type=int, default=None,
                    help="override the config seed")
    pr.add_argument("--stream", type=int, default=None,
                    help="override the config stream")
    pr.add_argument("--trace-every", type=int, default=None,
                    help="trace row interval (0 disables tracing)")
    pr.add_argument("--snapshot-every", type=int, default=None,
                    help="population snapshot interval (0 disables)")
    pr.set_defaults(func=cmd_run)

    pe = sub.add_parser("experiment", help="make or run experiment grids")
    esub = pe.add_subparsers(dest="subcommand", required=True)
    pm = esub.add_parser("make", help="write a standard experiment config")
    pm.add_argument("kind", choices=["table1", "fig4", "fig6"])
    pm.add_argument("--n", type=int, default=None, help="bitstring length")
    pm.add_argument("--runs", type=int, default=100, help="runs per cell")
    pm.add_argument("--cap", type=int, default=10 ** 6,
                    help="generation cap per run")
    pm.add_argument("--base-seed", type=int, default=0)
    pm.add_argument("--sigma-rule", choices=["MaxFeasible", "MinFeasible"],
                    default="MaxFeasible", help="fig6 niche radius rule")
    pm.add_argument("--out", required=True, help="config JSON path to write")
    pm.set_defaults(func=cmd_experiment_make)
    px = esub.add_parser("run", help="execute an experiment config")
    px.add_argument("config", help="experiment config JSON file")
    px.add_argument("--out", required=True, help="output directory")
    px.add_argument("--workers", type=int, default=1)
    px.add_argument("--full", action="store_true",
                    help="include the config's full_extra_cells")
    px.add_argument("--budget", type=float, default=None,
                    help="per-run wall clock budget in seconds")
    px.add_argument("--progress", action="store_true",
                    help="print progress to stderr")
    px.set_defaults(func=cmd_experiment_run)

    po = sub.add_parser("oracle", help="print closed-form quantities as JSON")
    osub = po.add_subparsers(dest="kind", required=True)
    od = osub.add_parser("drift", help="expected one-step potential change")
    od.add_argument("--n", type=int, required=True)
    od.add_argument("--mu", type=int, required=True)
    od.add_argument("--kappa", type=int, required=True)
    od.add_argument("--phi", type=float, required=True)
    om = osub.add_parser("moran", help="expected niche takeover time")
    om.add_argument("--mu", type=int, required=True)
    om.add_argument("--x0", type=int, required=True)
    om.add_argument("--trials", type=int, default=0,
                    help="add a Monte Carlo estimate")
    om.add_argument("--seed", type=int, default=0)
    om.add_argument("--stream", type=int, default=0)
    ob = osub.add_parser("moran-bounds", help="takeover time bounds")
    ob.add_argument("--mu", type=int, required=True)
    ob.add_argument("--x0", type=int, required=True)
    ou = osub.add_parser("min-mu", help="population size keeping drift "
                                        "positive up to a distance")
    ou.add_argument("--n", type=int, required=True)
    ou.add_argument("--d", type=float, required=True)
    ou.add_argument("--kappa", type=int, required=True)
    oa = osub.add_parser("basin", help="two-slope basin boundary")
    oa.add_argument("--a1", type=float, required=True)
    oa.add_argument("--a2", type=float, required=True)
    oa.add_argument("--b1", type=float, default=0.0)
    oa.add_argument("--b2", type=float, default=0.0)
    oa.add_argument("--n", type=int, required=True)
    of = osub.add_parser("fitness-level", help="mu e n ln n climb bound")
    of.add_argument("--mu", type=int, required=True)
    of.add_argument("--n", type=float, required=True)
    for op_ in (od, om, ob, ou, oa, of):
        op_.set_defaults(func=cmd_oracle)

    ps = sub.add_parser("snapshot", help="inspect a captured population")
    ps.add_argument("run_dir", help="output directory of a run")
    ps.add_argument("--generation", type=int, default=None,
                    help="generation to look up (default: final)")
    ps.add_argument("--out", default=None,
                    help="write JSON here instead of stdout")
    ps.set_defaults(func=cmd_snapshot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as e:
        print(json.dumps({"error": str(e)}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
