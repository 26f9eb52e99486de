"""File contracts of the experiment toolchain, and validators for them.

The upstream tool documents three CSV layouts (per-run table, per-cell
summary, generation trace) and a population snapshot JSON. The column
tuples below restate those contracts verbatim; nothing here imports the
tool itself. Validators never raise on bad content, they return a report
listing every violation with row/column context.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

SUMMARY_COLUMNS = (
    "experiment", "cell", "group", "variant", "n", "mu", "sigma", "kappa",
    "distance", "init", "d", "generation_cap", "runs", "successes",
    "success_rate", "ci_low", "ci_high", "mean_gens", "median_gens",
)

RUN_COLUMNS = (
    "experiment", "cell", "group", "variant", "n", "mu", "sigma", "kappa",
    "distance", "init", "d", "generation_cap", "run", "seed", "stream",
    "status", "budget_exceeded", "generations", "first_hit_t0", "first_hit_t1",
)

TRACE_COLUMNS = (
    "generation", "best_raw_fitness", "min_ones", "max_ones", "potential",
    "num_winners", "num_cleared",
)

SNAPSHOT_MEMBER_KEYS = frozenset(
    {"genotype", "ones", "raw_fitness", "cleared", "winner"})

_DISTANCES = ("genotypic", "phenotypic")
_STATUSES = ("Success", "Timeout")


@dataclass(frozen=True)
class Violation:
    message: str
    row: int | None = None  # 1-based data row; header is row 0
    column: str | None = None

    def to_dict(self) -> dict:
        return {"message": self.message, "row": self.row, "column": self.column}

    def __str__(self) -> str:
        where = []
        if self.row is not None:
            where.append(f"row {self.row}")
        if self.column is not None:
            where.append(f"column {self.column!r}")
        return f"{self.message} ({', '.join(where)})" if where else self.message


@dataclass
class ValidationReport:
    path: str
    kind: str  # summary | runs | trace | snapshot | unknown
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, message: str, row: int | None = None,
            column: str | None = None) -> None:
        self.violations.append(Violation(message, row, column))

    def to_dict(self) -> dict:
        return {
            "path": self.path,
            "kind": self.kind,
            "ok": self.ok,
            "violations": [v.to_dict() for v in self.violations],
        }


def _int(text: str) -> int | None:
    try:
        return int(text)
    except ValueError:
        return None


def _float(text: str) -> float | None:
    try:
        value = float(text)
    except ValueError:
        return None
    return value if value == value else None  # reject NaN


class _Row:
    """One CSV data row with typed accessors that record violations."""

    def __init__(self, report: ValidationReport, header: tuple[str, ...],
                 cells: list[str], index: int):
        self.report = report
        self.index = index
        self.values = dict(zip(header, cells))
        if len(cells) != len(header):
            report.add(f"expected {len(header)} fields, found {len(cells)}",
                       row=index)

    def raw(self, column: str) -> str:
        return self.values.get(column, "")

    def int(self, column: str, low: int | None = None,
            high: int | None = None) -> int | None:
        value = _int(self.raw(column))
        if value is None:
            self.report.add(f"not an integer: {self.raw(column)!r}",
                            row=self.index, column=column)
            return None
        if low is not None and value < low:
            self.report.add(f"value {value} below {low}", row=self.index,
                            column=column)
        if high is not None and value > high:
            self.report.add(f"value {value} above {high}", row=self.index,
                            column=column)
        return value

    def float(self, column: str, low: float | None = None,
              high: float | None = None) -> float | None:
        value = _float(self.raw(column))
        if value is None:
            self.report.add(f"not a number: {self.raw(column)!r}",
                            row=self.index, column=column)
            return None
        if low is not None and value < low:
            self.report.add(f"value {value} below {low}", row=self.index,
                            column=column)
        if high is not None and value > high:
            self.report.add(f"value {value} above {high}", row=self.index,
                            column=column)
        return value

    def optional_number(self, column: str, low: float | None = None) -> None:
        if self.raw(column) == "":
            return
        self.float(column, low=low)

    def choice(self, column: str, allowed: tuple[str, ...]) -> str:
        value = self.raw(column)
        if value not in allowed:
            self.report.add(
                f"expected one of {list(allowed)}, found {value!r}",
                row=self.index, column=column)
        return value


def _check_params(row: _Row) -> int | None:
    """Shared parameter columns of summary and runs tables; returns the cap."""
    row.int("n", low=1)
    row.int("mu", low=1)
    row.float("sigma", low=0.0)
    row.int("kappa", low=1)
    row.choice("distance", _DISTANCES)
    row.optional_number("d", low=0.0)
    return row.int("generation_cap", low=1)


def _check_summary_row(row: _Row) -> None:
    cap = _check_params(row)
    runs = row.int("runs", low=1)
    successes = row.int("successes", low=0)
    rate = row.float("success_rate", low=0.0, high=1.0)
    ci_low = row.float("ci_low", low=0.0, high=1.0)
    ci_high = row.float("ci_high", low=0.0, high=1.0)
    mean = row.float("mean_gens", low=0.0)
    median = row.float("median_gens", low=0.0)
    if runs is not None and successes is not None and successes > runs:
        row.report.add(f"successes {successes} exceeds runs {runs}",
                       row=row.index, column="successes")
    elif None not in (runs, successes, rate) and rate != successes / runs:
        row.report.add(
            f"success_rate {rate} is not successes/runs = {successes / runs}",
            row=row.index, column="success_rate")
    if None not in (ci_low, rate) and ci_low > rate:
        row.report.add(f"ci_low {ci_low} exceeds success_rate {rate}",
                       row=row.index, column="ci_low")
    if None not in (ci_high, rate) and ci_high < rate:
        row.report.add(f"ci_high {ci_high} below success_rate {rate}",
                       row=row.index, column="ci_high")
    if cap is not None:
        for column, value in (("mean_gens", mean), ("median_gens", median)):
            if value is not None and value > cap:
                row.report.add(f"value {value} exceeds generation cap {cap}",
                               row=row.index, column=column)


def _check_runs_row(row: _Row) -> None:
    cap = _check_params(row)
    row.int("run", low=0)
    row.int("seed", low=0)
    row.int("stream", low=0)
    status = row.choice("status", _STATUSES)
    budget = row.choice("budget_exceeded", ("0", "1"))
    gens = row.int("generations", low=0, high=cap)
    hits = []
    for column in ("first_hit_t0", "first_hit_t1"):
        if row.raw(column) == "":
            continue
        hits.append(row.int(column, low=0, high=gens))
    if status == "Success" and not hits:
        row.report.add("Success row with no first-hit generation",
                       row=row.index, column="first_hit_t0")
    if (status == "Timeout" and budget == "0" and None not in (gens, cap)
            and gens != cap):
        row.report.add(
            f"Timeout without budget flag must stop at the cap, "
            f"found generations {gens} with cap {cap}",
            row=row.index, column="generations")


def _check_trace(report: ValidationReport, rows: list[_Row]) -> None:
    previous = None
    for row in rows:
        gen = row.int("generation", low=0)
        row.float("best_raw_fitness")
        low = row.int("min_ones", low=0)
        high = row.int("max_ones", low=0)
        row.float("potential", low=0.0)
        row.int("num_winners", low=0)
        row.int("num_cleared", low=0)
        if None not in (low, high) and low > high:
            report.add(f"min_ones {low} exceeds max_ones {high}",
                       row=row.index, column="min_ones")
        if None not in (previous, gen) and gen <= previous:
            report.add(
                f"generation {gen} does not increase past {previous}",
                row=row.index, column="generation")
        previous = gen


_LAYOUTS = {
    "summary": SUMMARY_COLUMNS,
    "runs": RUN_COLUMNS,
    "trace": TRACE_COLUMNS,
}


def _classify(header: tuple[str, ...],
              report: ValidationReport) -> str:
    for kind, columns in _LAYOUTS.items():
        if header == columns:
            return kind
    # Closest layout by column overlap, so the report can name what is
    # missing rather than just rejecting the header wholesale.
    kind, columns = max(
        _LAYOUTS.items(),
        key=lambda item: len(set(header) & set(item[1])))
    if not set(header) & set(columns):
        report.add("unrecognized header, matches no documented layout")
        return "unknown"
    for name in columns:
        if name not in header:
            report.add("missing column", column=name)
    for name in header:
        if name not in columns:
            report.add("unexpected column", column=name)
    if tuple(name for name in header if name in set(columns)) != tuple(
            name for name in columns if name in set(header)):
        report.add("columns out of documented order")
    return kind


def validate_csv(path: str | Path) -> ValidationReport:
    """Check one CSV file against the documented layouts.

    The layout (summary, runs, or trace) is recognized from the header.
    Never raises on file content; I/O errors surface as a violation too.
    """
    report = ValidationReport(path=str(path), kind="unknown")
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            records = list(csv.reader(handle))
    except OSError as exc:
        report.add(f"unreadable: {exc}")
        return report
    if not records:
        report.add("empty file, expected a header row")
        return report
    header = tuple(records[0])
    report.kind = _classify(header, report)
    if report.violations:
        return report
    rows = [_Row(report, header, cells, index)
            for index, cells in enumerate(records[1:], start=1)]
    if report.kind == "summary":
        for row in rows:
            _check_summary_row(row)
    elif report.kind == "runs":
        for row in rows:
            _check_runs_row(row)
    elif report.kind == "trace":
        _check_trace(report, rows)
    return report


def validate_snapshot(path: str | Path) -> ValidationReport:
    """Check a population snapshot JSON against the documented schema."""
    report = ValidationReport(path=str(path), kind="snapshot")
    try:
        with open(path, encoding="utf-8") as handle:
            doc = json.load(handle)
    except OSError as exc:
        report.add(f"unreadable: {exc}")
        return report
    except json.JSONDecodeError as exc:
        report.add(f"not valid JSON: {exc}")
        return report
    if not isinstance(doc, dict):
        report.add("top level is not an object")
        return report
    n = doc.get("n")
    if not isinstance(n, int) or n < 1:
        report.add("missing or non-positive bitstring length", column="n")
        n = None
    generation = doc.get("generation")
    if not isinstance(generation, int) or generation < 0:
        report.add("missing or negative generation", column="generation")
    members = doc.get("members")
    if not isinstance(members, list) or not members:
        report.add("members missing or empty", column="members")
        return report
    for index, member in enumerate(members, start=1):
        if not isinstance(member, dict):
            report.add("member is not an object", row=index)
            continue
        missing = SNAPSHOT_MEMBER_KEYS - member.keys()
        for key in sorted(missing):
            report.add("missing member field", row=index, column=key)
        if missing:
            continue
        genotype = member["genotype"]
        ones = member["ones"]
        if (not isinstance(genotype, str)
                or set(genotype) - {"0", "1"}):
            report.add("genotype is not a bitstring", row=index,
                       column="genotype")
        elif n is not None and len(genotype) != n:
            report.add(f"genotype length {len(genotype)} differs from n {n}",
                       row=index, column="genotype")
        elif not isinstance(ones, int) or genotype.count("1") != ones:
            report.add(f"ones {ones!r} does not match the genotype",
                       row=index, column="ones")
        if not isinstance(member["raw_fitness"], (int, float)):
            report.add("raw_fitness is not a number", row=index,
                       column="raw_fitness")
        for key in ("cleared", "winner"):
            if not isinstance(member[key], bool):
                report.add("not a boolean", row=index, column=key)
        if member.get("cleared") is True and member.get("winner") is True:
            report.add("member is both a niche winner and cleared",
                       row=index, column="winner")
    return report


def validate_path(path: str | Path) -> ValidationReport:
    """Dispatch on suffix: .json as a snapshot, anything else as CSV."""
    if str(path).endswith(".json"):
        return validate_snapshot(path)
    return validate_csv(path)
