"""Performance measures over run traces.

A trace holds one row per generation: the change period it belongs to, the
generation counter within that period, the best-so-far objective and
violation, and the reference optimum of the period. Four measures are
computed from it:

* mof  mean absolute error between best-so-far and the reference optimum,
       over every generation of the whole run
* bebc mean error of the last generation of each period
* arr  normalised per-period recovery speed, averaged over periods
* sr   fraction of periods that end within an epsilon band of the optimum

Mean ranks aggregate one scalar per method across problem cells.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class GenRecord:
    t: int
    generation: int
    elapsed_s: float
    evals_cum: int
    best_f: float
    best_violation: float
    f_star: float
    error: float


@dataclass
class RunTrace:
    records: list[GenRecord] = field(default_factory=list)
    eval_count: int = 0
    nn_seconds: float = 0.0
    total_seconds: float = 0.0
    warnings: list[str] = field(default_factory=list)

    def times(self) -> list[int]:
        out: list[int] = []
        for r in self.records:
            if not out or r.t != out[-1]:
                out.append(r.t)
        return out

    def rows_for(self, t: int) -> list[GenRecord]:
        return [r for r in self.records if r.t == t]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "generation", "elapsed_s", "evals_cum",
                        "best_f", "best_violation", "f_star", "error"])
            for r in self.records:
                w.writerow([r.t, r.generation, f"{r.elapsed_s:.17g}", r.evals_cum,
                            f"{r.best_f:.17g}", f"{r.best_violation:.17g}",
                            f"{r.f_star:.17g}", f"{r.error:.17g}"])

    @classmethod
    def read_csv(cls, path) -> "RunTrace":
        trace = cls()
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            next(reader)
            for row in reader:
                trace.records.append(GenRecord(
                    int(row[0]), int(row[1]), float(row[2]), int(row[3]),
                    float(row[4]), float(row[5]), float(row[6]), float(row[7])))
        if trace.records:
            last = trace.records[-1]
            trace.eval_count = last.evals_cum
            trace.total_seconds = last.elapsed_s
        return trace


def _require_rows(trace: RunTrace) -> None:
    if not trace.records:
        raise ValueError("trace has no generation records")
    for r in trace.records:
        if not np.isfinite(r.f_star):
            raise ValueError(f"missing f_star for time {r.t}")


def mof(trace: RunTrace) -> float:
    """Mean of |f_star - best_f| over every generation of the run."""
    _require_rows(trace)
    return float(np.mean([r.error for r in trace.records]))


def bebc(trace: RunTrace) -> float:
    """Mean final-generation error per change period."""
    _require_rows(trace)
    finals = [rows[-1].error for rows in _grouped(trace)]
    return float(np.mean(finals))


def arr(trace: RunTrace) -> float:
    """Mean normalised recovery per period.

    Each period contributes sum_G |f_best(G) - f_best(1)| divided by
    Gmax * |f_star - f_best(1)|. A period already optimal at G=1 contributes
    1 by convention.
    """
    _require_rows(trace)
    terms = []
    for rows in _grouped(trace):
        first = rows[0].best_f
        f_star = rows[0].f_star
        denom_unit = abs(f_star - first)
        if denom_unit == 0.0:
            terms.append(1.0)
            continue
        num = sum(abs(r.best_f - first) for r in rows)
        terms.append(num / (len(rows) * denom_unit))
    return float(np.mean(terms))


def success_rate(trace: RunTrace, epsilon: float = 0.1,
                 epsilon_abs: float = 1e-4) -> float:
    """Fraction of periods ending within max(epsilon*|f_star|, epsilon_abs)."""
    _require_rows(trace)
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must be in (0, 1)")
    hits = 0
    groups = _grouped(trace)
    for rows in groups:
        last = rows[-1]
        if last.error <= max(epsilon * abs(last.f_star), epsilon_abs):
            hits += 1
    return hits / len(groups)


def _grouped(trace: RunTrace) -> list[list[GenRecord]]:
    """Rows grouped by consecutive period, preserving order."""
    groups: list[list[GenRecord]] = []
    for r in trace.records:
        if groups and groups[-1][0].t == r.t:
            groups[-1].append(r)
        else:
            groups.append([r])
    return groups


@dataclass(frozen=True)
class MetricReport:
    mof: float
    bebc: float
    arr: float
    sr: float
    final_errors: tuple[float, ...]

    def as_row(self) -> list[float]:
        return [self.mof, self.bebc, self.arr, self.sr]


def compute_report(trace: RunTrace, epsilon: float = 0.1,
                   epsilon_abs: float = 1e-4) -> MetricReport:
    finals = tuple(rows[-1].error for rows in _grouped(trace))
    return MetricReport(mof(trace), bebc(trace), arr(trace),
                        success_rate(trace, epsilon, epsilon_abs), finals)


def mean_ranks(results: dict[str, dict[str, float]]) -> tuple[dict[str, float], list[str]]:
    """Per-method mean rank across cells; lower metric values rank better.

    ``results`` maps method -> {cell -> value}. Cells missing any method are
    excluded; their names are returned as warnings. Ties share the average of
    the ranks they span.
    """
    methods = sorted(results)
    all_cells = sorted({c for vals in results.values() for c in vals})
    warnings = []
    sums = {m: 0.0 for m in methods}
    used = 0
    for cell in all_cells:
        if any(cell not in results[m] for m in methods):
            warnings.append(f"cell {cell} incomplete; excluded from ranking")
            continue
        values = np.array([results[m][cell] for m in methods])
        order = np.argsort(values, kind="stable")
        ranks = np.empty(len(methods))
        i = 0
        while i < len(methods):
            j = i
            while j + 1 < len(methods) and values[order[j + 1]] == values[order[i]]:
                j += 1
            avg = (i + j) / 2.0 + 1.0
            for pos in range(i, j + 1):
                ranks[order[pos]] = avg
            i = j + 1
        for m, r in zip(methods, ranks):
            sums[m] += r
        used += 1
    if used == 0:
        return {m: float("nan") for m in methods}, warnings
    return {m: sums[m] / used for m in methods}, warnings
