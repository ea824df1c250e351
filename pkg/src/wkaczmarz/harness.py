"""Experiment runner: trials of each selection rule on one matrix, written as CSV.

Every random choice derives from ``ExperimentSpec.seed``: the generated matrix
uses the seed itself and trial ``t`` samples rows with ``seed + t``, so a
repeated run reproduces its files byte for byte. Wall-clock timing is the one
non-reproducible quantity and is only written when ``record_time`` is set.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from pathlib import Path
from statistics import median

from .analysis import jp_inf_estimate, smallest_singular
from .linsys import NormalizedSystem, gen_gaussian, gen_gaussian_shifted, gram, load_system, ones_start
from .sampling import SelectionRule, Uniform, Weighted, parse_rule
from .solver import ResidualStrategy, SolveConfig, TraceRecord, solve

TRACE_HEADER = ["iter", "chosen_row", "l2_error", "linf_residual", "sv_alignment"]
SUMMARY_HEADER = ["rule", "trials", "iters", "median_l2", "median_linf", "median_sv_align", "wall_ms"]
BOUNDS_HEADER = ["p", "sigma_min", "m", "rk_factor", "jp_floor", "jp_inf_estimate", "weighted_factor"]

MATRIX_KINDS = ("gaussian", "gaussian-shifted", "file")


@dataclass
class ExperimentSpec:
    matrix: str = "gaussian-shifted"
    m: int | None = None
    n: int = 200
    shift: float = 100.0
    path: str | None = None
    rhs: str | None = None
    rules: list = field(default_factory=lambda: [Uniform(), Weighted(1), Weighted(2), Weighted(20)])
    p_values: list = field(default_factory=list)
    iters: int = 2000
    trials: int = 20
    seed: int = 0
    trace_every: int = 10
    outputs: str = "out"
    track_sv: bool = False
    strategy: str = "gram"
    restarts: int = 4
    record_time: bool = False

    def __post_init__(self):
        if self.matrix not in MATRIX_KINDS:
            raise ValueError(f"matrix must be one of {MATRIX_KINDS}, got {self.matrix!r}")
        if self.matrix == "file" and not self.path:
            raise ValueError("--matrix file needs --path")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.iters < 0:
            raise ValueError("iters must be >= 0")
        if self.trace_every < 1:
            raise ValueError("trace-every must be >= 1")
        self.rules = [parse_rule(r) if isinstance(r, str) else r for r in self.rules]
        ResidualStrategy(self.strategy)

    def all_rules(self) -> list[SelectionRule]:
        rules = list(self.rules)
        for p in self.p_values:
            w = Weighted(p)
            if w not in rules:
                rules.append(w)
        return rules

    def build_system(self) -> NormalizedSystem:
        if self.matrix == "gaussian":
            return gen_gaussian(self.m if self.m is not None else self.n, self.n, self.seed)
        if self.matrix == "gaussian-shifted":
            return gen_gaussian_shifted(self.n, self.shift, self.seed)
        return load_system(self.path, self.rhs)


@dataclass(frozen=True)
class SummaryRow:
    rule: str
    trials: int
    iters: int
    median_l2: float | None
    median_linf: float
    median_sv_align: float | None
    wall_ms: float | None = None


@dataclass
class ExperimentResult:
    traces: dict  # rule label -> list of per-trial traces
    trace_files: dict  # rule label -> list of paths
    summary: list
    summary_file: Path


def _num(v) -> str:
    return "" if v is None else f"{v:.17g}"


def rule_slug(rule: SelectionRule) -> str:
    return rule.label.replace(":", "")


def write_trace(path, trace: list[TraceRecord]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for rec in trace:
            w.writerow([rec.k, "" if rec.chosen_row is None else rec.chosen_row,
                        _num(rec.l2_error), _num(rec.linf_residual), _num(rec.sv_alignment)])


def read_trace(path) -> list[dict]:
    """Parse a trace file back into dicts of ints/floats (``None`` for empty cells)."""
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        if rd.fieldnames != TRACE_HEADER:
            raise ValueError(f"{path}: unexpected header {rd.fieldnames}")
        out = []
        for row in rd:
            out.append({
                "iter": int(row["iter"]),
                "chosen_row": int(row["chosen_row"]) if row["chosen_row"] else None,
                **{k: float(row[k]) if row[k] else None
                   for k in ("l2_error", "linf_residual", "sv_alignment")},
            })
        return out


def _median(vals):
    vals = [v for v in vals if v is not None]
    return median(vals) if vals else None


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Run ``spec.trials`` trials of every rule and write traces plus ``summary.csv``."""
    system = spec.build_system()
    out = Path(spec.outputs)
    out.mkdir(parents=True, exist_ok=True)
    v_min = smallest_singular(system).v_min if spec.track_sv else None
    strategy = ResidualStrategy(spec.strategy)
    Q = gram(system) if strategy is ResidualStrategy.GRAM else None
    x0 = ones_start(system)

    traces, files, summary = {}, {}, []
    for rule in spec.all_rules():
        config = SolveConfig(rule=rule, max_iters=spec.iters, trace_every=spec.trace_every,
                             residual_strategy=strategy)
        traces[rule.label], files[rule.label] = [], []
        t0 = time.perf_counter()
        for t in range(spec.trials):
            trace = solve(system, x0, config, rng_seed=spec.seed + t, v_min=v_min, Q=Q)
            path = out / f"trace_{rule_slug(rule)}_t{t:03d}.csv"
            write_trace(path, trace)
            traces[rule.label].append(trace)
            files[rule.label].append(path)
        wall = (time.perf_counter() - t0) * 1e3 if spec.record_time else None
        finals = [tr[-1] for tr in traces[rule.label]]
        summary.append(SummaryRow(
            rule=rule.label,
            trials=spec.trials,
            iters=spec.iters,
            median_l2=_median(f.l2_error for f in finals),
            median_linf=_median(f.linf_residual for f in finals),
            median_sv_align=_median(f.sv_alignment for f in finals),
            wall_ms=wall,
        ))

    summary_file = out / "summary.csv"
    with open(summary_file, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_HEADER)
        for row in summary:
            w.writerow([row.rule, row.trials, row.iters, _num(row.median_l2), _num(row.median_linf),
                        _num(row.median_sv_align), "" if row.wall_ms is None else f"{row.wall_ms:.3f}"])
    return ExperimentResult(traces, files, summary, summary_file)


def report_bounds(spec: ExperimentSpec, p_values=None) -> tuple[list[dict], Path]:
    """Write ``bounds.csv`` with the rate bracket for each ``p``.

    ``p_values`` defaults to ``spec.p_values``, then to the exponents of the
    weighted rules in ``spec.rules``, then to ``(1, 2, 20)``.
    """
    system = spec.build_system()
    if p_values is None:
        p_values = list(spec.p_values) or [r.p for r in spec.rules if isinstance(r, Weighted)] or [1.0, 2.0, 20.0]
    spectral = smallest_singular(system)
    rows = []
    for p in p_values:
        rep = jp_inf_estimate(system, float(p), restarts=spec.restarts, seed=spec.seed, spectral=spectral)
        rows.append({
            "p": float(p),
            "sigma_min": spectral.sigma_min,
            "m": system.m,
            "rk_factor": rep.rk_factor,
            "jp_floor": rep.jp_floor,
            "jp_inf_estimate": rep.jp_inf_estimate,
            "weighted_factor": rep.weighted_factor_estimate,
        })
    out = Path(spec.outputs)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "bounds.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BOUNDS_HEADER)
        for row in rows:
            w.writerow([_num(row["p"]), _num(row["sigma_min"]), row["m"], *(_num(row[k]) for k in BOUNDS_HEADER[3:])])
    return rows, path


__all__ = [
    "ExperimentSpec", "SummaryRow", "ExperimentResult", "run_experiment", "report_bounds",
    "write_trace", "read_trace", "TRACE_HEADER", "SUMMARY_HEADER", "BOUNDS_HEADER",
]
