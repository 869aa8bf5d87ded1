"""Trace (CSV) and summary (JSON) files."""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from pathlib import Path
from typing import Iterable

import numpy as np

from ..diagnostics import CoherenceTrace, extract_decoherence_time
from .scenarios import ScenarioReport, SweepResult

TRACE_COLUMNS = ("t", "coh_q_raw", "coh_q_norm", "coh_k_raw", "coh_k_norm", "purity", "B")
BASIS_COLUMNS = {"position": ("coh_q_raw", "coh_q_norm"), "momentum": ("coh_k_raw", "coh_k_norm")}
NONE_TOKEN = "none"


def format_tau(tau: float | None) -> float | str:
    return NONE_TOKEN if tau is None else float(f"{tau:.6g}")


def _num(x: float) -> str:
    return repr(float(x))


def write_trace(path: Path, trace: CoherenceTrace, field_values: np.ndarray) -> None:
    norm = trace.coh_norm
    n = len(trace)
    cols = {"t": trace.times, "purity": trace.purity, "B": np.asarray(field_values, dtype=float)}
    for basis, (raw_col, norm_col) in BASIS_COLUMNS.items():
        nan = np.full(n, np.nan)
        cols[raw_col] = trace.coh_raw.get(basis, nan)
        cols[norm_col] = norm.get(basis, nan)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_COLUMNS)
        for i in range(n):
            w.writerow([_num(cols[c][i]) for c in TRACE_COLUMNS])


def read_trace(path: str | Path) -> tuple[CoherenceTrace, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != TRACE_COLUMNS:
        raise ValueError(f"{path}: unexpected trace header {rows[0] if rows else None}")
    data = np.array([[float(x) for x in r] for r in rows[1:]], dtype=float).reshape(-1, len(TRACE_COLUMNS))
    col = {c: data[:, i] for i, c in enumerate(TRACE_COLUMNS)}
    raw = {
        basis: col[raw_col]
        for basis, (raw_col, _) in BASIS_COLUMNS.items()
        if not np.all(np.isnan(col[raw_col]))
    }
    return CoherenceTrace(col["t"], raw, col["purity"]), col["B"]


def retrace_tau(trace: CoherenceTrace, basis: str) -> float | None:
    if len(trace) < 2 or basis not in trace.coh_raw:
        return None
    return extract_decoherence_time(trace, basis).tau_d


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if dataclasses.is_dataclass(x):
        return _jsonable(dataclasses.asdict(x))
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        return None if not math.isfinite(x) else float(x)
    if isinstance(x, np.integer):
        return int(x)
    return x


def summary_dict(report: ScenarioReport) -> dict:
    bases = report.config["diagnostics"]["bases"]
    return {
        "config": report.config,
        "tau_d": {b: format_tau(report.tau(b)) for b in bases},
        "estimates": {
            b: {"method": e.method, "note": e.note} for b, e in report.estimates.items()
        },
        "pointer_residuals": _jsonable(report.residuals),
        "effective_coefficients": _jsonable(report.coefficients),
        "macroscopic_norms": {
            str(B): {"norm_main": m, "norm_residual": r} for B, (m, r) in report.macroscopic.items()
        },
        "regime": report.regime,
        "recurrence_time": _jsonable(report.recurrence_time),
        "horizon": report.horizon,
        "n_snapshots": len(report.trace),
        "hygiene": _jsonable(report.hygiene),
        "wall_time_s": round(report.wall_time, 3),
        "seed": report.seed,
        "extras": _jsonable(report.extras),
    }


def emit_results(
    reports: ScenarioReport | dict[float | str, ScenarioReport] | Iterable[ScenarioReport],
    out_dir: str | Path,
    name: str = "run",
    sweep: SweepResult | None = None,
) -> list[Path]:
    """Write ``<name>[_B=...]_trace.csv`` and ``<name>_summary.json``; returns the paths."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    if isinstance(reports, ScenarioReport):
        labelled = [(name, reports)]
    elif isinstance(reports, dict):
        # numeric keys are field values; string keys are used as labels as given
        labelled = [
            (f"{name}_{key}" if isinstance(key, str) else f"{name}_B={key:g}", r)
            for key, r in sorted(reports.items(), key=lambda kv: (isinstance(kv[0], str), kv[0]))
        ]
    else:
        labelled = [(f"{name}_{i}", r) for i, r in enumerate(reports)]

    written = []
    runs = {}
    for label, r in labelled:
        path = out / f"{label}_trace.csv"
        try:
            write_trace(path, r.trace, r.field_values)
        except OSError as exc:
            raise OSError(f"cannot write trace {path}: {exc}") from exc
        written.append(path)
        runs[label] = {"trace_file": path.name, **summary_dict(r)}

    summary: dict = runs[labelled[0][0]] if len(labelled) == 1 and sweep is None else {"runs": runs}
    if sweep is not None:
        summary["classification"] = None if sweep.classification is None else sweep.classification.value
        summary["crossover_B"] = sweep.crossover
        summary["note"] = sweep.note
    path = out / f"{name}_summary.json"
    try:
        path.write_text(json.dumps(summary, indent=2, allow_nan=False))
    except OSError as exc:
        raise OSError(f"cannot write summary {path}: {exc}") from exc
    written.append(path)
    return written
