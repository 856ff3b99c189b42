"""Utilities for writing and reading degennes reports.

This module provides helpers to:
- Serialize any run result to JSON in field order
- Flatten a run result into CSV rows
- Read a JSON report back into its dataclass
- A unified `persist_report` function choosing the format
"""
from __future__ import annotations

from typing import Any, List, Optional, Sequence, Tuple, Type, TypeVar
import json
import logging
import os

import pandas as pd

from degennes.errors import ConfigInvalid
from degennes.models.entities import ReportMixin, Sentinel
from degennes.pipeline.pipeline import (
    AgmonRunResult,
    AuditRunResult,
    BandRunResult,
    ConjectureRunResult,
    CurrentRunResult,
    MourreRunResult,
)

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json")
CSV_FLOAT_FORMAT = "%.17g"

R = TypeVar("R", bound=ReportMixin)


def validate_output(path: str, fmt: str) -> None:
    """Reject an unknown format or an unwritable destination before any work."""

    if fmt not in FORMATS:
        raise ConfigInvalid(f"unknown format {fmt!r}; expected one of {', '.join(FORMATS)}")
    directory = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(directory):
        raise ConfigInvalid(f"output directory does not exist: {directory}")
    if os.path.isdir(path):
        raise ConfigInvalid(f"output path is a directory: {path}")


# ----------------------------- JSON storage -----------------------------


def report_to_json(result: ReportMixin) -> str:
    return json.dumps(result.to_dict(), indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def save_report_to_json(result: ReportMixin, file_path: str) -> None:
    with open(file_path, "w", encoding="utf-8", newline="\n") as f:
        f.write(report_to_json(result))


def load_report(file_path: str, cls: Type[R]) -> R:
    with open(file_path, "r", encoding="utf-8") as f:
        return cls.from_dict(json.load(f))


# ----------------------------- CSV storage -----------------------------


def _cell(value: Any) -> Any:
    """Floats and ints stay numeric for pandas; enums, sentinels and flags become text."""

    if isinstance(value, Sentinel):
        return value.value
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return value
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def _band_table(result: BandRunResult) -> Tuple[List[str], List[Sequence[Any]]]:
    header = ["band_index", "xi", "mu", "mu_prime", "est_error"]
    rows = [
        (s.band_index, s.xi, s.mu, s.mu_prime, s.est_error)
        for s in (*result.samples, *result.excited_samples)
    ]
    return header, rows


def _conjecture_table(result: ConjectureRunResult) -> Tuple[List[str], List[Sequence[Any]]]:
    header = ["grid_points", "target_tol", "converged", "xi_star", "third_derivative", "error_bar", "verdict"]
    rows = [
        (r.grid_points, r.target_tol, r.converged, r.xi_star, r.third_derivative, r.error_bar, result.verdict)
        for r in result.resolutions
    ]
    return header, rows


def _current_table(result: CurrentRunResult) -> Tuple[List[str], List[Sequence[Any]]]:
    if result.scan is not None:
        candidate = result.scan.e_star_candidate
        header = ["e", "c_of_e", "e_star_candidate"]
        return header, [(entry.e, entry.c_of_e, candidate) for entry in result.scan.entries]
    if result.window is None:
        raise ConfigInvalid("current result holds neither a scan nor a window")
    data = result.window.to_dict()
    return list(data), [[getattr(result.window, key) for key in data]]


def _agmon_table(result: AgmonRunResult) -> Tuple[List[str], List[Sequence[Any]]]:
    header = ["xi", "weighted_norm", "unweighted_norm"]
    return header, [(p.xi, p.weighted_norm, p.unweighted_norm) for p in result.report.per_xi]


def _mourre_table(result: MourreRunResult) -> Tuple[List[str], List[Sequence[Any]]]:
    header = ["name", "exponent", "value"]
    rows: List[Sequence[Any]] = [
        (name, str(value), float(value)) for name, value in result.exponents.exponents.items()
    ]
    rows.append(("final", str(result.exponents.final), result.final_exponent))
    return header, rows


def _audit_table(result: AuditRunResult) -> Tuple[List[str], List[Sequence[Any]]]:
    header = ["alpha", "h", "c0", "c1", "c2", "eps0", "C_final", "slope", "target", "passed"]
    rows = [
        (
            audit.alpha, row.h, row.c0, row.c1, row.c2, row.eps0, row.C_final,
            audit.slope, audit.target, audit.passed,
        )
        for audit in result.audits
        for row in audit.rows
    ]
    return header, rows


_TABLES = {
    BandRunResult: _band_table,
    ConjectureRunResult: _conjecture_table,
    CurrentRunResult: _current_table,
    AgmonRunResult: _agmon_table,
    MourreRunResult: _mourre_table,
    AuditRunResult: _audit_table,
}


def report_to_frame(result: ReportMixin) -> pd.DataFrame:
    try:
        tabulate = _TABLES[type(result)]
    except KeyError as exc:
        raise ConfigInvalid(f"no CSV layout for {type(result).__name__}") from exc
    header, rows = tabulate(result)  # type: ignore[operator]
    return pd.DataFrame([[_cell(v) for v in row] for row in rows], columns=header)


def _frame_to_csv(frame: pd.DataFrame, file_path: Optional[str] = None) -> Optional[str]:
    return frame.to_csv(
        file_path, index=False, float_format=CSV_FLOAT_FORMAT, na_rep="NaN", lineterminator="\n"
    )


def report_to_csv(result: ReportMixin) -> str:
    return _frame_to_csv(report_to_frame(result)) or ""


def save_report_to_csv(result: ReportMixin, file_path: str) -> None:
    _frame_to_csv(report_to_frame(result), file_path)


# ----------------------------- unified persistence -----------------------------


def persist_report(result: ReportMixin, file_path: str, fmt: str = "json") -> str:
    """Write `result` to `file_path` in the requested format and return the path."""

    validate_output(file_path, fmt)
    if fmt == "json":
        save_report_to_json(result, file_path)
    else:
        save_report_to_csv(result, file_path)
    logger.info("wrote %s report to %s", fmt, file_path)
    return file_path
