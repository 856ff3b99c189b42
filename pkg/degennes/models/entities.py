"""Core data models for fiber solves, band functions and reports.

Report types inherit `ReportMixin`, which turns a dataclass into a plain
dict in field order and rebuilds it from that dict, so that every JSON
report re-parses into an equal in-memory structure.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields, is_dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple, Union, get_args, get_origin, get_type_hints
import math

import numpy as np


class Branch(str, Enum):
    LEFT = "LEFT"
    RIGHT = "RIGHT"


class Sentinel(str, Enum):
    """Distinguished non-numeric values that appear in reports."""

    PLUS_INFINITY = "PLUS_INFINITY"
    NONE_FOUND = "NONE_FOUND"


PLUS_INFINITY = Sentinel.PLUS_INFINITY
NONE_FOUND = Sentinel.NONE_FOUND


class Verdict(str, Enum):
    SUPPORTED = "SUPPORTED"
    INCONCLUSIVE = "INCONCLUSIVE"
    CONTRADICTED = "CONTRADICTED"


# ----------------------------- dict round trip -----------------------------


_NON_FINITE = {"PLUS_INFINITY": math.inf, "MINUS_INFINITY": -math.inf, "NaN": math.nan}


def _encode_float(value: float) -> Any:
    if math.isnan(value):
        return "NaN"
    if math.isinf(value):
        return "PLUS_INFINITY" if value > 0 else "MINUS_INFINITY"
    return float(value)


def _encode(value: Any) -> Any:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, float):
        return _encode_float(value)
    if isinstance(value, Fraction):
        return str(value)
    if is_dataclass(value) and not isinstance(value, type):
        return {f.name: _encode(getattr(value, f.name)) for f in fields(value) if f.repr}
    if isinstance(value, np.ndarray):
        return [_encode(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, (list, tuple)):
        return [_encode(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _encode(v) for k, v in value.items()}
    return value


def _decode(tp: Any, value: Any) -> Any:
    if value is None:
        return None
    origin = get_origin(tp)
    args = get_args(tp)
    if origin is Union:
        if isinstance(value, str):
            for arg in args:
                if isinstance(arg, type) and issubclass(arg, Enum):
                    return arg(value)
        for arg in args:
            if arg is type(None):
                continue
            return _decode(arg, value)
    if origin in (tuple, Tuple):
        if len(args) == 2 and args[1] is Ellipsis:
            return tuple(_decode(args[0], v) for v in value)
        return tuple(_decode(a, v) for a, v in zip(args, value))
    if origin in (list, List):
        return [_decode(args[0], v) for v in value]
    if origin in (dict, Dict):
        return {k: _decode(args[1], v) for k, v in value.items()}
    if isinstance(tp, type):
        if issubclass(tp, Enum):
            return tp(value)
        if tp is Fraction:
            return Fraction(value)
        if is_dataclass(tp):
            return tp.from_dict(value)  # type: ignore[attr-defined]
        if tp is float:
            return _NON_FINITE[value] if isinstance(value, str) else float(value)
        if tp is int:
            return int(value)
    return value


class ReportMixin:
    def to_dict(self) -> Dict[str, Any]:
        return _encode(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]):  # type: ignore[no-untyped-def]
        hints = get_type_hints(cls)
        kwargs = {
            f.name: _decode(hints[f.name], data[f.name])
            for f in fields(cls)  # type: ignore[arg-type]
            if f.init and f.name in data
        }
        return cls(**kwargs)


# ----------------------------- fiber solves -----------------------------


@dataclass(frozen=True, eq=False)
class GridLevel:
    """One resolution of a fiber solve.

    values holds u at nodes x_i = i*step, i = 0..n, with values[n] = 0
    (the Dirichlet node at the truncation point).
    """

    step: float
    mu: float
    values: np.ndarray

    @property
    def nodes(self) -> np.ndarray:
        return self.step * np.arange(self.values.size)


@dataclass(frozen=True, eq=False)
class Eigenpair:
    band_index: int
    fiber: float
    mu: float
    eigenfunction: np.ndarray
    grid_step: float
    domain_length: float
    norm_error: float
    neumann_residual: float
    levels: Tuple[GridLevel, ...] = ()
    extrapolated: bool = True

    @property
    def grid(self) -> np.ndarray:
        return self.grid_step * np.arange(self.eigenfunction.size)


@dataclass(frozen=True)
class SolveDiagnostics(ReportMixin):
    estimated_eigenvalue_error: float
    truncation_indicator: float
    levels_used: int
    target_tol: float
    domain_length: float
    grid_points: int

    @property
    def accepted(self) -> bool:
        return (
            self.truncation_indicator < 1e-10
            and self.estimated_eigenvalue_error < self.target_tol
        )


@dataclass(frozen=True, eq=False)
class FiberSolution:
    pairs: Tuple[Eigenpair, ...]
    diagnostics: SolveDiagnostics

    def __iter__(self):  # type: ignore[no-untyped-def]
        # Allows `pairs, diagnostics = solve_fiber(...)`.
        return iter((list(self.pairs), self.diagnostics))


# ----------------------------- band structure -----------------------------


@dataclass(frozen=True)
class BandSample(ReportMixin):
    band_index: int
    xi: float
    mu: float
    mu_prime: float
    est_error: float


@dataclass(frozen=True)
class BandMinimum(ReportMixin):
    band_index: int
    xi_star: float
    theta: float
    second_derivative: float
    third_derivative: float
    error_bars: Tuple[float, float]
    mu_prime_at_min: float = 0.0


@dataclass(frozen=True)
class DerivativeEstimate(ReportMixin):
    """Derivatives of order 1..max_order at xi with their error bars."""

    xi: float
    values: Tuple[float, ...]
    error_bars: Tuple[float, ...]
    step: float

    def order(self, k: int) -> Tuple[float, float]:
        return self.values[k - 1], self.error_bars[k - 1]


@dataclass(frozen=True)
class InverseBranchResult(ReportMixin):
    value: Union[float, Sentinel]
    branch: Branch
    residual: float

    @property
    def is_infinite(self) -> bool:
        return self.value is PLUS_INFINITY

    def as_float(self) -> float:
        return math.inf if self.is_infinite else float(self.value)


@dataclass(frozen=True)
class PropertyCheck(ReportMixin):
    name: str
    passed: bool
    margin: float
    detail: str = ""


@dataclass(frozen=True)
class PropertyReport(ReportMixin):
    checks: Tuple[PropertyCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failed(self) -> List[str]:
        return [c.name for c in self.checks if not c.passed]

    def check(self, name: str) -> PropertyCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


# ----------------------------- currents -----------------------------


@dataclass(frozen=True)
class CurrentReport(ReportMixin):
    e: float
    delta: float
    c_of_e: float
    lambda_min_over_h: float
    lambda_max_over_h: float
    spectral_radius_over_h: float
    dominant_side: Branch
    left_derivative: float = 0.0
    right_derivative: float = 0.0
    sign_structure_margin: float = 0.0


@dataclass(frozen=True)
class CurrentScanEntry(ReportMixin):
    e: float
    c_of_e: float


@dataclass(frozen=True)
class CurrentScan(ReportMixin):
    entries: Tuple[CurrentScanEntry, ...]
    e_star_candidate: Union[float, Sentinel]


@dataclass(frozen=True)
class AgmonEntry(ReportMixin):
    xi: float
    weighted_norm: float
    unweighted_norm: float


@dataclass(frozen=True)
class AgmonReport(ReportMixin):
    e: float
    K: float
    per_xi: Tuple[AgmonEntry, ...]
    sup_weighted_norm: float
    x_eK: float
    C_e: float


# ----------------------------- conjecture -----------------------------


@dataclass(frozen=True)
class ResolutionEstimate(ReportMixin):
    grid_points: int
    xi_star: float
    third_derivative: float
    error_bar: float
    target_tol: float = 0.0
    converged: bool = True


@dataclass(frozen=True)
class ConjectureVerdict(ReportMixin):
    third_derivative: float
    error_bar: float
    verdict: Verdict
    resolutions: Tuple[ResolutionEstimate, ...] = field(default_factory=tuple)
