"""Powers of h carried by the Mourre/LAP constants on the semiclassical window.

`scaling_exponents` is exact rational arithmetic. `scaling_audit` builds the
window and ledger for every h of a grid, fits log C_final against log h and
compares the fitted slope with the predicted final exponent.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union
import logging
import math

import numpy as np

from degennes.bands.band_structure import BandSet
from degennes.errors import ConfigInvalid, FitUnstable
from degennes.models.entities import ReportMixin
from degennes.mourre.ledger import MourreHypotheses, ledger, universal_integrals
from degennes.mourre.window import build_window, unperturbed_mourre_constant

logger = logging.getLogger(__name__)

# max |log C_final - fitted line|, natural-log units
FIT_RESIDUAL_THRESHOLD = 0.25
AUDIT_SLOPE_TOL = 0.05
AUDITED_CONSTANTS = ("c0", "eps1", "eps0", "c0_tilde", "K1", "K2", "K", "C_eps0")


def _as_fraction(alpha: Union[float, int, Fraction]) -> Fraction:
    if isinstance(alpha, float):
        # repr keeps 0.2 as 1/5 instead of its binary expansion
        return Fraction(repr(alpha))
    return Fraction(alpha)


@dataclass(frozen=True)
class ScalingExponents(ReportMixin):
    alpha: Fraction
    exponents: Dict[str, Fraction]
    candidates: Tuple[Fraction, Fraction, Fraction]
    final: Fraction


def scaling_exponents(alpha: Union[float, int, Fraction]) -> ScalingExponents:
    a = _as_fraction(alpha)
    if not 0 <= a < 1:
        raise ConfigInvalid(f"alpha must lie in [0, 1), got {alpha}")
    exponents = {
        "c0": 1 + a,
        "c1": 1 - a,
        "c2": 2 - a,
        "eps0": -1 + 4 * a,
        "eps1": -1 + 4 * a,
        "K1": Fraction(-1, 2) - a / 2,
        "K2": 1 - 2 * a,
        "K": -1 - a,
        "C_eps0": -2 + 3 * a,
    }
    candidates = (-2 + 3 * a, Fraction(-3, 2) + a, -1 - a)
    return ScalingExponents(alpha=a, exponents=exponents, candidates=candidates, final=min(candidates))


# ----------------------------- audit -----------------------------


@dataclass(frozen=True)
class AuditPrefactors(ReportMixin):
    """Prefactors of the order symbols c1 = p h^(1-alpha), c2 = p h^(2-alpha)."""

    c1: float = 1.0
    c2: float = 1.0
    a: float = 0.2
    b: float = 0.1
    M: float = 1.0
    V_inf: float = 1.0
    norm_C: float = 1.0
    norm_CA: float = 1.0
    norm_AC: float = 1.0


@dataclass(frozen=True)
class AuditRow(ReportMixin):
    h: float
    c0: float
    c1: float
    c2: float
    eps0: float
    C_final: float
    eps1: float = 0.0
    c0_tilde: float = 0.0
    K1: float = 0.0
    K2: float = 0.0
    K: float = 0.0
    C_eps0: float = 0.0


@dataclass(frozen=True)
class ScalingAudit(ReportMixin):
    alpha: float
    target: float
    slope: float
    intercept: float
    max_residual: float
    tolerance: float
    term_slopes: Dict[str, float]
    constant_slopes: Dict[str, float]
    predicted_exponents: Dict[str, float]
    rows: Tuple[AuditRow, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return abs(self.slope - self.target) <= self.tolerance

    @property
    def leading_term(self) -> str:
        return min(self.term_slopes, key=lambda name: self.term_slopes[name])


def default_h_grid(n: int = 13) -> List[float]:
    return np.logspace(-1.0, -4.0, n).tolist()


def fit_power_law(h: Sequence[float], values: Sequence[float], name: str) -> Tuple[float, float, float]:
    """Least-squares line through (log h, log value): slope, intercept, max residual."""

    data = np.asarray(values, dtype=float)
    if np.any(~np.isfinite(data)) or np.any(data <= 0):
        raise FitUnstable(f"log of {name} undefined: {data.tolist()}")
    log_h = np.log(np.asarray(h, dtype=float))
    log_v = np.log(data)
    slope, intercept = np.polyfit(log_h, log_v, 1)
    residual = float(np.max(np.abs(slope * log_h + intercept - log_v)))
    return float(slope), float(intercept), residual


def _loose_slope(h: Sequence[float], values: Sequence[float]) -> float:
    data = np.asarray(values, dtype=float)
    if np.any(~np.isfinite(data)) or np.any(data <= 0):
        return math.nan
    return float(np.polyfit(np.log(np.asarray(h, dtype=float)), np.log(data), 1)[0])


def bound_terms(row: AuditRow) -> Dict[str, float]:
    """The seven summands of C_final at one h; they add up to row.C_final."""

    integral_t, integral_log = universal_integrals()
    log_weight = math.sqrt(2.0) * integral_log * math.sqrt(row.K)
    root_c = math.sqrt(row.C_eps0)
    return {
        "C_eps0": row.C_eps0,
        "K1": integral_t * row.K1,
        "K2": integral_t * row.K2,
        "K1*sqrt(C_eps0)": integral_t * row.K1 * root_c,
        "K2*sqrt(C_eps0)": integral_t * row.K2 * root_c,
        "sqrt(K)*K1": log_weight * row.K1,
        "sqrt(K)*K2": log_weight * row.K2,
    }


def audit_row(
    h: float,
    alpha: float,
    bands: BandSet,
    prefactors: AuditPrefactors,
    beta: float,
    gamma: float,
) -> AuditRow:
    p = prefactors
    window = build_window(h, alpha, beta, gamma, p.a, p.b, p.V_inf, bands.theta0)
    c0 = unperturbed_mourre_constant(window, bands).commutator_lower_bound
    hyp = MourreHypotheses(
        c0=c0, c1=p.c1 * h ** (1.0 - alpha), c2=p.c2 * h ** (2.0 - alpha),
        I=window.I, J=window.J, M=p.M,
    )
    constants = ledger(hyp, p.norm_C, p.norm_CA, p.norm_AC, grid=(4, 2, 2))
    return AuditRow(
        h=h, c0=c0, c1=hyp.c1, c2=hyp.c2, eps0=constants.eps0, C_final=constants.C_final,
        eps1=constants.eps1, c0_tilde=constants.c0_tilde, K1=constants.K1,
        K2=constants.K2, K=constants.K, C_eps0=constants.C_eps0,
    )


def scaling_audit(
    alpha: float,
    h_grid: Sequence[float],
    bands: BandSet,
    prefactors: Optional[AuditPrefactors] = None,
    beta: Optional[float] = None,
    gamma: Optional[float] = None,
    residual_threshold: float = FIT_RESIDUAL_THRESHOLD,
    tolerance: float = AUDIT_SLOPE_TOL,
) -> ScalingAudit:
    """Fitted power of h of the LAP bound C_final, evaluated from the ledger at every h.

    Raises FitUnstable when log C_final strays from its fitted line by more
    than `residual_threshold`. Whether the slope matches the predicted final
    exponent is reported through `passed`, within `tolerance`.
    """

    p = prefactors or AuditPrefactors()
    hs = sorted((float(h) for h in h_grid), reverse=True)
    if len(hs) < 3 or any(h <= 0 for h in hs):
        raise ConfigInvalid("h_grid needs at least three positive values")
    if math.log10(hs[0] / hs[-1]) < 2.0 - 1e-12:
        raise ConfigInvalid("h_grid must span at least two decades")

    beta = 2.0 * alpha + 0.5 if beta is None else beta
    gamma = max(beta, 1.0 + 2.0 * alpha) + 0.5 if gamma is None else gamma
    exponents = scaling_exponents(alpha)

    rows = [audit_row(h, alpha, bands, p, beta, gamma) for h in hs]
    slope, intercept, residual = fit_power_law(hs, [row.C_final for row in rows], "C_final")
    if residual > residual_threshold:
        raise FitUnstable(
            f"alpha={alpha:g}: log C_final deviates {residual:.3g} from a power law "
            f"(threshold {residual_threshold:.3g})"
        )

    terms = [bound_terms(row) for row in rows]
    term_slopes = {name: _loose_slope(hs, [t[name] for t in terms]) for name in terms[0]}
    constant_slopes = {
        name: _loose_slope(hs, [getattr(row, name) for row in rows]) for name in AUDITED_CONSTANTS
    }
    audit = ScalingAudit(
        alpha=alpha,
        target=float(exponents.final),
        slope=slope,
        intercept=intercept,
        max_residual=residual,
        tolerance=tolerance,
        term_slopes=term_slopes,
        constant_slopes=constant_slopes,
        predicted_exponents={k: float(v) for k, v in exponents.exponents.items()},
        rows=tuple(rows),
    )
    if audit.passed:
        logger.info("scaling audit alpha=%g: slope %.4f (target %.4f)", alpha, slope, audit.target)
    else:
        logger.warning(
            "scaling audit alpha=%g: slope %.4f misses target %.4f by more than %g (leading term %s)",
            alpha, slope, audit.target, tolerance, audit.leading_term,
        )
    return audit
