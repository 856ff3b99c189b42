"""Semiclassical energy windows above Theta0 and their Mourre constants.

The window sits at e = Theta0 + a h^alpha with half-width delta = b h^beta,
inside the larger J of half-width d = b h^alpha. The commutator of the
magnetic Laplacian with the conjugate operator reduces fiberwise to
2h * mu_1', so its lower bound on J is 2h * inf |mu_1'| over the preimage.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple
import logging
import math

from degennes.bands.band_structure import BandSet
from degennes.currents.current import minimum_abs_slope
from degennes.errors import ConstraintViolated, WindowEmpty
from degennes.models.entities import ReportMixin

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SemiclassicalWindow(ReportMixin):
    h: float
    alpha: float
    beta: float
    gamma: float
    a: float
    b: float
    V_inf: float
    theta0: float
    e: float
    delta: float
    d: float
    I: Tuple[float, float]
    J: Tuple[float, float]
    c_h: float


def build_window(
    h: float,
    alpha: float,
    beta: float,
    gamma: float,
    a: float,
    b: float,
    V_inf: float,
    theta0: float,
) -> SemiclassicalWindow:
    """Validate the window inequalities in a fixed order and derive the window."""

    checks = (
        ("h > 0", h > 0),
        ("0 ≤ alpha < 1", 0 <= alpha < 1),
        ("beta > 2·alpha", beta > 2 * alpha),
        ("0 < b < a", 0 < b < a),
        ("gamma ≥ beta", gamma >= beta),
        ("gamma > 1+2·alpha", gamma > 1 + 2 * alpha),
        ("a < 1−Θ₀", alpha != 0 or a < 1 - theta0),
        ("V_inf ≥ 0", V_inf >= 0),
    )
    for name, ok in checks:
        if not ok:
            raise ConstraintViolated(name)

    e = theta0 + a * h**alpha
    delta = b * h**beta
    d = b * h**alpha
    if not e < 1:
        raise ConstraintViolated("e < 1", f"e = {e:.12g}")
    if not delta < d:
        raise ConstraintViolated("delta < d", f"delta = {delta:.6g}, d = {d:.6g}")

    c_h = (delta + h**gamma * V_inf) / d
    return SemiclassicalWindow(
        h=h, alpha=alpha, beta=beta, gamma=gamma, a=a, b=b, V_inf=V_inf, theta0=theta0,
        e=e, delta=delta, d=d, I=(e - delta, e + delta), J=(e - d, e + d), c_h=c_h,
    )


@dataclass(frozen=True)
class MourreConstant(ReportMixin):
    raw_inf: float
    commutator_lower_bound: float
    c0_tilde: float
    h: float
    alpha: float


def mourre_constant_between(bands: BandSet, e_lo: float, e_hi: float) -> float:
    """inf |mu_1'| over {xi : mu_1(xi) in [e_lo, e_hi]} for e_lo > Theta0."""

    if not (bands.theta0 < e_lo < e_hi < bands.band_limit):
        raise WindowEmpty(
            f"[{e_lo:.12g}, {e_hi:.12g}] not inside (Theta0, {bands.band_limit:g})"
        )
    return minimum_abs_slope(bands, e_lo, e_hi)


def unperturbed_mourre_constant(window: SemiclassicalWindow, bands: BandSet) -> MourreConstant:
    """Raw infimum of |mu_1'| on J and the constant c0_tilde with 2h*inf = c0_tilde h^(1+alpha)."""

    raw_inf = mourre_constant_between(bands, window.J[0], window.J[1])
    bound = 2.0 * window.h * raw_inf
    c0_tilde = bound / window.h ** (1.0 + window.alpha)
    logger.debug("window h=%.3g: inf|mu'|=%.6g c0_tilde=%.6g", window.h, raw_inf, c0_tilde)
    return MourreConstant(
        raw_inf=raw_inf,
        commutator_lower_bound=bound,
        c0_tilde=c0_tilde,
        h=window.h,
        alpha=window.alpha,
    )


@dataclass(frozen=True)
class PerturbedMourreBound(ReportMixin):
    unperturbed: float
    decomposition_loss: float
    potential_loss: float
    net: float

    @property
    def positive(self) -> bool:
        return self.net > 0


def perturbed_mourre_bound(
    window: SemiclassicalWindow,
    c0_tilde: float,
    f_sup: float = 1.0,
    potential_commutator: float = 1.0,
) -> PerturbedMourreBound:
    """Lower bound of the commutator for the perturbed operator on range 1_I.

    The unperturbed bound loses the spectral-decomposition cross terms
    (8 sqrt(e + d + h^gamma V) |f| (1 + sqrt(c_h)) + c_h h^alpha) c_h h and the
    potential commutator C_V h^(gamma - alpha + 1).
    """

    w = window
    unperturbed = c0_tilde * w.h ** (1.0 + w.alpha)
    spread = math.sqrt(w.e + w.d + w.h**w.gamma * w.V_inf)
    decomposition = (8.0 * spread * f_sup * (1.0 + math.sqrt(w.c_h)) + w.c_h * w.h**w.alpha) * w.c_h * w.h
    potential = potential_commutator * w.h ** (w.gamma - w.alpha + 1.0)
    return PerturbedMourreBound(
        unperturbed=unperturbed,
        decomposition_loss=decomposition,
        potential_loss=potential,
        net=unperturbed - decomposition - potential,
    )
