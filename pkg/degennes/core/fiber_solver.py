"""Neumann realization of the de Gennes operator D_x^2 + (xi - x)^2 on [0, L].

The half-line is truncated at L with a Dirichlet wall and discretized on the
vertex grid x_i = i*h, h = L/N. The Neumann condition at x = 0 uses a mirror
ghost node, which makes the matrix symmetric in the trapezoid inner product.
Each solve runs the same problem at several resolutions and combines every
grid functional (eigenvalue, Feynman-Hellmann moment, weighted norms) by
Richardson extrapolation.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Callable, List, Sequence, Tuple
import logging
import math

import numpy as np
from scipy.integrate import trapezoid
from scipy.linalg import eigh_tridiagonal

from degennes.config import DiscretizationConfig
from degennes.core.extrapolation import combine_levels
from degennes.errors import ConfigInvalid, NotConverged, TruncationDominated
from degennes.models.entities import Eigenpair, FiberSolution, GridLevel, SolveDiagnostics

logger = logging.getLogger(__name__)

TRUNCATION_THRESHOLD = 1e-10
TAIL_FRACTION = 0.1
MIN_WALL_DISTANCE = 12.0
DOMAIN_GROWTH = 1.25
MAX_DOMAIN_GROWTHS = 4
SIGN_FLOOR = 1e-12
MAX_EXPONENT = 700.0
SOLVE_CACHE_SIZE = 256


# ----------------------------- single level -----------------------------


def _fix_sign(u: np.ndarray) -> np.ndarray:
    if abs(u[0]) >= SIGN_FLOOR:
        return u if u[0] > 0 else -u
    peak = int(np.argmax(np.abs(u)))
    return u if u[peak] > 0 else -u


def _quadratic_form(values: np.ndarray, step: float, xi: float) -> float:
    """Discrete energy sum (u_{i+1}-u_i)^2/h + trapezoid((xi-x)^2 u^2)."""

    x = step * np.arange(values.size)
    kinetic = float(np.sum(np.diff(values) ** 2)) / step
    potential = float(trapezoid((xi - x) ** 2 * values**2, dx=step))
    return kinetic + potential


def _trapezoid(level: GridLevel, integrand: np.ndarray) -> float:
    return float(trapezoid(integrand, dx=level.step))


def _solve_level(xi: float, length: float, n: int, n_modes: int) -> List[GridLevel]:
    step = length / n
    x = step * np.arange(n)
    diagonal = 2.0 / step**2 + (xi - x) ** 2
    off_diagonal = np.full(n - 1, -1.0 / step**2)
    # symmetrized ghost-node row: the first node carries trapezoid weight 1/2
    off_diagonal[0] = -math.sqrt(2.0) / step**2

    _, vectors = eigh_tridiagonal(
        diagonal, off_diagonal, select="i", select_range=(0, n_modes - 1)
    )

    levels: List[GridLevel] = []
    for k in range(n_modes):
        u = vectors[:, k].copy()
        u[0] *= math.sqrt(2.0)
        u /= math.sqrt(step)
        values = np.append(_fix_sign(u), 0.0)
        # Rayleigh quotient avoids the bisection floor of the eigenvalue itself.
        norm = float(trapezoid(values**2, dx=step))
        mu = _quadratic_form(values, step, xi) / norm
        levels.append(GridLevel(step=step, mu=mu, values=values))
    return levels


def _level_sizes(grid_points: int, refinement_levels: int) -> List[int]:
    if refinement_levels == 1:
        # auxiliary coarse solve, only used for the error estimate
        return [grid_points // 2, grid_points]
    return [grid_points * 2**k for k in range(refinement_levels)]


def _tail_mass(level: GridLevel) -> float:
    x = level.nodes
    cut = x >= (1.0 - TAIL_FRACTION) * x[-1]
    return _trapezoid(level, np.where(cut, level.values**2, 0.0))


def _boundary_residual(values: np.ndarray, step: float, xi: float, mu: float) -> float:
    # ODE-corrected forward difference: u'(0) = (u1-u0)/h - (h/2) u''(0) + O(h^2)
    sup = float(np.max(np.abs(values)))
    if sup == 0.0:
        return 0.0
    slope = (values[1] - values[0]) / step - 0.5 * step * (xi**2 - mu) * values[0]
    return abs(float(slope)) / sup


# ----------------------------- solve -----------------------------


@lru_cache(maxsize=SOLVE_CACHE_SIZE)
def _solve_cached(xi: float, n_modes: int, config: DiscretizationConfig) -> FiberSolution:
    length = max(config.domain_length, max(xi, 0.0) + MIN_WALL_DISTANCE)
    n = config.grid_points
    extrapolated = config.refinement_levels > 1

    for growth in range(MAX_DOMAIN_GROWTHS + 1):
        per_size = [_solve_level(xi, length, m, n_modes) for m in _level_sizes(n, config.refinement_levels)]
        indicator = max(_tail_mass(level) for level in per_size[-1])
        if indicator < TRUNCATION_THRESHOLD:
            break
        if growth == MAX_DOMAIN_GROWTHS:
            raise TruncationDominated(
                f"xi={xi:.6g}: eigenfunction mass {indicator:.3g} in the last "
                f"{TAIL_FRACTION:.0%} of [0, {length:.4g}] after {growth} domain extensions"
            )
        logger.warning(
            "xi=%.6g: truncation indicator %.3g at L=%.4g, growing domain", xi, indicator, length
        )
        length *= DOMAIN_GROWTH
        n = int(math.ceil(n * DOMAIN_GROWTH))

    pairs: List[Eigenpair] = []
    worst_error = 0.0
    for k in range(n_modes):
        levels = tuple(size_levels[k] for size_levels in per_size)
        mu, error = combine_levels([lv.mu for lv in levels], extrapolated)
        worst_error = max(worst_error, error)
        finest = levels[-1]
        norm_error = abs(_trapezoid(finest, finest.values**2) - 1.0)
        pairs.append(
            Eigenpair(
                band_index=k + 1,
                fiber=xi,
                mu=mu,
                eigenfunction=finest.values,
                grid_step=finest.step,
                domain_length=length,
                norm_error=norm_error,
                neumann_residual=_boundary_residual(finest.values, finest.step, xi, mu),
                levels=levels,
                extrapolated=extrapolated,
            )
        )

    diagnostics = SolveDiagnostics(
        estimated_eigenvalue_error=worst_error,
        truncation_indicator=indicator,
        levels_used=len(per_size),
        target_tol=config.target_tol,
        domain_length=length,
        grid_points=n,
    )
    logger.debug(
        "solved xi=%.6g modes=%d L=%.4g N=%d error=%.3g",
        xi, n_modes, length, n, worst_error,
    )

    if worst_error >= config.target_tol:
        raise NotConverged(
            f"xi={xi:.6g}: estimated eigenvalue error {worst_error:.3g} "
            f"exceeds target_tol {config.target_tol:.3g} with {config.refinement_levels} levels"
        )
    mus = [p.mu for p in pairs]
    if any(b <= a for a, b in zip(mus, mus[1:])):
        raise NotConverged(f"xi={xi:.6g}: eigenvalues not strictly increasing: {mus}")

    return FiberSolution(pairs=tuple(pairs), diagnostics=diagnostics)


def solve_fiber(xi: float, n_modes: int, config: DiscretizationConfig) -> FiberSolution:
    """Lowest n_modes eigenpairs of the fiber operator at xi.

    Returned pairs are sorted, L2-normalized on [0, L] and signed so that
    u(0) >= 0. Raises NotConverged or TruncationDominated instead of
    returning a solve that is not accepted.
    """

    if n_modes < 1:
        raise ConfigInvalid(f"n_modes must be at least 1, got {n_modes}")
    config.validate()
    return _solve_cached(float(xi), int(n_modes), config)


def clear_solve_cache() -> None:
    _solve_cached.cache_clear()


# ----------------------------- grid functionals -----------------------------


def _levels_of(pair: Eigenpair) -> Sequence[GridLevel]:
    if pair.levels:
        return pair.levels
    return (GridLevel(step=pair.grid_step, mu=pair.mu, values=pair.eigenfunction),)


def level_functional(
    pair: Eigenpair, functional: Callable[[GridLevel, float], float]
) -> Tuple[float, float]:
    """Evaluate `functional(level, xi)` on every level and extrapolate."""

    values = [functional(level, pair.fiber) for level in _levels_of(pair)]
    return combine_levels(values, pair.extrapolated)


def mu_prime_fh(pair: Eigenpair) -> float:
    """Feynman-Hellmann derivative: trapezoid of 2(xi - x) u^2.

    On each level this is the exact derivative of the discrete eigenvalue.
    """

    value, _ = level_functional(
        pair, lambda lv, xi: _trapezoid(lv, 2.0 * (xi - lv.nodes) * lv.values**2)
    )
    return value


def mu_prime_boundary(pair: Eigenpair) -> float:
    """Cross-check derivative (xi^2 - mu) u(0)^2 from the boundary value."""

    value, _ = level_functional(pair, lambda lv, xi: (xi**2 - lv.mu) * lv.values[0] ** 2)
    return value


def rayleigh_quotient(pair: Eigenpair) -> float:
    value, _ = level_functional(
        pair,
        lambda lv, xi: _quadratic_form(lv.values, lv.step, xi) / _trapezoid(lv, lv.values**2),
    )
    return value


def neumann_residual(pair: Eigenpair) -> float:
    """One-sided derivative at x = 0 relative to the sup norm of u."""

    return _boundary_residual(pair.eigenfunction, pair.grid_step, pair.fiber, pair.mu)


def _weighted_level(level: GridLevel, decay_rate: float) -> float:
    x = level.nodes
    if decay_rate * x[-1] > MAX_EXPONENT:
        raise TruncationDominated(
            f"weight exp({decay_rate:g}x) overflows on [0, {x[-1]:.4g}]"
        )
    integrand = np.exp(decay_rate * x) * level.values**2
    total = _trapezoid(level, integrand)
    tail = _trapezoid(level, np.where(x >= (1.0 - TAIL_FRACTION) * x[-1], integrand, 0.0))
    if total <= 0.0 or tail / total >= TRUNCATION_THRESHOLD:
        raise TruncationDominated(
            f"weighted tail share {tail / total if total > 0 else math.inf:.3g} "
            f"at K={decay_rate:g} on [0, {x[-1]:.4g}]"
        )
    return total


def weighted_norm(pair: Eigenpair, decay_rate: float) -> float:
    """Integral of exp(K x) u(x)^2 over the solve grid; K = 0 gives the L2 norm."""

    if decay_rate < 0:
        raise ConfigInvalid(f"decay rate must be nonnegative, got {decay_rate}")
    value, _ = level_functional(pair, lambda lv, _xi: _weighted_level(lv, decay_rate))
    return value
