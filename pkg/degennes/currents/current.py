"""Algebraic current c(e) and the current extrema over an energy window.

At fiber level the current carried at energy e is mu_1' evaluated at the two
preimages of e, with the +infinity branch contributing 0. Window extrema
are the inf/sup of mu_1' over the preimage of [e - delta, e + delta].
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple
import logging

import numpy as np
from scipy.optimize import minimize_scalar

from degennes.bands.band_structure import BandSet, branch_derivative, inverse_branch
from degennes.errors import EnergyOutOfRange, WindowEmpty
from degennes.models.entities import (
    NONE_FOUND,
    BandMinimum,
    Branch,
    CurrentReport,
    CurrentScan,
    CurrentScanEntry,
)

logger = logging.getLogger(__name__)

DENSE_POINTS = 33


def algebraic_current(e: float, bands: BandSet) -> float:
    left = inverse_branch(bands, e, Branch.LEFT)
    right = inverse_branch(bands, e, Branch.RIGHT)
    return branch_derivative(bands, left) + branch_derivative(bands, right)


def current_sign_scan(
    e_grid: Sequence[float], bands: BandSet, max_workers: int = 1
) -> CurrentScan:
    """Tabulate c(e) and report the first sign change above Theta0.

    The candidate is the linear interpolate inside the first bracketing
    pair of grid points; NONE_FOUND when no bracket exists.
    """

    energies = sorted(float(e) for e in e_grid)
    for e in energies:
        if not bands.theta0 < e < bands.theta1:
            raise EnergyOutOfRange(f"scan energy {e:.12g} outside (Theta0, Theta1)")

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            currents = list(pool.map(lambda e: algebraic_current(e, bands), energies))
    else:
        currents = [algebraic_current(e, bands) for e in energies]

    entries = tuple(CurrentScanEntry(e=e, c_of_e=c) for e, c in zip(energies, currents))
    candidate = NONE_FOUND
    for prev, cur in zip(entries, entries[1:]):
        if prev.c_of_e < 0.0 <= cur.c_of_e or prev.c_of_e > 0.0 >= cur.c_of_e:
            t = prev.c_of_e / (prev.c_of_e - cur.c_of_e)
            candidate = prev.e + t * (cur.e - prev.e)
            break
    logger.info("current scan over %d energies, e_star candidate %s", len(entries), candidate)
    return CurrentScan(entries=entries, e_star_candidate=candidate)


def predicted_current_slope(minimum: BandMinimum) -> float:
    """Leading coefficient of c(Theta0 + eps) = k * eps + o(eps)."""

    return 5.0 * minimum.third_derivative / (6.0 * minimum.second_derivative)


def current_slope_fit(bands: BandSet, eps_max: float = 1e-2, n_points: int = 10) -> float:
    """Least-squares slope of c(e) against e - Theta0 over (0, eps_max]."""

    eps = np.linspace(eps_max / n_points, eps_max, n_points)
    currents = [algebraic_current(bands.theta0 + x, bands) for x in eps]
    return float(np.polyfit(eps, currents, 1)[0])


# ----------------------------- window extrema -----------------------------


@dataclass(frozen=True)
class SegmentExtrema:
    lo: float
    hi: float
    points: Tuple[Tuple[float, float], ...]

    @property
    def min_slope(self) -> float:
        return min(s for _, s in self.points)

    @property
    def max_slope(self) -> float:
        return max(s for _, s in self.points)


def preimage_segments(bands: BandSet, e_lo: float, e_hi: float) -> List[Tuple[float, float]]:
    """Monotone xi-segments on which mu_1 takes values in [e_lo, e_hi]."""

    if not e_lo < e_hi:
        raise WindowEmpty(f"empty energy window [{e_lo:.12g}, {e_hi:.12g}]")
    left_lo = inverse_branch(bands, e_hi, Branch.LEFT).as_float()
    left_hi = inverse_branch(bands, e_lo, Branch.LEFT).as_float()
    segments = [(left_lo, left_hi)]
    if e_lo < bands.band_limit:
        right_lo = inverse_branch(bands, e_lo, Branch.RIGHT).as_float()
        if e_hi < bands.band_limit:
            right_hi = inverse_branch(bands, e_hi, Branch.RIGHT).as_float()
        else:
            right_hi = max(bands.far_xi, right_lo + 1.0)
        segments.append((right_lo, right_hi))
    return segments


def _segment_extrema(bands: BandSet, lo: float, hi: float, n_dense: int) -> SegmentExtrema:
    grid = np.linspace(lo, hi, n_dense)
    slopes = np.array([bands.mu_prime(float(x)) for x in grid])
    points = list(zip(grid.tolist(), slopes.tolist()))

    for sign, idx in ((1.0, int(np.argmin(slopes))), (-1.0, int(np.argmax(slopes)))):
        a = grid[max(idx - 1, 0)]
        b = grid[min(idx + 1, grid.size - 1)]
        if b <= a:
            continue
        res = minimize_scalar(
            lambda x: sign * bands.mu_prime(float(x)),
            bounds=(a, b),
            method="bounded",
            options={"xatol": 1e-10},
        )
        points.append((float(res.x), sign * float(res.fun)))
    return SegmentExtrema(lo=lo, hi=hi, points=tuple(points))


def window_extrema(
    bands: BandSet, e_lo: float, e_hi: float, n_dense: int = DENSE_POINTS
) -> List[SegmentExtrema]:
    return [_segment_extrema(bands, lo, hi, n_dense) for lo, hi in preimage_segments(bands, e_lo, e_hi)]


def current_window(
    e: float, delta: float, bands: BandSet, n_dense: int = DENSE_POINTS
) -> CurrentReport:
    if not delta > 0:
        raise WindowEmpty(f"window half-width must be positive, got {delta}")
    if not (bands.theta0 < e - delta and e + delta < bands.theta1):
        raise EnergyOutOfRange(
            f"window [{e - delta:.12g}, {e + delta:.12g}] not inside (Theta0, Theta1)"
        )

    segments = window_extrema(bands, e - delta, e + delta, n_dense)
    lam_min = min(seg.min_slope for seg in segments)
    lam_max = max(seg.max_slope for seg in segments)
    margin = min(
        (x - bands.xi0) * slope for seg in segments for x, slope in seg.points
    )
    left = inverse_branch(bands, e, Branch.LEFT)
    right = inverse_branch(bands, e, Branch.RIGHT)
    left_derivative = branch_derivative(bands, left)
    right_derivative = branch_derivative(bands, right)

    report = CurrentReport(
        e=e,
        delta=delta,
        c_of_e=left_derivative + right_derivative,
        lambda_min_over_h=lam_min,
        lambda_max_over_h=lam_max,
        spectral_radius_over_h=max(abs(lam_min), abs(lam_max)),
        dominant_side=Branch.LEFT if abs(lam_min) >= abs(lam_max) else Branch.RIGHT,
        left_derivative=left_derivative,
        right_derivative=right_derivative,
        sign_structure_margin=float(margin),
    )
    logger.info(
        "current window e=%.8g delta=%.3g: [%.8g, %.8g] dominant %s",
        e, delta, lam_min, lam_max, report.dominant_side.value,
    )
    return report


def minimum_abs_slope(bands: BandSet, e_lo: float, e_hi: float, n_dense: int = DENSE_POINTS) -> float:
    """inf |mu_1'| over {xi : mu_1(xi) in [e_lo, e_hi]}."""

    best: Optional[float] = None
    for lo, hi in preimage_segments(bands, e_lo, e_hi):
        grid = np.linspace(lo, hi, n_dense)
        values = np.abs([bands.mu_prime(float(x)) for x in grid])
        idx = int(np.argmin(values))
        a = grid[max(idx - 1, 0)]
        b = grid[min(idx + 1, grid.size - 1)]
        candidate = float(values[idx])
        if b > a:
            res = minimize_scalar(
                lambda x: abs(bands.mu_prime(float(x))),
                bounds=(a, b),
                method="bounded",
                options={"xatol": 1e-10},
            )
            candidate = min(candidate, float(res.fun))
        best = candidate if best is None else min(best, candidate)
    return float(best) if best is not None else 0.0
