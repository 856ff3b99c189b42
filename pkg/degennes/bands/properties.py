"""Pass/fail checks of the classical band-function properties.

Each check returns a PropertyCheck with a signed margin: positive means the
property holds with that much room, negative measures the violation.
Failures are report entries, never exceptions.
"""
from __future__ import annotations

from typing import Dict, List, Optional, Sequence
import logging

import numpy as np

from degennes.bands.band_structure import BandFunction, find_minimum
from degennes.config import DiscretizationConfig
from degennes.errors import DeGennesError
from degennes.models.entities import BandMinimum, PropertyCheck, PropertyReport

logger = logging.getLogger(__name__)

MONOTONE_GAP = 1e-3
IDENTITY_TOL = 1e-6
LIMIT_TOL = 1e-3
LIMIT_XI = 6.0


def _minima(
    bands: Sequence[BandFunction], config: Optional[DiscretizationConfig]
) -> Dict[int, object]:
    found: Dict[int, object] = {}
    for band in bands:
        try:
            found[band.band_index] = find_minimum(band, config)
        except DeGennesError as exc:
            logger.warning("band %d: %s", band.band_index, exc)
            found[band.band_index] = exc
    return found


def _check_unique_minimum(bands: Sequence[BandFunction], minima: Dict[int, object]) -> PropertyCheck:
    margin = np.inf
    notes: List[str] = []
    for band in bands:
        result = minima[band.band_index]
        if not isinstance(result, BandMinimum):
            return PropertyCheck("unique_minimum", False, -1.0, f"band {band.band_index}: {result}")
        signs = np.sign(band.mu_prime)
        changes = int(np.count_nonzero(np.diff(signs[signs != 0])))
        if changes != 1:
            margin = min(margin, -float(changes))
            notes.append(f"band {band.band_index}: {changes} sign changes of mu'")
            continue
        margin = min(margin, result.second_derivative)
        notes.append(f"band {band.band_index}: mu''={result.second_derivative:.6g}")
    return PropertyCheck("unique_minimum", bool(margin > 0), float(margin), "; ".join(notes))


def _check_monotone_sides(bands: Sequence[BandFunction], minima: Dict[int, object]) -> PropertyCheck:
    margin = np.inf
    for band in bands:
        result = minima[band.band_index]
        if not isinstance(result, BandMinimum):
            return PropertyCheck("monotone_sides", False, -1.0, f"band {band.band_index}: no minimum")
        offset = band.xi - result.xi_star
        away = np.abs(offset) > MONOTONE_GAP
        if np.any(away):
            signed = np.sign(offset[away]) * band.mu_prime[away]
            margin = min(margin, float(np.min(signed)))
    return PropertyCheck(
        "monotone_sides",
        bool(margin > 0),
        float(margin),
        "min of sign(xi - xi_star) * mu' over samples away from the minimum",
    )


def _check_minimum_identity(bands: Sequence[BandFunction], minima: Dict[int, object]) -> PropertyCheck:
    worst = 0.0
    for band in bands:
        result = minima[band.band_index]
        if not isinstance(result, BandMinimum):
            return PropertyCheck("minimum_identity", False, -1.0, f"band {band.band_index}: no minimum")
        worst = max(worst, abs(result.theta - result.xi_star**2))
    margin = IDENTITY_TOL - worst
    return PropertyCheck("minimum_identity", margin > 0, margin, f"max |theta - xi_star^2| = {worst:.3g}")


def _check_large_xi_limit(bands: Sequence[BandFunction]) -> PropertyCheck:
    worst = 0.0
    notes: List[str] = []
    for band in bands:
        if band.xi[-1] < LIMIT_XI:
            return PropertyCheck(
                "large_xi_limit", False, -1.0,
                f"band {band.band_index}: samples stop at xi={band.xi[-1]:.4g} < {LIMIT_XI}",
            )
        mu_far, _ = band.evaluate(LIMIT_XI)
        gap = abs(mu_far - (2 * band.band_index - 1))
        worst = max(worst, gap)
        notes.append(f"band {band.band_index}: |mu({LIMIT_XI:g}) - {2 * band.band_index - 1}| = {gap:.3g}")
    margin = LIMIT_TOL - worst
    return PropertyCheck("large_xi_limit", margin > 0, margin, "; ".join(notes))


def _check_spectral_bounds(bands: Sequence[BandFunction], minima: Dict[int, object]) -> PropertyCheck:
    margin = np.inf
    notes: List[str] = []
    for band in bands:
        result = minima[band.band_index]
        if not isinstance(result, BandMinimum):
            return PropertyCheck("spectral_bounds", False, -1.0, f"band {band.band_index}: no minimum")
        j = band.band_index
        lower = 0.0 if j == 1 else 2 * j - 3.0
        upper = 2 * j - 1.0
        margin = min(margin, result.theta - lower, upper - result.theta)
        notes.append(f"Theta_{j - 1}={result.theta:.8g} in ({lower:g}, {upper:g})")
    return PropertyCheck("spectral_bounds", bool(margin > 0), float(margin), "; ".join(notes))


def check_rappel(
    bands: Sequence[BandFunction],
    config: Optional[DiscretizationConfig] = None,
) -> PropertyReport:
    """Run the five band-property checks over `bands`."""

    ordered = sorted(bands, key=lambda b: b.band_index)
    minima = _minima(ordered, config)
    checks = (
        _check_unique_minimum(ordered, minima),
        _check_monotone_sides(ordered, minima),
        _check_minimum_identity(ordered, minima),
        _check_large_xi_limit(ordered),
        _check_spectral_bounds(ordered, minima),
    )
    report = PropertyReport(checks=checks)
    if report.passed:
        logger.info("all %d band property checks passed", len(checks))
    else:
        logger.warning("band property checks failed: %s", ", ".join(report.failed))
    return report
