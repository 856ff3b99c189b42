"""Exponentially weighted norms of low-energy ground states.

For e below the band limit, every fiber xi with mu_1(xi) < e carries a
ground state whose weighted norm with exp(K x) stays bounded uniformly in
xi. The scan evaluates those norms on the solve grid of each fiber.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Optional
import logging
import math

import numpy as np

from degennes.bands.band_structure import BandSet, inverse_branch
from degennes.config import DiscretizationConfig
from degennes.core.fiber_solver import solve_fiber, weighted_norm
from degennes.errors import ConfigInvalid, DeGennesError, EnergyOutOfRange
from degennes.models.entities import AgmonEntry, AgmonReport, Branch

logger = logging.getLogger(__name__)


def agmon_radius(c_e: float, decay_rate: float) -> float:
    """x_eK = sqrt(2 (C_e + K^2 + 1))."""

    return math.sqrt(2.0 * (c_e + decay_rate**2 + 1.0))


def _entry(xi: float, decay_rate: float, config: DiscretizationConfig) -> AgmonEntry:
    try:
        pair = solve_fiber(xi, 1, config).pairs[0]
        return AgmonEntry(
            xi=float(xi),
            weighted_norm=weighted_norm(pair, decay_rate),
            unweighted_norm=weighted_norm(pair, 0.0),
        )
    except DeGennesError as exc:
        raise exc.__class__(f"agmon scan at xi={xi:.6g}: {exc}") from exc


def agmon_report(
    e: float,
    K: float,
    n_xi: int,
    bands: BandSet,
    config: Optional[DiscretizationConfig] = None,
    max_workers: int = 1,
) -> AgmonReport:
    if not bands.theta0 < e < bands.band_limit:
        raise EnergyOutOfRange(f"e={e:.12g} outside (Theta0, {bands.band_limit:g})")
    if not K > 0:
        raise ConfigInvalid(f"decay rate K must be positive, got {K}")
    if n_xi < 2:
        raise ConfigInvalid(f"n_xi must be at least 2, got {n_xi}")
    config = config or bands.config
    if config is None:
        raise ConfigInvalid("agmon_report needs a discretization config")

    lo = inverse_branch(bands, e, Branch.LEFT).as_float()
    hi = inverse_branch(bands, e, Branch.RIGHT).as_float()
    fibers = np.linspace(lo, hi, n_xi)

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            entries = list(pool.map(lambda x: _entry(float(x), K, config), fibers))
    else:
        entries = [_entry(float(x), K, config) for x in fibers]
    entries.sort(key=lambda item: item.xi)

    c_e = max(abs(lo), abs(hi))
    sup_norm = max(item.weighted_norm for item in entries)
    logger.info("agmon scan e=%.6g K=%.3g over %d fibers: sup %.8g", e, K, n_xi, sup_norm)
    return AgmonReport(
        e=e,
        K=K,
        per_xi=tuple(entries),
        sup_weighted_norm=sup_norm,
        x_eK=agmon_radius(c_e, K),
        C_e=c_e,
    )
