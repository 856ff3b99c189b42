"""Static SVG plots of bands, currents and scaling fits.

File names hash the echoed configuration, the command parameters and the
plot kind, so the same run always writes the same bytes to the same path.
"""
from __future__ import annotations

from typing import Any, Dict, List, Optional
import hashlib
import json
import logging
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from degennes.models.entities import ReportMixin  # noqa: E402
from degennes.pipeline.pipeline import (  # noqa: E402
    AuditRunResult,
    BandRunResult,
    CurrentRunResult,
)

logger = logging.getLogger(__name__)

plt.rcParams["svg.hashsalt"] = "degennes"


def plot_name(
    command: str, result: ReportMixin, kind: str, params: Optional[Dict[str, Any]] = None
) -> str:
    """<command>_<digest>.svg; the digest covers the echoed config, the command parameters and the kind."""

    payload = json.dumps(
        {"config": getattr(result, "config", {}), "params": params or {}, "kind": kind},
        sort_keys=True,
        default=str,
    )
    digest = hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]
    return f"{command}_{digest}.svg"


def _save(fig, path: str) -> str:  # type: ignore[no-untyped-def]
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.info("wrote plot %s", path)
    return path


def plot_bands(result: BandRunResult, directory: str, params: Optional[Dict[str, Any]] = None) -> str:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label, samples in (("mu_1", result.samples), ("mu_2", result.excited_samples)):
        if samples:
            ax.plot([s.xi for s in samples], [s.mu for s in samples], label=label)
    if result.minimum is not None:
        ax.axhline(result.minimum.theta, color="grey", linestyle=":", linewidth=0.8)
        ax.plot([result.minimum.xi_star], [result.minimum.theta], "k.", label="minimum")
    ax.set_xlabel("xi")
    ax.set_ylabel("mu_j(xi)")
    ax.legend()
    return _save(fig, os.path.join(directory, plot_name("band", result, "bands", params)))


def plot_current(
    result: CurrentRunResult, directory: str, params: Optional[Dict[str, Any]] = None
) -> Optional[str]:
    if result.scan is None:
        return None
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot([p.e for p in result.scan.entries], [p.c_of_e for p in result.scan.entries])
    ax.axhline(0.0, color="grey", linewidth=0.8)
    ax.axvline(1.0, color="grey", linestyle=":", linewidth=0.8)
    ax.set_xlabel("e")
    ax.set_ylabel("c(e)")
    return _save(fig, os.path.join(directory, plot_name("current", result, "current", params)))


def plot_scaling(result: AuditRunResult, directory: str, params: Optional[Dict[str, Any]] = None) -> str:
    """C_final against h per alpha, with the fitted line and the predicted slope through h_min."""

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for audit in result.audits:
        h = np.array([row.h for row in audit.rows])
        bound = np.array([row.C_final for row in audit.rows])
        (points,) = ax.loglog(h, bound, "o", markersize=3, label=f"alpha={audit.alpha:g}")
        ax.loglog(h, np.exp(audit.intercept) * h**audit.slope, "-", color=points.get_color(), linewidth=0.8)
        ax.loglog(h, bound[-1] * (h / h[-1]) ** audit.target, "--", color=points.get_color(), linewidth=0.8)
    ax.set_xlabel("h")
    ax.set_ylabel("C_final")
    ax.legend()
    return _save(fig, os.path.join(directory, plot_name("audit", result, "scaling", params)))


def write_plots(
    command: str, result: ReportMixin, directory: str, params: Optional[Dict[str, Any]] = None
) -> List[str]:
    """Write every plot the command defines; other commands write none."""

    written: List[str] = []
    if isinstance(result, BandRunResult):
        written.append(plot_bands(result, directory, params))
    elif isinstance(result, CurrentRunResult):
        path = plot_current(result, directory, params)
        if path:
            written.append(path)
    elif isinstance(result, AuditRunResult):
        written.append(plot_scaling(result, directory, params))
    else:
        logger.debug("no plots defined for %s", command)
    return written
