"""Band functions xi -> mu_j(xi) of the fiber operator.

A BandFunction holds sorted samples (xi, mu, mu') with mu' from the
Feynman-Hellmann formula and a cubic Hermite interpolant through them.
Operations that need solver accuracy (the minimum, derivatives, inverse
branches) evaluate the attached BandSource instead of the interpolant;
bands built from injected samples have no source and use the interpolant.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Protocol, Sequence, Tuple
import logging

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from degennes.config import DiscretizationConfig
from degennes.core.extrapolation import richardson
from degennes.core.fiber_solver import mu_prime_fh, solve_fiber
from degennes.errors import (
    ConfigInvalid,
    DeGennesError,
    EnergyOutOfRange,
    NoBracket,
    StepUnderflow,
)
from degennes.models.entities import (
    PLUS_INFINITY,
    BandMinimum,
    BandSample,
    Branch,
    DerivativeEstimate,
    InverseBranchResult,
)

logger = logging.getLogger(__name__)

ROOT_XTOL = 1e-13
DEFAULT_DERIVATIVE_STEP = 1e-2
THETA0_SNAP = 1e-14
MAX_BRACKET_EXPANSIONS = 60


class BandSource(Protocol):
    """Fresh evaluation of one band at arbitrary xi."""

    def evaluate(self, xi: float) -> Tuple[float, float]:
        """Return (mu_j(xi), mu_j'(xi))."""
        ...


@dataclass(frozen=True)
class FiberBandSource:
    band_index: int
    config: DiscretizationConfig

    def sample(self, xi: float) -> BandSample:
        solution = solve_fiber(xi, self.band_index, self.config)
        pair = solution.pairs[self.band_index - 1]
        return BandSample(
            band_index=self.band_index,
            xi=float(xi),
            mu=pair.mu,
            mu_prime=mu_prime_fh(pair),
            est_error=solution.diagnostics.estimated_eigenvalue_error,
        )

    def evaluate(self, xi: float) -> Tuple[float, float]:
        s = self.sample(xi)
        return s.mu, s.mu_prime


@dataclass(frozen=True, eq=False)
class BandFunction:
    band_index: int
    xi: np.ndarray
    mu: np.ndarray
    mu_prime: np.ndarray
    est_error: np.ndarray
    config_used: Optional[DiscretizationConfig] = None
    source: Optional[BandSource] = field(default=None, repr=False)
    interpolant: CubicHermiteSpline = field(init=False, repr=False)

    def __post_init__(self) -> None:
        xi = np.asarray(self.xi, dtype=float)
        if xi.size < 2 or np.any(np.diff(xi) <= 0):
            raise ConfigInvalid(f"band {self.band_index}: sample xi must be strictly increasing")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "mu", np.asarray(self.mu, dtype=float))
        object.__setattr__(self, "mu_prime", np.asarray(self.mu_prime, dtype=float))
        object.__setattr__(self, "est_error", np.asarray(self.est_error, dtype=float))
        object.__setattr__(self, "interpolant", CubicHermiteSpline(xi, self.mu, self.mu_prime))

    @classmethod
    def from_samples(
        cls,
        band_index: int,
        xi: Sequence[float],
        mu: Sequence[float],
        mu_prime: Sequence[float],
        est_error: Optional[Sequence[float]] = None,
        config_used: Optional[DiscretizationConfig] = None,
    ) -> "BandFunction":
        errors = np.zeros(len(xi)) if est_error is None else est_error
        return cls(band_index, np.asarray(xi), np.asarray(mu), np.asarray(mu_prime), np.asarray(errors), config_used)

    def __call__(self, xi: float) -> float:
        return float(self.interpolant(xi))

    def slope(self, xi: float) -> float:
        return float(self.interpolant(xi, 1))

    def evaluate(self, xi: float) -> Tuple[float, float]:
        if self.source is not None:
            return self.source.evaluate(xi)
        return self(xi), self.slope(xi)

    @property
    def samples(self) -> List[BandSample]:
        return [
            BandSample(self.band_index, float(x), float(m), float(mp), float(err))
            for x, m, mp, err in zip(self.xi, self.mu, self.mu_prime, self.est_error)
        ]

    @property
    def tolerance(self) -> float:
        return self.config_used.target_tol if self.config_used is not None else 0.0


# ----------------------------- sampling -----------------------------


def sample_band(
    j: int,
    xi_lo: float,
    xi_hi: float,
    n_samples: int,
    config: DiscretizationConfig,
    max_workers: int = 1,
) -> BandFunction:
    if j < 1:
        raise ConfigInvalid(f"band index must be at least 1, got {j}")
    if not xi_lo < xi_hi:
        raise ConfigInvalid(f"need xi_lo < xi_hi, got [{xi_lo}, {xi_hi}]")
    if n_samples < 8:
        raise ConfigInvalid(f"n_samples must be at least 8, got {n_samples}")

    source = FiberBandSource(j, config.validate())

    def work(x: float) -> BandSample:
        try:
            return source.sample(float(x))
        except DeGennesError as exc:
            raise exc.__class__(f"band {j} at xi={x:.6g}: {exc}") from exc

    nodes = np.linspace(xi_lo, xi_hi, n_samples)
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            samples = list(pool.map(work, nodes))
    else:
        samples = [work(x) for x in nodes]
    samples.sort(key=lambda s: s.xi)
    logger.info("sampled band %d on [%g, %g] with %d nodes", j, xi_lo, xi_hi, n_samples)

    return BandFunction(
        band_index=j,
        xi=np.array([s.xi for s in samples]),
        mu=np.array([s.mu for s in samples]),
        mu_prime=np.array([s.mu_prime for s in samples]),
        est_error=np.array([s.est_error for s in samples]),
        config_used=config,
        source=source,
    )


# ----------------------------- derivatives and minimum -----------------------------


def derivatives_at(
    band: BandFunction,
    xi: float,
    max_order: int = 3,
    config: Optional[DiscretizationConfig] = None,
    step: float = DEFAULT_DERIVATIVE_STEP,
) -> DerivativeEstimate:
    """mu' from Feynman-Hellmann, mu'' and mu''' from central differences of mu'.

    Differences use steps {2s, s, s/2} and are Richardson-extrapolated. The
    error bar is twice the last extrapolation correction plus the solver
    tolerance propagated through the difference quotient.
    """

    if max_order not in (1, 2, 3):
        raise ConfigInvalid(f"max_order must be 1, 2 or 3, got {max_order}")
    if not band.xi[0] <= xi <= band.xi[-1]:
        raise ConfigInvalid(f"xi={xi} outside the sampled range [{band.xi[0]}, {band.xi[-1]}]")
    tol = config.target_tol if config is not None else band.tolerance
    if step < 100.0 * tol:
        raise StepUnderflow(f"step {step:g} is below 100 x tolerance {tol:g}")

    _, slope0 = band.evaluate(xi)
    values = [slope0]
    bars = [tol]
    if max_order >= 2:
        steps = [2.0 * step, step, 0.5 * step]
        second: List[float] = []
        third: List[float] = []
        for s in steps:
            _, plus = band.evaluate(xi + s)
            _, minus = band.evaluate(xi - s)
            second.append((plus - minus) / (2.0 * s))
            third.append((plus - 2.0 * slope0 + minus) / s**2)
        smallest = 0.5 * step
        for order, raw in ((2, second), (3, third)):
            if order > max_order:
                break
            value, tail = richardson(raw)
            noise = 2 ** (order - 1) * tol / smallest ** (order - 1)
            values.append(value)
            bars.append(2.0 * tail + noise)

    return DerivativeEstimate(xi=float(xi), values=tuple(values), error_bars=tuple(bars), step=step)


def _sign_change(slopes: np.ndarray) -> Optional[int]:
    for i in range(slopes.size - 1):
        if slopes[i] < 0.0 <= slopes[i + 1]:
            return i
    return None


def find_minimum(band: BandFunction, config: Optional[DiscretizationConfig] = None) -> BandMinimum:
    """Locate the zero of mu' by bracketing on the samples and Brent's method."""

    i = _sign_change(band.mu_prime)
    if i is None:
        raise NoBracket(
            f"NoBracket: mu_{band.band_index}' does not change sign on "
            f"[{band.xi[0]:.6g}, {band.xi[-1]:.6g}]"
        )

    a, b = float(band.xi[i]), float(band.xi[i + 1])
    if band.mu_prime[i + 1] == 0.0:
        xi_star = b
    else:
        xi_star = brentq(lambda x: band.evaluate(x)[1], a, b, xtol=ROOT_XTOL, maxiter=200)
    theta, slope = band.evaluate(xi_star)
    derivs = derivatives_at(band, xi_star, 3, config)
    logger.info(
        "band %d minimum xi=%.10f theta=%.10f", band.band_index, xi_star, theta
    )
    return BandMinimum(
        band_index=band.band_index,
        xi_star=float(xi_star),
        theta=float(theta),
        second_derivative=derivs.values[1],
        third_derivative=derivs.values[2],
        error_bars=(derivs.error_bars[1], derivs.error_bars[2]),
        mu_prime_at_min=float(slope),
    )


# ----------------------------- band set and inverse branches -----------------------------


@dataclass(frozen=True, eq=False)
class BandSet:
    """Ground band with its minimum, the next threshold and the large-xi limit."""

    ground: BandFunction
    minimum: BandMinimum
    theta1: float
    band_limit: float = 1.0
    excited: Tuple[BandFunction, ...] = ()

    @property
    def theta0(self) -> float:
        return self.minimum.theta

    @property
    def xi0(self) -> float:
        return self.minimum.xi_star

    @property
    def config(self) -> Optional[DiscretizationConfig]:
        return self.ground.config_used

    def mu(self, xi: float) -> float:
        return self.ground.evaluate(xi)[0]

    def mu_prime(self, xi: float) -> float:
        return self.ground.evaluate(xi)[1]

    @property
    def far_xi(self) -> float:
        return max(float(self.ground.xi[-1]), 10.0)


def build_band_set(
    config: DiscretizationConfig,
    xi_lo: float = -1.0,
    xi_hi: float = 6.0,
    n_samples: int = 71,
    max_workers: int = 1,
) -> BandSet:
    ground = sample_band(1, xi_lo, xi_hi, n_samples, config, max_workers)
    minimum = find_minimum(ground, config)
    second = sample_band(2, max(xi_lo, 0.0), xi_hi, max(8, n_samples // 2), config, max_workers)
    theta1 = find_minimum(second, config).theta
    return BandSet(ground=ground, minimum=minimum, theta1=theta1, excited=(second,))


def _expand_bracket(
    f: Callable[[float], float], start: float, direction: float, initial: float
) -> float:
    width = initial
    x = start + direction * width
    for _ in range(MAX_BRACKET_EXPANSIONS):
        if f(x) > 0.0:
            return x
        width *= 2.0
        x = start + direction * width
    raise NoBracket(f"no bracket found moving from xi={start:.6g} in direction {direction:+g}")


def inverse_branch(bands: BandSet, e: float, branch: Branch) -> InverseBranchResult:
    """Solve mu_1(xi) = e on the monotone side of the minimum named by `branch`."""

    branch = Branch(branch)
    if e < bands.theta0 - THETA0_SNAP or e >= bands.theta1:
        raise EnergyOutOfRange(
            f"e={e:.12g} outside [Theta0, Theta1) = [{bands.theta0:.12g}, {bands.theta1:.12g})"
        )
    if abs(e - bands.theta0) <= THETA0_SNAP:
        return InverseBranchResult(value=bands.xi0, branch=branch, residual=abs(bands.theta0 - e))
    if branch is Branch.RIGHT and e >= bands.band_limit:
        return InverseBranchResult(value=PLUS_INFINITY, branch=branch, residual=0.0)

    band = bands.ground
    xi0 = bands.xi0

    def f(x: float) -> float:
        return band.evaluate(x)[0] - e

    if branch is Branch.LEFT:
        above = band.xi[(band.xi < xi0) & (band.mu > e)]
        a = float(above[-1]) if above.size else _expand_bracket(f, float(band.xi[0]), -1.0, 1.0)
        root = brentq(f, a, xi0, xtol=ROOT_XTOL, maxiter=200)
    else:
        above = band.xi[(band.xi > xi0) & (band.mu > e)]
        b = float(above[0]) if above.size else _expand_bracket(f, float(band.xi[-1]), 1.0, 1.0)
        root = brentq(f, xi0, b, xtol=ROOT_XTOL, maxiter=200)

    return InverseBranchResult(value=float(root), branch=branch, residual=abs(f(root)))


def branch_derivative(bands: BandSet, result: InverseBranchResult) -> float:
    """mu_1' at a branch point; the +infinity branch contributes 0."""

    if result.is_infinite:
        return 0.0
    return bands.mu_prime(result.as_float())


def interpolation_deviation(band: BandFunction, points: Sequence[float]) -> float:
    """Largest gap between the interpolant and fresh evaluations at `points`."""

    worst = 0.0
    for x in points:
        fresh, _ = band.evaluate(float(x))
        worst = max(worst, abs(band(float(x)) - fresh))
    return worst
