"""Explicit constants of the coercivity route from a Mourre estimate to a LAP bound.

Inputs are the Mourre constant c0 on J, the commutator bounds c1, c2, the
intervals I inside J and the height M of the box B = I x [0, M]. Every
constant is evaluated from its closed-form expression; the weighted
resolvent bound C_final follows from the constants and three operator norms.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Tuple
import logging
import math

import numpy as np
from scipy.integrate import quad

from degennes.errors import ConstraintViolated
from degennes.models.entities import ReportMixin

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MourreHypotheses(ReportMixin):
    c0: float
    c1: float
    c2: float
    I: Tuple[float, float]
    J: Tuple[float, float]
    M: float

    def validate(self) -> "MourreHypotheses":
        checks = (
            ("c0 > 0", self.c0 > 0),
            ("c1 > 0", self.c1 > 0),
            ("c2 > 0", self.c2 > 0),
            ("M > 0", self.M > 0),
            ("I nonempty", self.I[0] <= self.I[1]),
            ("I strictly inside J", self.J[0] < self.I[0] and self.I[1] < self.J[1]),
        )
        for name, ok in checks:
            if not ok:
                raise ConstraintViolated(name)
        return self


@lru_cache(maxsize=1)
def universal_integrals() -> Tuple[float, float]:
    """Integrals of t^(-1/2) and |ln t|^(1/2) t^(-1/2) over (0, 1).

    The second one is taken after t = exp(-s), as the integral of
    s^(1/2) exp(-s/2) over (0, inf), split at s = 1.
    """

    first, _ = quad(lambda t: 1.0, 0.0, 1.0, weight="alg", wvar=(-0.5, 0.0), epsabs=1e-13)
    head, _ = quad(lambda s: math.exp(-0.5 * s), 0.0, 1.0, weight="alg", wvar=(0.5, 0.0), epsabs=1e-13)
    tail, _ = quad(lambda s: math.sqrt(s) * math.exp(-0.5 * s), 1.0, np.inf, epsabs=1e-13)
    return first, head + tail


@dataclass(frozen=True)
class LedgerSample(ReportMixin):
    eps: float
    z_re: float
    z_im: float
    C: float
    D1: float
    D2: float
    D3: float


@dataclass(frozen=True)
class LapTerms(ReportMixin):
    eps: float
    norm_C: float
    norm_CA: float
    norm_AC: float
    K1: float
    K2: float
    K: float
    C_eps0: float
    integral_t: float
    integral_log: float
    C_final: float


@dataclass(frozen=True)
class ConstantsLedger(ReportMixin):
    hypotheses: MourreHypotheses
    sup_J_ell_plus_i: float
    sup_B_z_plus_i: float
    dist_I_Jc: float
    eps1: float
    eps0: float
    eps2: float
    c0_tilde: float
    K1: float
    K2: float
    K: float
    C_eps0: float
    C_final: float
    samples: Tuple[LedgerSample, ...] = field(default_factory=tuple)

    @property
    def geometry(self) -> float:
        """sup_B|z+i| / dist(I, J^c) + 1."""
        return self.sup_B_z_plus_i / self.dist_I_Jc + 1.0

    def C_of(self, eps: float, z: complex) -> float:
        ratio = 1.0 + abs(z + 1j) / self.dist_I_Jc
        return (1.0 - self.hypotheses.c1 * eps * ratio) / ratio

    def D1(self, eps: float, z: complex) -> float:
        h = self.hypotheses
        c = self.C_of(eps, z)
        numerator = z.imag + h.c0 * eps - (h.c1 * eps) ** 2 * self.sup_J_ell_plus_i / c
        return numerator / (1.0 + h.c1 * eps / c)

    def D2(self, eps: float, z: complex) -> float:
        h = self.hypotheses
        return self.C_of(eps, z) / (1.0 + h.c1 * eps * self.sup_J_ell_plus_i / self.D1(eps, z))

    def D3(self, eps: float, z: complex) -> float:
        return min(self.D1(eps, z) / self.sup_J_ell_plus_i, self.D2(eps, z)) / math.sqrt(2.0)

    def sample(self, eps: float, z: complex) -> LedgerSample:
        return LedgerSample(
            eps=eps, z_re=z.real, z_im=z.imag,
            C=self.C_of(eps, z), D1=self.D1(eps, z), D2=self.D2(eps, z), D3=self.D3(eps, z),
        )


# ----------------------------- geometry -----------------------------


def sup_abs_plus_i(interval: Tuple[float, float]) -> float:
    """sup over l in the interval of |l + i|, attained at an endpoint."""
    return max(math.hypot(interval[0], 1.0), math.hypot(interval[1], 1.0))


def sup_box(interval: Tuple[float, float], height: float) -> float:
    # corner with the largest |x| and y = M maximizes |x + i(y + 1)|
    x = max(abs(interval[0]), abs(interval[1]))
    return math.hypot(x, height + 1.0)


def dist_to_complement(inner: Tuple[float, float], outer: Tuple[float, float]) -> float:
    return min(inner[0] - outer[0], outer[1] - inner[1])


def _sample_grid(hyp: MourreHypotheses, eps1: float, n_eps: int, n_x: int, n_y: int):  # type: ignore[no-untyped-def]
    epsilons = np.geomspace(eps1 * 1e-3, eps1, n_eps)
    xs = np.linspace(hyp.I[0], hyp.I[1], n_x)
    ys = np.linspace(0.0, hyp.M, n_y)
    for eps in epsilons:
        for x in xs:
            for y in ys:
                yield float(eps), complex(float(x), float(y))


# ----------------------------- ledger and bound -----------------------------


def ledger(
    hyp: MourreHypotheses,
    norm_C: float = 1.0,
    norm_CA: float = 1.0,
    norm_AC: float = 1.0,
    grid: Tuple[int, int, int] = (12, 3, 4),
) -> ConstantsLedger:
    """Evaluate every constant for the hypotheses.

    eps2 depends on (eps, z) through C and D2; the ledger takes its smallest
    value over a grid of eps in (0, eps1] and z in B.
    """

    hyp.validate()
    c0, c1 = hyp.c0, hyp.c1
    s_j = sup_abs_plus_i(hyp.J)
    s_b = sup_box(hyp.I, hyp.M)
    dist = dist_to_complement(hyp.I, hyp.J)
    geometry = s_b / dist + 1.0

    eps1 = min(c0 / (4.0 * c1**2 * s_j), 1.0 / (2.0 * c1)) / geometry
    eps0 = min(eps1, 2.0 * s_j / (c0 * geometry * (1.0 + 4.0 * c1 * s_j / c0)))
    c0_tilde = 0.5 * c0 / (1.0 + 2.0 * (1.0 + 4.0 * c1 * s_j / c0) * geometry + 4.0 * c1 / c0)

    partial = ConstantsLedger(
        hypotheses=hyp, sup_J_ell_plus_i=s_j, sup_B_z_plus_i=s_b, dist_I_Jc=dist,
        eps1=eps1, eps0=eps0, eps2=eps1, c0_tilde=c0_tilde,
        K1=0.0, K2=0.0, K=0.0, C_eps0=0.0, C_final=0.0,
    )

    samples = []
    eps2 = eps1
    for eps, z in _sample_grid(hyp, eps1, *grid):
        sample = partial.sample(eps, z)
        samples.append(sample)
        eps2 = min(eps2, c0 * s_j / (2.0 * c1**2 * sample.C), 2.0 * sample.D2**2 / c0)

    terms = lap_terms(partial, norm_C, norm_CA, norm_AC)
    logger.debug("ledger eps1=%.6g eps0=%.6g eps2=%.6g C=%.6g", eps1, eps0, eps2, terms.C_final)
    return ConstantsLedger(
        hypotheses=hyp, sup_J_ell_plus_i=s_j, sup_B_z_plus_i=s_b, dist_I_Jc=dist,
        eps1=eps1, eps0=eps0, eps2=eps2, c0_tilde=c0_tilde,
        K1=terms.K1, K2=terms.K2, K=terms.K, C_eps0=terms.C_eps0, C_final=terms.C_final,
        samples=tuple(samples),
    )


def lap_terms(
    constants: ConstantsLedger, norm_C: float, norm_CA: float, norm_AC: float
) -> LapTerms:
    hyp = constants.hypotheses
    s_j = constants.sup_J_ell_plus_i
    eps = min(1.0, constants.eps0)

    k1 = 2.0 / math.sqrt(constants.c0_tilde) * max(norm_CA, norm_AC)
    k2 = 4.0 * math.sqrt(2.0) * hyp.c2 * s_j / hyp.c0 * norm_C
    k = (k1 + k2) * norm_C * (1.0 + 2.0 * math.sqrt(s_j) / math.sqrt(hyp.c0))
    c_eps0 = 4.0 * math.sqrt(2.0) * s_j * norm_C**2 / (hyp.c0 * eps)
    integral_t, integral_log = universal_integrals()
    c_final = (
        c_eps0
        + (k1 + k2) * (1.0 + math.sqrt(c_eps0)) * integral_t
        + math.sqrt(2.0) * math.sqrt(k) * (k1 + k2) * integral_log
    )
    return LapTerms(
        eps=eps, norm_C=norm_C, norm_CA=norm_CA, norm_AC=norm_AC,
        K1=k1, K2=k2, K=k, C_eps0=c_eps0,
        integral_t=integral_t, integral_log=integral_log, C_final=c_final,
    )


def lap_bound(constants: ConstantsLedger, norm_C: float, norm_CA: float, norm_AC: float) -> float:
    """Uniform bound on the weighted resolvent over Re z in I, Im z > 0."""

    return lap_terms(constants, norm_C, norm_CA, norm_AC).C_final


def regularized_resolvent_bound(terms: LapTerms, eps: float) -> float:
    """Growth bound K |ln eps| + C(eps0) for eps in (0, min(1, eps0)]."""

    if not 0 < eps <= terms.eps:
        raise ConstraintViolated("0 < eps ≤ min(1, eps0)", f"eps = {eps:g}")
    return terms.K * abs(math.log(eps)) + terms.C_eps0


def far_resolvent_bound(hyp: MourreHypotheses, z: complex, eps: float) -> float:
    """4 / Im z, valid for eps up to min(1/(2 c1), max_I |i + x| / (4 c1))."""

    hyp.validate()
    if not z.imag > 0:
        raise ConstraintViolated("Im z > 0", f"z = {z}")
    limit = min(1.0 / (2.0 * hyp.c1), sup_abs_plus_i(hyp.I) / (4.0 * hyp.c1))
    if not 0 <= eps <= limit:
        raise ConstraintViolated("eps ≤ min(1/(2c1), max_I|i+x|/(4c1))", f"eps = {eps:g}")
    return 4.0 / z.imag
