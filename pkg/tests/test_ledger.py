from __future__ import annotations

import math

import numpy as np
import pytest

from degennes.errors import ConstraintViolated
from degennes.mourre.ledger import (
    MourreHypotheses,
    far_resolvent_bound,
    lap_bound,
    lap_terms,
    ledger,
    regularized_resolvent_bound,
    universal_integrals,
)

WORKED = MourreHypotheses(c0=1.0, c1=1.0, c2=1.0, I=(2.0, 3.0), J=(1.0, 4.0), M=1.0)


def test_universal_integrals():
    first, second = universal_integrals()
    assert first == pytest.approx(2.0, abs=1e-8)
    assert second == pytest.approx(math.sqrt(2.0 * math.pi), abs=1e-8)


def test_worked_example():
    constants = ledger(WORKED)
    assert constants.sup_J_ell_plus_i == pytest.approx(math.sqrt(17.0))
    assert constants.sup_B_z_plus_i == pytest.approx(math.sqrt(13.0))
    assert constants.dist_I_Jc == pytest.approx(1.0)
    assert constants.geometry == pytest.approx(math.sqrt(13.0) + 1.0)
    assert constants.eps1 == pytest.approx(0.013165, abs=1e-6)
    assert 0.0 < constants.eps0 <= constants.eps1
    assert 0.0 < constants.eps2 <= constants.eps1
    assert constants.C_final == pytest.approx(lap_bound(constants, 1.0, 1.0, 1.0))


def test_coercivity_floors_on_random_samples():
    constants = ledger(WORKED)
    rng = np.random.default_rng(0)
    c0, s_j = WORKED.c0, constants.sup_J_ell_plus_i
    for _ in range(50):
        eps = float(rng.uniform(0.0, 1.0)) * constants.eps1
        z = complex(rng.uniform(*WORKED.I), rng.uniform(0.0, WORKED.M))
        assert constants.D1(eps, z) >= c0 * eps / 4.0
        small = eps * constants.eps0 / constants.eps1
        assert constants.D3(small, z) >= c0 * small / (4.0 * math.sqrt(2.0) * s_j)


def test_hypotheses_are_checked():
    bad = MourreHypotheses(c0=1.0, c1=1.0, c2=1.0, I=(0.5, 3.0), J=(1.0, 4.0), M=1.0)
    with pytest.raises(ConstraintViolated) as info:
        ledger(bad)
    assert info.value.constraint == "I strictly inside J"
    with pytest.raises(ConstraintViolated):
        ledger(MourreHypotheses(c0=0.0, c1=1.0, c2=1.0, I=(2.0, 3.0), J=(1.0, 4.0), M=1.0))


def test_zero_norms_give_zero_bound():
    constants = ledger(WORKED)
    assert lap_bound(constants, 0.0, 0.0, 0.0) == 0.0


def test_bound_does_not_grow_with_c0():
    finals = [
        ledger(MourreHypotheses(c0=c0, c1=1.0, c2=1.0, I=(2.0, 3.0), J=(1.0, 4.0), M=1.0)).C_final
        for c0 in (0.5, 1.0, 2.0, 4.0)
    ]
    assert all(b <= a for a, b in zip(finals, finals[1:]))


def test_k1_scales_like_inverse_root_of_c0():
    def k1(c0: float) -> float:
        return ledger(MourreHypotheses(c0=c0, c1=1e-9, c2=1.0, I=(2.0, 3.0), J=(1.0, 4.0), M=1.0)).K1

    assert k1(4.0) == pytest.approx(0.5 * k1(1.0), rel=1e-6)
    constants = ledger(WORKED)
    assert constants.K1 * math.sqrt(constants.c0_tilde) == pytest.approx(2.0)


def test_regularized_growth_and_far_bound():
    constants = ledger(WORKED)
    terms = lap_terms(constants, 1.0, 1.0, 1.0)
    eps = 0.5 * terms.eps
    assert regularized_resolvent_bound(terms, eps) == pytest.approx(
        terms.K * abs(math.log(eps)) + terms.C_eps0
    )
    with pytest.raises(ConstraintViolated):
        regularized_resolvent_bound(terms, 2.0 * terms.eps)

    assert far_resolvent_bound(WORKED, complex(2.5, 2.0), 0.1) == pytest.approx(2.0)
    with pytest.raises(ConstraintViolated):
        far_resolvent_bound(WORKED, complex(2.5, 0.0), 0.1)
    with pytest.raises(ConstraintViolated):
        far_resolvent_bound(WORKED, complex(2.5, 1.0), 10.0)


def test_bound_is_monotone_on_a_parameter_lattice():
    values = (0.5, 1.0, 2.0)

    def final(c0: float, c1: float, c2: float) -> float:
        return ledger(MourreHypotheses(c0=c0, c1=c1, c2=c2, I=(2.0, 3.0), J=(1.0, 4.0), M=1.0)).C_final

    table = {(c0, c1, c2): final(c0, c1, c2) for c0 in values for c1 in values for c2 in values}
    for (c0, c1, c2), value in table.items():
        for lo, hi in zip(values, values[1:]):
            if c0 == lo:
                assert table[(hi, c1, c2)] <= value
            if c1 == lo:
                assert table[(c0, hi, c2)] >= value
            if c2 == lo:
                assert table[(c0, c1, hi)] >= value


def test_bound_grows_with_every_norm():
    constants = ledger(WORKED)
    base = lap_bound(constants, 1.0, 1.0, 1.0)
    assert lap_bound(constants, 2.0, 1.0, 1.0) > base
    assert lap_bound(constants, 1.0, 2.0, 1.0) > base
    assert lap_bound(constants, 1.0, 1.0, 2.0) > base


def test_cutoff_factor_floor():
    constants = ledger(WORKED)
    rng = np.random.default_rng(1)
    eps_max = 1.0 / (2.0 * WORKED.c1 * constants.geometry)
    for _ in range(50):
        eps = float(rng.uniform(0.0, 1.0)) * eps_max
        z = complex(rng.uniform(*WORKED.I), rng.uniform(0.0, WORKED.M))
        assert constants.C_of(eps, z) >= 0.5 / constants.geometry
