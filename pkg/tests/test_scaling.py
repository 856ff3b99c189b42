from __future__ import annotations

from dataclasses import replace
from fractions import Fraction
import math

import numpy as np
import pytest

from degennes.errors import ConfigInvalid, FitUnstable
from degennes.mourre import scaling
from degennes.mourre.scaling import bound_terms, scaling_audit, scaling_exponents
from degennes.mourre.window import unperturbed_mourre_constant

H_GRID = np.logspace(-1.0, -4.0, 7).tolist()


@pytest.mark.parametrize(
    "alpha, final",
    [
        (0.0, Fraction(-2)),
        (0.2, Fraction(-7, 5)),
        (0.25, Fraction(-5, 4)),
        (0.5, Fraction(-3, 2)),
    ],
)
def test_final_exponent(alpha, final):
    assert scaling_exponents(alpha).final == final


def test_triple_point_at_quarter():
    exponents = scaling_exponents(0.25)
    assert set(exponents.candidates) == {Fraction(-5, 4)}
    assert exponents.exponents["c0"] == Fraction(5, 4)
    assert exponents.exponents["K1"] == Fraction(-5, 8)
    assert exponents.exponents["eps0"] == Fraction(0)


def test_alpha_out_of_range():
    with pytest.raises(ConfigInvalid):
        scaling_exponents(1.0)


def test_unperturbed_constant_scales_like_h_to_one_plus_alpha(bands):
    audit = scaling_audit(0.0, H_GRID, bands, residual_threshold=math.inf)
    assert audit.constant_slopes["c0"] == pytest.approx(1.0, abs=1e-6)


def test_audit_needs_two_decades(bands):
    with pytest.raises(ConfigInvalid):
        scaling_audit(0.2, [1e-2, 5e-3, 1e-3 * 1.01], bands)


@pytest.mark.parametrize("alpha", [0.0, 0.5])
def test_audit_fits_the_recomputed_ledger(bands, alpha):
    audit = scaling_audit(alpha, H_GRID, bands, residual_threshold=math.inf)
    assert [row.h for row in audit.rows] == sorted(H_GRID, reverse=True)
    hs = np.array([row.h for row in audit.rows])
    finals = np.array([row.C_final for row in audit.rows])
    slope, intercept = np.polyfit(np.log(hs), np.log(finals), 1)
    assert audit.slope == pytest.approx(slope, abs=1e-12)
    assert audit.intercept == pytest.approx(intercept, abs=1e-10)
    for row in audit.rows:
        assert sum(bound_terms(row).values()) == pytest.approx(row.C_final, rel=1e-12)


def test_audit_flags_slopes_that_miss_the_prediction(bands):
    flat = scaling_audit(0.0, H_GRID, bands, residual_threshold=math.inf)
    assert flat.target == pytest.approx(-2.0)
    assert flat.slope > -1.5
    assert not flat.passed
    assert flat.leading_term in flat.term_slopes

    steep = scaling_audit(0.5, H_GRID, bands, residual_threshold=math.inf)
    assert steep.target == pytest.approx(-1.5)
    assert steep.slope < -1.55
    assert not steep.passed


def test_audit_follows_the_commutator_bound(bands, monkeypatch):
    def frozen(window, band_set):
        return replace(unperturbed_mourre_constant(window, band_set), commutator_lower_bound=0.01)

    monkeypatch.setattr(scaling, "unperturbed_mourre_constant", frozen)
    audit = scaling_audit(0.2, H_GRID, bands, residual_threshold=math.inf)
    assert all(row.c0 == 0.01 for row in audit.rows)
    assert audit.slope > -0.5
    assert not audit.passed


def test_audit_rejects_a_poor_power_law_fit(bands):
    with pytest.raises(FitUnstable, match="alpha=0.5"):
        scaling_audit(0.5, H_GRID, bands, residual_threshold=1e-6)


def test_audit_reports_predicted_exponents(bands):
    audit = scaling_audit(0.25, H_GRID, bands, residual_threshold=math.inf)
    assert audit.target == pytest.approx(-1.25)
    assert audit.predicted_exponents["K1"] == pytest.approx(-0.625)
    assert audit.predicted_exponents["C_eps0"] == pytest.approx(-1.25)
    assert set(audit.constant_slopes) == set(scaling.AUDITED_CONSTANTS)
