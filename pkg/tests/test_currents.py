from __future__ import annotations

import math

import numpy as np
import pytest

from degennes.bands.band_structure import BandSet, inverse_branch
from degennes.currents.current import (
    algebraic_current,
    current_sign_scan,
    current_slope_fit,
    current_window,
    predicted_current_slope,
    preimage_segments,
)
from degennes.errors import EnergyOutOfRange, WindowEmpty
from degennes.models.entities import NONE_FOUND, BandMinimum, Branch


def test_current_vanishes_at_the_bottom(bands):
    assert abs(algebraic_current(bands.theta0, bands)) < 1e-8


def test_current_at_band_limit_is_left_slope(bands):
    assert algebraic_current(1.0, bands) == pytest.approx(-2.0 / math.sqrt(math.pi), abs=1e-5)


def test_slope_near_bottom_matches_expansion(bands):
    predicted = predicted_current_slope(bands.minimum)
    fitted = current_slope_fit(bands, eps_max=1e-3, n_points=10)
    assert fitted == pytest.approx(predicted, rel=0.05)


def test_predicted_slope_formula():
    minimum = BandMinimum(1, 0.0, 0.0, second_derivative=2.0, third_derivative=-1.0, error_bars=(0, 0))
    assert predicted_current_slope(minimum) == pytest.approx(-5.0 / 12.0)


def test_symmetric_band_carries_no_current_below_limit(parabola_set):
    assert algebraic_current(0.8, parabola_set) == pytest.approx(0.0, abs=1e-9)
    assert algebraic_current(1.25, parabola_set) == pytest.approx(-2.0 * math.sqrt(0.75), abs=1e-9)


def test_scan_table_is_sorted(bands):
    grid = np.linspace(bands.theta0, bands.theta1, 8)[1:-1][::-1]
    scan = current_sign_scan(grid.tolist(), bands)
    energies = [entry.e for entry in scan.entries]
    assert energies == sorted(energies)
    candidate = scan.e_star_candidate
    assert candidate is NONE_FOUND or bands.theta0 < candidate < bands.theta1


def test_scan_interpolates_first_sign_change(make_band):
    # mu = 0.5 + t^2 + 0.2 t^3, t = xi - 0.7: c > 0 below the limit, c < 0 at it
    band = make_band(
        lambda x: 0.5 + (x - 0.7) ** 2 + 0.2 * (x - 0.7) ** 3,
        lambda x: 2.0 * (x - 0.7) + 0.6 * (x - 0.7) ** 2,
        lo=-1.3,
        hi=3.7,
    )
    minimum = BandMinimum(1, 0.7, 0.5, second_derivative=2.0, third_derivative=1.2, error_bars=(0, 0))
    skewed = BandSet(ground=band, minimum=minimum, theta1=2.0)
    scan = current_sign_scan([0.6, 0.9, 1.0], skewed)
    assert scan.entries[1].c_of_e > 0.0 > scan.entries[2].c_of_e
    assert 0.9 < scan.e_star_candidate < 1.0


def test_scan_rejects_energies_outside_range(bands):
    with pytest.raises(EnergyOutOfRange):
        current_sign_scan([bands.theta0, 0.8], bands)


def test_window_extrema_on_parabola(parabola_set):
    report = current_window(0.6, 0.01, parabola_set)
    assert report.lambda_min_over_h == pytest.approx(-2.0 * math.sqrt(0.11), abs=1e-8)
    assert report.lambda_max_over_h == pytest.approx(2.0 * math.sqrt(0.11), abs=1e-8)
    assert report.spectral_radius_over_h == pytest.approx(2.0 * math.sqrt(0.11), abs=1e-8)
    assert report.c_of_e == pytest.approx(0.0, abs=1e-9)
    assert report.sign_structure_margin > 0.0


def test_window_extrema_converge_linearly(bands):
    e = bands.theta0 + 0.05
    edge = bands.mu_prime(inverse_branch(bands, e, Branch.LEFT).as_float())
    deltas = np.array([1e-2, 1e-3, 1e-4])
    reports = [current_window(e, float(d), bands) for d in deltas]
    gaps = np.array([abs(r.lambda_min_over_h - edge) for r in reports])
    assert np.all(np.diff(gaps) < 0)
    order = np.polyfit(np.log(deltas), np.log(gaps), 1)[0]
    assert order >= 0.9
    assert all(r.dominant_side is Branch.LEFT for r in reports)


def test_window_above_limit_keeps_one_segment(bands):
    segments = preimage_segments(bands, 1.1, 1.2)
    assert len(segments) == 1
    assert segments[0][1] < 0.0


def test_window_errors(bands):
    with pytest.raises(WindowEmpty):
        current_window(0.8, 0.0, bands)
    with pytest.raises(EnergyOutOfRange):
        current_window(bands.theta0 + 0.01, 0.02, bands)


def test_window_extrema_nest_as_the_window_shrinks(bands):
    e = 0.8
    reports = [current_window(e, d, bands) for d in (0.05, 0.02, 0.005)]
    for outer, inner in zip(reports, reports[1:]):
        assert outer.lambda_min_over_h <= inner.lambda_min_over_h + 1e-9
        assert inner.lambda_max_over_h <= outer.lambda_max_over_h + 1e-9


def test_current_has_no_branch_switching_jumps(bands):
    for e in np.linspace(bands.theta0 + 0.01, 0.98, 8):
        step = abs(algebraic_current(float(e) + 1e-4, bands) - algebraic_current(float(e), bands))
        assert step < 1e-2, f"jump {step:.3g} at e={e:.6g}"
