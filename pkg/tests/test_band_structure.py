from __future__ import annotations

import math

import numpy as np
import pytest

from degennes.bands.band_structure import (
    BandFunction,
    branch_derivative,
    derivatives_at,
    find_minimum,
    interpolation_deviation,
    inverse_branch,
    sample_band,
)
from degennes.config import DiscretizationConfig
from degennes.errors import ConfigInvalid, EnergyOutOfRange, NoBracket, StepUnderflow
from degennes.models.entities import PLUS_INFINITY, Branch


def test_de_gennes_constant(bands):
    assert bands.theta0 == pytest.approx(0.590106, abs=1e-4)
    assert bands.xi0 == pytest.approx(0.76819, abs=1e-4)
    assert abs(bands.theta0 - bands.xi0**2) < 1e-6
    assert bands.minimum.second_derivative > 0.0
    assert abs(bands.minimum.mu_prime_at_min) < 1e-8


def test_second_band_minimum(bands):
    assert 1.0 < bands.theta1 < 3.0
    assert bands.theta1 == pytest.approx(1.7685, abs=1e-3)


def test_samples_are_sorted_and_consistent(bands):
    band = bands.ground
    assert np.all(np.diff(band.xi) > 0)
    assert band.samples[0].xi == band.xi[0]
    assert band(0.0) == pytest.approx(1.0, abs=1e-6)
    assert band.slope(0.0) == pytest.approx(-2.0 / math.sqrt(math.pi), abs=1e-4)


def test_parallel_sampling_matches_serial(config):
    serial = sample_band(1, 0.0, 1.0, 8, config, max_workers=1)
    threaded = sample_band(1, 0.0, 1.0, 8, config, max_workers=3)
    np.testing.assert_array_equal(serial.mu, threaded.mu)
    np.testing.assert_array_equal(serial.mu_prime, threaded.mu_prime)


def test_sampling_rejects_bad_ranges(config):
    with pytest.raises(ConfigInvalid):
        sample_band(1, 1.0, 0.0, 8, config)


def test_unsorted_samples_rejected():
    with pytest.raises(ConfigInvalid):
        BandFunction.from_samples(1, [0.0, 1.0, 0.5], [1.0, 1.0, 1.0], [0.0, 0.0, 0.0])


def test_cubic_derivatives_are_exact(make_band):
    band = make_band(lambda x: x**3, lambda x: 3.0 * x**2)
    estimate = derivatives_at(band, 0.5, 3)
    assert estimate.order(1)[0] == pytest.approx(0.75, abs=1e-10)
    assert estimate.order(2)[0] == pytest.approx(3.0, abs=1e-8)
    assert estimate.order(3)[0] == pytest.approx(6.0, abs=1e-6)


def test_step_below_tolerance_floor(bands, config):
    with pytest.raises(StepUnderflow):
        derivatives_at(bands.ground, bands.xi0, 3, config, step=1e-8)


def test_third_derivative_at_minimum_has_error_bar(bands):
    second_bar, third_bar = bands.minimum.error_bars
    assert 0.0 < second_bar < 1e-3
    assert 0.0 < third_bar < 1e-2


def test_monotone_band_has_no_bracket(make_band):
    band = make_band(lambda x: np.exp(-x), lambda x: -np.exp(-x), lo=0.0, hi=0.5)
    with pytest.raises(NoBracket, match="NoBracket"):
        find_minimum(band)


def test_inverse_branches(bands):
    left = inverse_branch(bands, 0.8, Branch.LEFT)
    right = inverse_branch(bands, 0.8, Branch.RIGHT)
    assert left.as_float() < bands.xi0 < right.as_float()
    assert bands.mu(left.as_float()) == pytest.approx(0.8, abs=1e-10)
    assert bands.mu(right.as_float()) == pytest.approx(0.8, abs=1e-10)
    assert branch_derivative(bands, left) < 0.0 < branch_derivative(bands, right)


def test_inverse_at_theta0_snaps_to_minimum(bands):
    for branch in Branch:
        assert inverse_branch(bands, bands.theta0, branch).value == bands.xi0


def test_right_branch_escapes_above_band_limit(bands):
    result = inverse_branch(bands, 1.2, Branch.RIGHT)
    assert result.value is PLUS_INFINITY
    assert result.is_infinite
    assert branch_derivative(bands, result) == 0.0
    assert inverse_branch(bands, 1.2, Branch.LEFT).as_float() < 0.0


@pytest.mark.parametrize("e", [0.5, 1.9])
def test_energy_outside_range(bands, e):
    with pytest.raises(EnergyOutOfRange):
        inverse_branch(bands, e, Branch.LEFT)


def test_coarse_solver_still_locates_minimum():
    coarse = DiscretizationConfig(grid_points=400, target_tol=1e-6)
    band = sample_band(1, 0.5, 1.0, 11, coarse)
    minimum = find_minimum(band, coarse)
    assert minimum.theta == pytest.approx(0.590106, abs=1e-5)


def test_interpolant_tracks_fresh_solves(config):
    band = sample_band(1, 0.0, 2.0, 41, config)
    assert band.xi[1] - band.xi[0] == pytest.approx(0.05)
    rng = np.random.default_rng(0)
    points = rng.uniform(0.0, 2.0, size=20)
    assert interpolation_deviation(band, points.tolist()) < 1e-6


def test_inverse_branches_are_consistent_over_energies(bands):
    energies = np.linspace(bands.theta0 + 1e-3, 0.99, 9)
    lefts, rights = [], []
    for e in energies:
        left = inverse_branch(bands, float(e), Branch.LEFT).as_float()
        right = inverse_branch(bands, float(e), Branch.RIGHT).as_float()
        assert bands.mu(left) == pytest.approx(e, abs=1e-9)
        assert bands.mu(right) == pytest.approx(e, abs=1e-9)
        lefts.append(left)
        rights.append(right)
    assert np.all(np.diff(lefts) < 0.0)
    assert np.all(np.diff(rights) > 0.0)
    assert lefts[-1] < bands.xi0 < rights[0]
