"""Shared fixtures: the default band set is expensive, so it is built once."""
from __future__ import annotations

from typing import Callable

import numpy as np
import pytest

from degennes.bands.band_structure import BandFunction, BandSet, build_band_set
from degennes.config import DiscretizationConfig
from degennes.models.entities import BandMinimum


@pytest.fixture(scope="session")
def config() -> DiscretizationConfig:
    return DiscretizationConfig()


@pytest.fixture(scope="session")
def bands(config: DiscretizationConfig) -> BandSet:
    return build_band_set(config)


def synthetic_band(
    mu: Callable[[np.ndarray], np.ndarray],
    mu_prime: Callable[[np.ndarray], np.ndarray],
    lo: float = -2.0,
    hi: float = 2.0,
    n: int = 81,
    band_index: int = 1,
) -> BandFunction:
    xi = np.linspace(lo, hi, n)
    return BandFunction.from_samples(band_index, xi, mu(xi), mu_prime(xi))


@pytest.fixture
def parabola_set() -> BandSet:
    """mu(xi) = 0.5 + (xi - 0.7)^2 with a symmetric minimum and no excited band."""

    band = synthetic_band(lambda x: 0.5 + (x - 0.7) ** 2, lambda x: 2.0 * (x - 0.7), lo=-3.0, hi=4.0)
    minimum = BandMinimum(
        band_index=1, xi_star=0.7, theta=0.5, second_derivative=2.0,
        third_derivative=0.0, error_bars=(0.0, 0.0),
    )
    return BandSet(ground=band, minimum=minimum, theta1=2.0)


@pytest.fixture
def make_band() -> Callable[..., BandFunction]:
    return synthetic_band
