from __future__ import annotations

import pytest

from degennes.config import DiscretizationConfig, RuntimeSettings, load_settings, settings_as_dict
from degennes.errors import ConfigInvalid


def test_defaults():
    settings = load_settings()
    assert settings.discretization == DiscretizationConfig(12.0, 1000, 3, 1e-9)
    assert settings.workers == 1
    assert settings.log_level == "INFO"
    assert settings.seed == 0


def test_file_overrides_defaults_and_flags_override_file(tmp_path):
    path = tmp_path / "degennes.env"
    path.write_text("DEGENNES_GRID_POINTS=500\nDEGENNES_TARGET_TOL=1e-7\nDEGENNES_SEED=3\n")

    from_file = load_settings(str(path))
    assert from_file.discretization.grid_points == 500
    assert from_file.discretization.target_tol == 1e-7
    assert from_file.seed == 3

    flagged = load_settings(str(path), {"grid_points": 800, "seed": None})
    assert flagged.discretization.grid_points == 800
    assert flagged.seed == 3


def test_missing_file_is_invalid(tmp_path):
    with pytest.raises(ConfigInvalid):
        load_settings(str(tmp_path / "absent.env"))


def test_unparseable_value_names_the_key(tmp_path):
    path = tmp_path / "bad.env"
    path.write_text("DEGENNES_GRID_POINTS=many\n")
    with pytest.raises(ConfigInvalid, match="DEGENNES_GRID_POINTS"):
        load_settings(str(path))


@pytest.mark.parametrize(
    "overrides",
    [
        {"grid_points": 4},
        {"target_tol": 0.0},
        {"refinement_levels": 0},
        {"domain_length": -1.0},
        {"workers": 0},
        {"log_level": "LOUD"},
    ],
)
def test_invalid_overrides(overrides):
    with pytest.raises(ConfigInvalid):
        load_settings(overrides=overrides)


def test_config_is_hashable_and_overridable():
    base = DiscretizationConfig()
    assert hash(base) == hash(DiscretizationConfig())
    assert base.with_overrides(grid_points=1500).grid_points == 1500
    with pytest.raises(ConfigInvalid):
        base.with_overrides(grid_points=2)


def test_report_echo_leaves_out_execution_fields():
    echo = settings_as_dict(RuntimeSettings(workers=8, log_level="DEBUG", seed=5))
    assert echo == {
        "discretization": {
            "domain_length": 12.0,
            "grid_points": 1000,
            "refinement_levels": 3,
            "target_tol": 1e-9,
        },
        "seed": 5,
    }
