# tests/test_config.py

import copy
import json
from pathlib import Path

import pytest

from specenv.config import DEFAULT_CONFIG, THREADS_ENV_VAR, ConfigError, SpecEnvConfig


@pytest.fixture
def valid_config_data() -> dict:
    """A complete configuration equal to the built-in defaults."""
    return copy.deepcopy(DEFAULT_CONFIG)


@pytest.fixture
def write_config(tmp_path):
    def _write(data, name="specenv_config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path
    return _write


# -----------------------------------------------------------------------------
# ## Success Scenarios
# -----------------------------------------------------------------------------

def test_defaults_without_file():
    # Act
    config = SpecEnvConfig()

    # Assert
    assert config.get_grid() == {"R": 40.0, "N": 4096}
    assert config.get_tolerances()["spectral_match"] == 1e-9
    assert config.get_trials()["hs_levels"] == [0.1, 1.0, 5.0]


def test_load_valid_file(valid_config_data, write_config):
    # Arrange
    valid_config_data["grid"] = {"R": 20, "N": 1024}
    path = write_config(valid_config_data)

    # Act
    config = SpecEnvConfig(path)

    # Assert
    assert config.get_grid() == {"R": 20, "N": 1024}
    assert config.as_dict() == valid_config_data


def test_shipped_config_file_matches_defaults():
    config = SpecEnvConfig(Path(__file__).resolve().parent.parent / "config" / "specenv_config.json")
    assert config.as_dict() == DEFAULT_CONFIG


def test_getters_return_copies():
    # Arrange
    config = SpecEnvConfig()

    # Act
    config.get_trials()["hs_levels"].append(99.0)

    # Assert
    assert config.get_trials()["hs_levels"] == [0.1, 1.0, 5.0]


def test_estimator_options_come_from_the_file(valid_config_data, write_config):
    # Arrange
    valid_config_data["ap1"]["samples"] = 4096
    valid_config_data["mh_estimate"] = {"a_exponent_min": -1, "a_exponent_max": 2}
    valid_config_data["tolerances"].update({"proximity": 1e-4, "ap1_tail": 1e-8})
    config = SpecEnvConfig(write_config(valid_config_data))

    # Act
    ap1_options = config.get_ap1_options()
    mh_options = config.get_mh_options()

    # Assert
    assert ap1_options == {"samples": 4096, "margin": 1e-4, "tail": 1e-8}
    assert mh_options == {"a_exponents": (-1, 2), "margin": 1e-4}


def test_thread_count_from_environment(monkeypatch):
    # Arrange
    config = SpecEnvConfig()

    # Act / Assert
    monkeypatch.delenv(THREADS_ENV_VAR, raising=False)
    assert config.resolve_thread_count() == 4
    monkeypatch.setenv(THREADS_ENV_VAR, "7")
    assert config.resolve_thread_count() == 7


# -----------------------------------------------------------------------------
# ## Failure Scenarios (Validation)
# -----------------------------------------------------------------------------

def test_missing_file_raises(tmp_path):
    with pytest.raises(ConfigError) as excinfo:
        SpecEnvConfig(tmp_path / "absent.json")
    assert "not found" in str(excinfo.value)


def test_malformed_json_raises(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{ not json", encoding="utf-8")
    with pytest.raises(ConfigError) as excinfo:
        SpecEnvConfig(path)
    assert "Malformed JSON" in str(excinfo.value)


def test_missing_section_raises(valid_config_data, write_config):
    del valid_config_data["tolerances"]
    with pytest.raises(ConfigError) as excinfo:
        SpecEnvConfig(write_config(valid_config_data))
    assert "missing required section: 'tolerances'" in str(excinfo.value)


def test_missing_key_raises(valid_config_data, write_config):
    del valid_config_data["grid"]["N"]
    with pytest.raises(ConfigError) as excinfo:
        SpecEnvConfig(write_config(valid_config_data))
    assert "missing required key in 'grid': 'N'" in str(excinfo.value)


@pytest.mark.parametrize("section, key, value", [
    ("grid", "N", 4096.5),
    ("grid", "N", True),
    ("tolerances", "zero", "small"),
    ("trials", "hs_levels", 1.0),
])
def test_wrong_type_raises(valid_config_data, write_config, section, key, value):
    valid_config_data[section][key] = value
    with pytest.raises(ConfigError) as excinfo:
        SpecEnvConfig(write_config(valid_config_data))
    assert f"'{section}.{key}' has invalid type" in str(excinfo.value)


@pytest.mark.parametrize("section, key, value, message", [
    ("grid", "N", 4095, "even N >= 4"),
    ("kernel_grid", "R", -1.0, "R > 0"),
    ("tolerances", "proximity", 0.0, "must be positive"),
    ("threads", "default", 0, "positive integer"),
    ("trials", "hs_levels", [], "non-empty list"),
])
def test_out_of_range_values_raise(valid_config_data, write_config, section, key, value, message):
    valid_config_data[section][key] = value
    with pytest.raises(ConfigError) as excinfo:
        SpecEnvConfig(write_config(valid_config_data))
    assert message in str(excinfo.value)


def test_empty_exponent_range_raises(valid_config_data, write_config):
    valid_config_data["mh_estimate"] = {"a_exponent_min": 3, "a_exponent_max": 1}
    with pytest.raises(ConfigError):
        SpecEnvConfig(write_config(valid_config_data))


@pytest.mark.parametrize("raw", ["zero", "0", "-2"])
def test_invalid_thread_environment_raises(monkeypatch, raw):
    monkeypatch.setenv(THREADS_ENV_VAR, raw)
    with pytest.raises(ConfigError) as excinfo:
        SpecEnvConfig().resolve_thread_count()
    assert THREADS_ENV_VAR in str(excinfo.value)


def test_unknown_section_raises():
    with pytest.raises(ConfigError):
        SpecEnvConfig().section("hardware")
