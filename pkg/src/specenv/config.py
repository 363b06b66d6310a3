# config.py
#
# JSON configuration for grids, tolerances, estimator ranges, trials and
# thread caps. Missing sections fall back to the built-in defaults only when
# no file is given; a given file must be complete.

import copy
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

logger = logging.getLogger(__name__)

THREADS_ENV_VAR = "SPECENV_THREADS"

DEFAULT_CONFIG: Dict[str, Any] = {
    "grid": {"R": 40.0, "N": 4096},
    "kernel_grid": {"R": 40.0, "N": 4096},
    "tolerances": {
        "zero": 1e-12,
        "spectral_match": 1e-9,
        "proximity": 1e-6,
        "edge_decay": 1e-8,
        "bound_slack": 1e-6,
        "ap1_tail": 1e-10,
    },
    "mh_estimate": {"a_exponent_min": -3, "a_exponent_max": 6},
    "ap1": {"samples": 65536},
    "trials": {"count": 50, "size": 200, "spread": 20.0, "hs_levels": [0.1, 1.0, 5.0], "base_seed": 0},
    "envelope": {"samples": 2001},
    "threads": {"default": 4},
}


class ConfigError(ValueError):
    """Errors related to configuration file loading and validation."""
    pass


class SpecEnvConfig:
    """
    Loads and validates the specenv configuration.

    Getters return deep copies so callers cannot mutate the loaded state.
    """

    REQUIRED_SECTIONS: Dict[str, Dict[str, Any]] = {
        "grid": {"R": (int, float), "N": int},
        "kernel_grid": {"R": (int, float), "N": int},
        "tolerances": {
            "zero": float,
            "spectral_match": float,
            "proximity": float,
            "edge_decay": float,
            "bound_slack": float,
            "ap1_tail": float,
        },
        "mh_estimate": {"a_exponent_min": int, "a_exponent_max": int},
        "ap1": {"samples": int},
        "trials": {"count": int, "size": int, "spread": (int, float), "hs_levels": list, "base_seed": int},
        "envelope": {"samples": int},
        "threads": {"default": int},
    }

    def __init__(self, config_path: Optional[Union[str, Path]] = None):
        """
        Args:
            config_path (str | Path, optional): JSON file to load. Built-in
                defaults are used when omitted.

        Raises:
            ConfigError: If the file is missing, malformed or fails validation.
        """
        self.config_path = config_path
        if config_path is None:
            self.config = copy.deepcopy(DEFAULT_CONFIG)
            logger.debug("Using built-in default configuration.")
        else:
            self.config = self._load_config(config_path)

    def _validate_config(self, config: Dict) -> None:
        if not isinstance(config, dict):
            raise ConfigError("Configuration root must be a JSON object (dict).")
        for section, keys in self.REQUIRED_SECTIONS.items():
            if section not in config:
                raise ConfigError(f"Configuration missing required section: '{section}'")
            if not isinstance(config[section], dict):
                raise ConfigError(f"Configuration section '{section}' must be an object.")
            for key, expected_type in keys.items():
                if key not in config[section]:
                    raise ConfigError(f"Configuration missing required key in '{section}': '{key}'")
                value = config[section][key]
                # floats written as integers in JSON are accepted
                accepted = expected_type if expected_type is not float else (int, float)
                if isinstance(value, bool) or not isinstance(value, accepted):
                    raise ConfigError(f"Configuration key '{section}.{key}' has invalid type {type(value).__name__}.")

        for section in ("grid", "kernel_grid"):
            grid = config[section]
            if grid["R"] <= 0 or grid["N"] < 4 or grid["N"] % 2 != 0:
                raise ConfigError(f"'{section}' needs R > 0 and an even N >= 4, got {grid}.")
        for key, value in config["tolerances"].items():
            if value <= 0:
                raise ConfigError(f"Tolerance '{key}' must be positive, got {value}.")
        mh = config["mh_estimate"]
        if mh["a_exponent_min"] > mh["a_exponent_max"]:
            raise ConfigError(f"'mh_estimate' exponent range is empty: {mh}.")
        trials = config["trials"]
        if trials["count"] < 1 or trials["size"] < 1:
            raise ConfigError(f"'trials' needs positive count and size, got {trials}.")
        if not trials["hs_levels"] or any(
            isinstance(level, bool) or not isinstance(level, (int, float)) or level < 0
            for level in trials["hs_levels"]
        ):
            raise ConfigError("'trials.hs_levels' must be a non-empty list of non-negative numbers.")
        if config["ap1"]["samples"] < 16 or config["envelope"]["samples"] < 2:
            raise ConfigError("'ap1.samples' must be >= 16 and 'envelope.samples' >= 2.")
        if config["threads"]["default"] < 1:
            raise ConfigError("'threads.default' must be a positive integer.")

    def _load_config(self, config_path: Union[str, Path]) -> Dict[str, Any]:
        try:
            with open(config_path, "r", encoding="utf-8") as f:
                config: Dict = json.load(f)
            logger.info(f"Configuration loaded successfully from {config_path}")
        except FileNotFoundError:
            logger.error(f"Configuration file not found: {config_path}")
            raise ConfigError(f"Configuration file not found: {config_path}") from None
        except json.JSONDecodeError as e:
            logger.error(f"Error decoding JSON configuration file {config_path}: {e}")
            raise ConfigError(f"Malformed JSON in {config_path}: {e}") from e

        try:
            self._validate_config(config)
        except ConfigError as e:
            logger.error(f"Configuration validation failed: {e}")
            raise
        logger.info("Configuration validation successful.")
        return config

    def section(self, name: str) -> Dict[str, Any]:
        if name not in self.config:
            raise ConfigError(f"Unknown configuration section '{name}'.")
        return copy.deepcopy(self.config[name])

    def get_grid(self) -> Dict[str, Any]:
        return self.section("grid")

    def get_kernel_grid(self) -> Dict[str, Any]:
        return self.section("kernel_grid")

    def get_tolerances(self) -> Dict[str, float]:
        return self.section("tolerances")

    def get_trials(self) -> Dict[str, Any]:
        return self.section("trials")

    def get_ap1_options(self) -> Dict[str, Any]:
        """Keyword arguments for finite_module.ap1_reciprocal_norm."""
        tolerances = self.config["tolerances"]
        return {
            "samples": int(self.config["ap1"]["samples"]),
            "margin": float(tolerances["proximity"]),
            "tail": float(tolerances["ap1_tail"]),
        }

    def get_mh_options(self) -> Dict[str, Any]:
        """Keyword arguments for finite_module.mh_estimate."""
        mh = self.config["mh_estimate"]
        return {
            "a_exponents": (int(mh["a_exponent_min"]), int(mh["a_exponent_max"])),
            "margin": float(self.config["tolerances"]["proximity"]),
        }

    def as_dict(self) -> Dict[str, Any]:
        return copy.deepcopy(self.config)

    def resolve_thread_count(self) -> int:
        """
        Worker cap for every thread pool: SPECENV_THREADS if set, else threads.default.

        Raises:
            ConfigError: If SPECENV_THREADS is not a positive integer.
        """
        raw = os.environ.get(THREADS_ENV_VAR)
        if raw is None or raw.strip() == "":
            return int(self.config["threads"]["default"])
        try:
            count = int(raw)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV_VAR} must be a positive integer, got '{raw}'.") from None
        if count < 1:
            raise ConfigError(f"{THREADS_ENV_VAR} must be a positive integer, got '{raw}'.")
        return count
