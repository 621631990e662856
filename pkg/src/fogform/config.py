"""Configuration loading: defaults, YAML files, manifests, --set overrides.

The configuration is a single hierarchical mapping whose keys mirror the
scenario parameters; every leaf can be overridden on the command line with
``--set dotted.key=value``.  A run manifest embeds the fully resolved
mapping, so pointing ``--config`` at a manifest reproduces the run exactly.
"""

from __future__ import annotations

import copy
import json
import os
from pathlib import Path
from typing import Any

import yaml

from .queueing import ComputeProfile, Position, RadioParams, service_rate
from .scenarios import ScenarioConfig
from .solver import CloudLink

__all__ = [
    "ConfigError",
    "DEFAULT_CONFIG",
    "ENV_CONFIG_PATH",
    "load_config",
    "apply_overrides",
    "build_scenario",
    "experiment_params",
]

ENV_CONFIG_PATH = "FOGFORM_CONFIG"

# Calibrated values: x_i = 10 packets/s puts the no-neighbor cloud share at
# ~60%, and eta = 0.011 s puts the offline total-cost minimum at J = 4 for
# a fixed neighbor link rate of 20 packets/s.
DEFAULT_CONFIG: dict[str, Any] = {
    "area_m": 50.0,
    "n_candidates": 15,
    "initiator_pos": None,  # [x, y] meters; null -> center of the square
    "bs_distance_m": 600.0,
    "x_i": 10.0,
    "eta": 0.011,
    "tau": 3,
    "J": 4,
    "seed": 20240809,
    "iterations": 200,
    "max_arrivals": 1000000,
    "mu_tx_override": None,  # packets/s; set for fixed neighbor link rate mode
    "radio": {
        "bandwidth_hz": 15000.0,
        "noise_psd_dbm_per_hz": -174.0,
        "tx_power_dbm": 20.0,
        "pathloss_const": 1.0e-3,
        "pathloss_exp": 4.0,
        "packet_bytes": 1500,
    },
    "local": {"mu": 8.0, "c": 0.05},
    "neighbor": {"mu": 8.0, "c": 0.05},
    "cloud": {"mu_tx": 8.8, "c": 0.025},  # mu_tx null -> derive from bs_distance_m
    "experiments": {
        "offline_sweep": {"j_min": 0, "j_max": 7, "mu_ij": [20.0, 30.0]},
        "online_vs_offline": {"j_min": 1, "j_max": 7},
        "ratio_cdf": {"j": 2},
        "distance_sweep": {"j": 2, "distances": [200.0, 300.0, 400.0, 500.0, 600.0]},
        "choose_j": {"j_min": 0, "j_max": 7},
    },
}


class ConfigError(ValueError):
    """A configuration file or override is malformed; the message names the key."""


def _merge(base: dict, incoming: dict, prefix: str = "") -> None:
    for key, value in incoming.items():
        path = f"{prefix}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key '{path}'")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config key '{path}' must be a mapping")
            _merge(base[key], value, prefix=f"{path}.")
        else:
            base[key] = value


def load_config(path: str | os.PathLike | None = None) -> dict[str, Any]:
    """Resolved configuration mapping: defaults overlaid with the given file.

    ``path`` may be a YAML config file or a run manifest (JSON with an
    embedded ``config`` snapshot).  With no path, the file named by the
    FOGFORM_CONFIG environment variable is used if set, otherwise the
    built-in defaults.
    """
    resolved = copy.deepcopy(DEFAULT_CONFIG)
    if path is None:
        path = os.environ.get(ENV_CONFIG_PATH) or None
    if path is None:
        return resolved
    text = Path(path).read_text(encoding="utf-8")
    data: Any
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as err:
            raise ConfigError(f"cannot parse config file {path}: {err}") from err
    if isinstance(data, dict) and "config" in data and "experiment" in data:
        data = data["config"]  # run manifest: reuse its embedded snapshot
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must contain a mapping")
    _merge(resolved, data)
    return resolved


def apply_overrides(config: dict[str, Any], overrides: list[str]) -> dict[str, Any]:
    """Apply ``key=value`` strings (dotted keys, YAML-parsed values) in place."""
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"override '{item}' is not of the form key=value")
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError as err:
            raise ConfigError(f"cannot parse override value for '{key}': {err}") from err
        node = config
        parts = key.split(".")
        for part in parts[:-1]:
            if not isinstance(node.get(part), dict):
                raise ConfigError(f"unknown config key '{key}'")
            node = node[part]
        leaf = parts[-1]
        if leaf not in node:
            raise ConfigError(f"unknown config key '{key}'")
        if isinstance(node[leaf], dict):
            raise ConfigError(f"config key '{key}' is a section, not a value")
        node[leaf] = value
    return config


def _number(config: dict, key: str, kind=float, optional: bool = False):
    node = config
    for part in key.split("."):
        node = node[part]
    if node is None:
        if optional:
            return None
        raise ConfigError(f"config key '{key}' must be set")
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        raise ConfigError(f"config key '{key}' must be a number, got {node!r}")
    if kind is int and float(node) != int(node):
        raise ConfigError(f"config key '{key}' must be an integer, got {node!r}")
    return kind(node)


def build_scenario(config: dict[str, Any]) -> ScenarioConfig:
    """Validated ScenarioConfig from a resolved mapping; errors name the key."""
    try:
        radio = RadioParams(
            bandwidth_hz=_number(config, "radio.bandwidth_hz"),
            noise_psd_dbm_per_hz=_number(config, "radio.noise_psd_dbm_per_hz"),
            tx_power_dbm=_number(config, "radio.tx_power_dbm"),
            pathloss_const=_number(config, "radio.pathloss_const"),
            pathloss_exp=_number(config, "radio.pathloss_exp"),
            packet_size_bits=_number(config, "radio.packet_bytes") * 8.0,
        )
    except ValueError as err:
        raise ConfigError(f"invalid 'radio' section: {err}") from err

    pos = config["initiator_pos"]
    initiator = None
    if pos is not None:
        if not (isinstance(pos, (list, tuple)) and len(pos) == 2):
            raise ConfigError("config key 'initiator_pos' must be null or [x, y]")
        initiator = Position(float(pos[0]), float(pos[1]))

    bs_distance = _number(config, "bs_distance_m")
    mu_c = _number(config, "cloud.mu_tx", optional=True)
    if mu_c is None:
        mu_c = service_rate(bs_distance, radio)

    def section(name: str) -> ComputeProfile:
        try:
            return ComputeProfile(mu=_number(config, f"{name}.mu"), c=_number(config, f"{name}.c"))
        except ValueError as err:
            raise ConfigError(f"invalid '{name}' section: {err}") from err

    try:
        return ScenarioConfig(
            area_m=_number(config, "area_m"),
            n_candidates=_number(config, "n_candidates", kind=int),
            initiator_pos=initiator,
            bs_distance_m=bs_distance,
            radio=radio,
            local_prof=section("local"),
            neighbor_prof=section("neighbor"),
            mu_tx_override=_number(config, "mu_tx_override", optional=True),
            cloud=CloudLink(mu_tx=mu_c, c=_number(config, "cloud.c")),
            x_i=_number(config, "x_i"),
            eta=_number(config, "eta"),
            tau=_number(config, "tau", kind=int),
            J=_number(config, "J", kind=int),
            seed=_number(config, "seed", kind=int),
            iterations=_number(config, "iterations", kind=int),
            max_arrivals=_number(config, "max_arrivals", kind=int),
        )
    except ConfigError:
        raise
    except ValueError as err:
        raise ConfigError(str(err)) from err


def experiment_params(config: dict[str, Any], name: str) -> dict[str, Any]:
    """The experiment-specific sub-section (keyed with underscores)."""
    section = config["experiments"].get(name.replace("-", "_"))
    if section is None:
        raise ConfigError(f"unknown experiment section '{name}'")
    return section
