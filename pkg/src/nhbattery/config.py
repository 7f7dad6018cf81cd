"""Typed run configuration read from TOML files with per-module sections.

Each section maps onto one dataclass.  Unknown sections or keys are
rejected, so a typo in a recipe file fails loudly instead of silently
falling back to a default.
"""
from __future__ import annotations

import sys
from dataclasses import fields
from importlib import resources
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .circuit import CircuitParams, CircuitState, DiodeNetwork, DiodeParams, LinearBuffer
from .coupling import CoilGeometry
from .dynamics import IntegrationConfig

__all__ = [
    "ConfigError",
    "SECTIONS",
    "load_config",
    "parse_config",
    "check_keys",
    "coil_from",
    "integration_from",
    "circuit_from",
    "preset_names",
    "load_preset",
    "CircuitRecipe",
]


class ConfigError(ValueError):
    pass


SECTIONS: Dict[str, set] = {
    "system": {"kappa", "gamma", "g", "g1", "gamma1", "omega_a", "omega_b", "omega0", "family"},
    "integration": {f.name for f in fields(IntegrationConfig)},
    "coil": {f.name for f in fields(CoilGeometry)},
    "sweep": {"gamma_range", "d_range", "kappa_range", "workers"},
    "schedule": {"segments"},
    "detector": {"window", "threshold"},
    "circuit": {"l", "c", "m_over_l", "r_b", "rail_voltage", "t_end", "dt_max"},
    "gain_network": {"type", "r_f", "r_g", "r_1", "r_2"},
    "diode": {f.name for f in fields(DiodeParams)},
    "initial": {"u_a", "u_b", "i_a", "i_b"},
    "output": {"format", "path"},
}

_NETWORK_KEYS = {"linear": {"type", "r_f", "r_g"}, "diode": {"type", "r_1", "r_2", "r_g"},
                 "none": {"type"}}


def check_keys(cfg: Mapping[str, Any]) -> None:
    for section, body in cfg.items():
        if section not in SECTIONS:
            raise ConfigError(f"unknown config section [{section}]")
        if not isinstance(body, Mapping):
            raise ConfigError(f"[{section}] must be a table")
        extra = set(body) - SECTIONS[section]
        if extra:
            raise ConfigError(f"unknown key(s) in [{section}]: {', '.join(sorted(extra))}")
    net = cfg.get("gain_network", {})
    if net:
        kind = net.get("type", "linear")
        if kind not in _NETWORK_KEYS:
            raise ConfigError(f"gain_network.type must be one of {sorted(_NETWORK_KEYS)}")
        extra = set(net) - _NETWORK_KEYS[kind]
        if extra:
            raise ConfigError(f"key(s) not valid for a {kind} network: {', '.join(sorted(extra))}")


def parse_config(text: str) -> Dict[str, Dict[str, Any]]:
    try:
        cfg = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    check_keys(cfg)
    return cfg


def load_config(path) -> Dict[str, Dict[str, Any]]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def coil_from(section: Mapping[str, Any]) -> CoilGeometry:
    return CoilGeometry(**section)


def integration_from(section: Mapping[str, Any], **defaults) -> IntegrationConfig:
    return IntegrationConfig(**{**defaults, **section})


class CircuitRecipe:
    """Circuit parameters plus the run horizon and initial state."""

    def __init__(self, params: CircuitParams, t_end: float, initial: CircuitState,
                 dt_max: Optional[float] = None):
        if not t_end > 0:
            raise ConfigError("circuit t_end must be positive")
        self.params = params
        self.t_end = float(t_end)
        self.initial = initial
        self.dt_max = dt_max


def circuit_from(cfg: Mapping[str, Mapping[str, Any]]) -> CircuitRecipe:
    circ = dict(cfg.get("circuit", {}))
    t_end = circ.pop("t_end", 1.5e-3)
    dt_max = circ.pop("dt_max", None)
    net_cfg = dict(cfg.get("gain_network", {"type": "linear"}))
    kind = net_cfg.pop("type", "linear")
    if kind == "linear":
        net = LinearBuffer(**net_cfg)
    elif kind == "diode":
        net = DiodeNetwork(**net_cfg, diode=DiodeParams(**cfg.get("diode", {})))
    else:
        net = None
    if kind != "diode" and cfg.get("diode"):
        raise ConfigError("[diode] given without a diode gain network")
    params = CircuitParams(gain_network=net, **circ)
    return CircuitRecipe(params, t_end, CircuitState(**cfg.get("initial", {})), dt_max)


def preset_names():
    root = resources.files("nhbattery") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".toml"))


def load_preset(name: str) -> Dict[str, Dict[str, Any]]:
    """Parsed contents of a shipped recipe such as ``fig7-unbroken``."""
    if name not in preset_names():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    text = (resources.files("nhbattery") / "presets" / f"{name}.toml").read_text()
    return parse_config(text)
