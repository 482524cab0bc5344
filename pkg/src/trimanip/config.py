"""Run configuration: flat TOML sections with a normative schema.

Every tunable of the simulated robot and its controllers lives here, with
the same defaults the library uses.  Loading is strict: unknown sections or
keys are rejected so that a typo cannot silently fall back to a default.
``dump()`` emits a TOML document that loads back to an identical
configuration.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np

try:
    import tomllib  # Python 3.11+
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from .envs import ReachTaskSpec
from .errors import ConfigError
from .control import TipGains, WrenchGains
from .grasp import ContactSet
from .hand import NUM_JOINTS
from .kinematics import HandGeometry
from .object_sim import CubeParams, side_grasp_contacts
from .safety import SafetyConfig
from .sim_driver import SimParams

DEFAULTS = {
    "geometry": {
        "link_length_1": 0.16,
        "link_length_2": 0.16,
        "mount_radius": 0.15,
        "mount_height": 0.30,
    },
    "safety": {
        "max_torque": 0.36,
        "max_velocity": 10.0,
        "velocity_damping_gain": 0.05,
        "position_lower": -2.7,
        "position_upper": 2.7,
        "limit_kp": 2.0,
        "limit_kd": 0.1,
        "driver_timeout": 0.1,
    },
    "sim": {
        "joint_inertia": 0.004,
        "joint_viscous_damping": 0.01,
        "gravity_enabled": False,
        "delta": 0.001,
        "link_mass_1": 0.2,
        "link_mass_2": 0.2,
    },
    "hand": {
        "position_kp": 3.0,
        "position_kd": 0.05,
    },
    "object": {
        "mass": 0.1,
        "edge": 0.065,
        "friction_coefficient": 1.0,
    },
    "control": {
        "p_lin": 200.0,
        "d_lin": 20.0,
        "p_ang": 1.0,
        "d_ang": 0.1,
        "p_tip": 50.0,
        "d_tip": 1.0,
        "stale_limit": 50,
    },
    "lift": {
        "height": 0.2,
        "duration": 5.0,
        "settle": 0.5,
    },
    "circle": {
        "radius": 0.04,
        "period": 8.0,
    },
    "reach": {
        "episode_length": 2.0,
        "rate_divisor": 10,
        "episodes": 50,
        "target_drop": 0.176,
        "target_half_extent": 0.10,
    },
    "backend": {
        "capacity": 20_000,
    },
}

# keys allowed to be either a scalar or a 9-element list
_PER_JOINT_KEYS = {("safety", "position_lower"), ("safety", "position_upper")}


def _check_value(section: str, key: str, value, default):
    if (section, key) in _PER_JOINT_KEYS:
        if isinstance(value, bool):
            raise ConfigError(f"{section}.{key}: expected number or list, got bool")
        if isinstance(value, (int, float)):
            return float(value)
        if isinstance(value, list):
            if len(value) != NUM_JOINTS or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
            ):
                raise ConfigError(
                    f"{section}.{key}: list must hold {NUM_JOINTS} numbers"
                )
            return [float(v) for v in value]
        raise ConfigError(f"{section}.{key}: expected number or list")
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{section}.{key}: expected bool, got {type(value).__name__}")
        return value
    if isinstance(default, int) and not isinstance(default, bool):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{section}.{key}: expected integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{section}.{key}: expected number, got {value!r}")
        return float(value)
    raise ConfigError(f"{section}.{key}: unsupported schema type")  # pragma: no cover


def _format_toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, list):
        return "[" + ", ".join(_format_toml_value(v) for v in value) + "]"
    raise ConfigError(f"cannot serialize {value!r}")  # pragma: no cover


@dataclass(frozen=True)
class RunConfig:
    """Validated, fully populated configuration tree."""

    sections: dict

    @classmethod
    def defaults(cls) -> "RunConfig":
        return cls(sections=copy.deepcopy(DEFAULTS))

    @classmethod
    def from_mapping(cls, mapping) -> "RunConfig":
        sections = copy.deepcopy(DEFAULTS)
        for section, content in mapping.items():
            if section not in DEFAULTS:
                raise ConfigError(f"unknown config section [{section}]")
            if not isinstance(content, dict):
                raise ConfigError(f"section [{section}] must be a table")
            for key, value in content.items():
                if key not in DEFAULTS[section]:
                    raise ConfigError(f"unknown key {section}.{key}")
                sections[section][key] = _check_value(
                    section, key, value, DEFAULTS[section][key]
                )
        return cls(sections=sections)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        try:
            with open(path, "rb") as f:
                raw = tomllib.load(f)
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
        return cls.from_mapping(raw)

    def dump(self) -> str:
        lines = []
        for section, content in self.sections.items():
            lines.append(f"[{section}]")
            for key, value in content.items():
                lines.append(f"{key} = {_format_toml_value(value)}")
            lines.append("")
        return "\n".join(lines)

    def __getitem__(self, section: str) -> dict:
        return self.sections[section]

    # -- builders for the package objects -----------------------------------
    def hand_geometry(self) -> HandGeometry:
        g = self.sections["geometry"]
        return HandGeometry.symmetric(
            link_lengths=(g["link_length_1"], g["link_length_2"]),
            mount_radius=g["mount_radius"],
            mount_height=g["mount_height"],
        )

    def safety_config(self) -> SafetyConfig:
        s = self.sections["safety"]
        return SafetyConfig(
            max_torque=s["max_torque"],
            max_velocity=s["max_velocity"],
            velocity_damping_gain=s["velocity_damping_gain"],
            position_lower=np.asarray(s["position_lower"], dtype=float),
            position_upper=np.asarray(s["position_upper"], dtype=float),
            limit_kp=s["limit_kp"],
            limit_kd=s["limit_kd"],
            driver_timeout=s["driver_timeout"],
        )

    def sim_params(self) -> SimParams:
        s = self.sections["sim"]
        return SimParams(
            joint_inertia=s["joint_inertia"],
            joint_viscous_damping=s["joint_viscous_damping"],
            gravity_enabled=s["gravity_enabled"],
            delta=s["delta"],
            link_masses=(s["link_mass_1"], s["link_mass_2"]),
        )

    def cube_params(self) -> CubeParams:
        o = self.sections["object"]
        return CubeParams(mass=o["mass"], edge=o["edge"])

    def contact_set(self) -> ContactSet:
        o = self.sections["object"]
        return side_grasp_contacts(
            edge=o["edge"], friction_coefficient=o["friction_coefficient"]
        )

    def wrench_gains(self) -> WrenchGains:
        c = self.sections["control"]
        return WrenchGains(
            p_lin=c["p_lin"], d_lin=c["d_lin"], p_ang=c["p_ang"], d_ang=c["d_ang"]
        )

    def tip_gains(self) -> TipGains:
        c = self.sections["control"]
        return TipGains(p_tip=c["p_tip"], d_tip=c["d_tip"])

    def reach_spec(self) -> ReachTaskSpec:
        r = self.sections["reach"]
        return ReachTaskSpec(
            episode_length=r["episode_length"],
            rate_divisor=r["rate_divisor"],
            control_period=self.sections["sim"]["delta"],
            target_drop=r["target_drop"],
            target_half_extent=r["target_half_extent"],
        )
