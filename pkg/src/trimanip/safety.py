"""Software safety checks between desired and applied actions.

The checks form a pure transformation chain applied by the driver to every
command:

    PD fold-in -> velocity damping -> position-limit PD -> torque clip

Clipping runs last so the hard torque bound holds no matter what the earlier
stages produce.  Collisions are deliberately *not* prevented; the hardware
this models is robust to them and the chain contains no workspace check.

All torque-level functions broadcast over leading axes, so a fuzz corpus of
shape ``(n, 9)`` goes through the exact same code path as a single command.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hand import NUM_JOINTS, HandAction, HandObservation, effective_torque

# Defaults are simulation-stable configuration, not identified hardware
# limits.
DEFAULT_MAX_TORQUE = 0.36  # N*m
DEFAULT_MAX_VELOCITY = 10.0  # rad/s
DEFAULT_DRIVER_TIMEOUT = 0.1  # s


def _limit_vector(value) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(NUM_JOINTS, float(arr))
    if arr.shape != (NUM_JOINTS,):
        raise ValueError(f"position limit must be scalar or shape ({NUM_JOINTS},)")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SafetyConfig:
    max_torque: float = DEFAULT_MAX_TORQUE
    max_velocity: float = DEFAULT_MAX_VELOCITY
    velocity_damping_gain: float = 0.05  # N*m*s/rad
    position_lower: np.ndarray = field(default_factory=lambda: _limit_vector(-2.7))
    position_upper: np.ndarray = field(default_factory=lambda: _limit_vector(2.7))
    limit_kp: float = 2.0
    limit_kd: float = 0.1
    driver_timeout: float = DEFAULT_DRIVER_TIMEOUT

    def __post_init__(self):
        object.__setattr__(self, "position_lower", _limit_vector(self.position_lower))
        object.__setattr__(self, "position_upper", _limit_vector(self.position_upper))
        if self.max_torque <= 0:
            raise ValueError("max_torque must be positive")
        if not np.all(self.position_lower < self.position_upper):
            raise ValueError("position_lower must be below position_upper elementwise")


def clip_torque(torque, config: SafetyConfig) -> np.ndarray:
    """Clamp every component to [-max_torque, +max_torque]."""
    return np.clip(np.asarray(torque, dtype=float), -config.max_torque, config.max_torque)


def velocity_damping(torque, velocity, config: SafetyConfig) -> np.ndarray:
    """Subtract a damping torque on joints moving faster than max_velocity.

    Damping engages only beyond the threshold so that it does not distort
    ordinary low-speed control.
    """
    torque = np.asarray(torque, dtype=float)
    velocity = np.asarray(velocity, dtype=float)
    over = np.abs(velocity) > config.max_velocity
    return np.where(over, torque - config.velocity_damping_gain * velocity, torque)


def position_limit_pd(torque, position, velocity, config: SafetyConfig) -> np.ndarray:
    """Replace the command on out-of-range joints with a pull-back PD torque.

    Joints inside the admissible range pass through untouched; joints beyond
    a limit are driven back toward the nearest limit, ignoring whatever the
    user asked for on that joint.
    """
    torque = np.asarray(torque, dtype=float)
    position = np.asarray(position, dtype=float)
    velocity = np.asarray(velocity, dtype=float)
    below = position < config.position_lower
    above = position > config.position_upper
    nearest = np.where(below, config.position_lower, config.position_upper)
    pullback = config.limit_kp * (nearest - position) - config.limit_kd * velocity
    return np.where(below | above, pullback, torque)


def apply_torque_safety(torque, position, velocity, config: SafetyConfig) -> np.ndarray:
    """Damping, then limit PD, then clip -- the torque-level tail of the chain."""
    out = velocity_damping(torque, velocity, config)
    out = position_limit_pd(out, position, velocity, config)
    return clip_torque(out, config)


def safety_chain(
    action: HandAction,
    observation: HandObservation,
    config: SafetyConfig,
    default_kp=None,
    default_kd=None,
) -> HandAction:
    """Full desired-to-applied transformation.

    The result is a pure-torque action: position feedback is already folded
    in, so the position fields are cleared.
    """
    kwargs = {}
    if default_kp is not None:
        kwargs["default_kp"] = default_kp
    if default_kd is not None:
        kwargs["default_kd"] = default_kd
    folded = effective_torque(action, observation, **kwargs)
    applied = apply_torque_safety(
        folded, observation.position, observation.velocity, config
    )
    return HandAction._trusted(applied)


def watchdog_expired(last_command_time, now: float, config: SafetyConfig) -> bool:
    """True when the gap since the last command strictly exceeds the timeout.

    Mirrors the motor-board side timeout: a crashed control computer must
    not leave torque on the motors.  ``last_command_time`` may be None
    (nothing commanded yet), which never trips the watchdog.
    """
    if last_command_time is None:
        return False
    return (now - last_command_time) > config.driver_timeout
