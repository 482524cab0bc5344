"""Action and observation types for the simulated three-finger robot.

The robot has three fingers with three joints each; all joint vectors are
length 9 in finger-major order (finger 0 joints 0-2, finger 1 joints 0-2,
finger 2 joints 0-2).  That ordering is fixed so CSV logs are bit-stable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

NUM_FINGERS = 3
JOINTS_PER_FINGER = 3
NUM_JOINTS = NUM_FINGERS * JOINTS_PER_FINGER

# Per-joint gains used when an action carries a position target without
# explicit gains.  Not hardware-identified values: chosen to be stable for
# the simulated joints at a 1 ms control period, and overridable per action
# or per driver.
DEFAULT_POSITION_KP = 3.0
DEFAULT_POSITION_KD = 0.05


def _joint_vector(value, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.shape != (NUM_JOINTS,):
        raise ValueError(f"{name} must have shape ({NUM_JOINTS},), got {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} must be finite")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


def _optional_joint_vector(value, name: str) -> np.ndarray | None:
    return None if value is None else _joint_vector(value, name)


def _eq_optional(a, b) -> bool:
    if a is None or b is None:
        return a is None and b is None
    return bool(np.array_equal(a, b))


@dataclass(frozen=True, eq=False)
class HandAction:
    """Torque command for all nine joints, optionally with a position target.

    When ``position`` is present the driver adds PD feedback on top of the
    torque; gains left as None fall back to the driver's defaults.
    """

    torque: np.ndarray = field(default_factory=lambda: np.zeros(NUM_JOINTS))
    position: np.ndarray | None = None
    position_kp: np.ndarray | None = None
    position_kd: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "torque", _joint_vector(self.torque, "torque"))
        object.__setattr__(
            self, "position", _optional_joint_vector(self.position, "position")
        )
        object.__setattr__(
            self, "position_kp", _optional_joint_vector(self.position_kp, "position_kp")
        )
        object.__setattr__(
            self, "position_kd", _optional_joint_vector(self.position_kd, "position_kd")
        )

    def __eq__(self, other):
        if not isinstance(other, HandAction):
            return NotImplemented
        return (
            np.array_equal(self.torque, other.torque)
            and _eq_optional(self.position, other.position)
            and _eq_optional(self.position_kp, other.position_kp)
            and _eq_optional(self.position_kd, other.position_kd)
        )

    @classmethod
    def zero(cls) -> "HandAction":
        return cls(torque=np.zeros(NUM_JOINTS))

    @classmethod
    def _trusted(cls, torque) -> "HandAction":
        # hot-path constructor for arrays the caller already owns and
        # validated (fresh float64 (9,) results of safety/dynamics math)
        self = object.__new__(cls)
        torque.setflags(write=False)
        object.__setattr__(self, "torque", torque)
        object.__setattr__(self, "position", None)
        object.__setattr__(self, "position_kp", None)
        object.__setattr__(self, "position_kd", None)
        return self

    @classmethod
    def hold_position(cls, position, kp=None, kd=None) -> "HandAction":
        return cls(
            torque=np.zeros(NUM_JOINTS),
            position=position,
            position_kp=kp,
            position_kd=kd,
        )

    # -- flat-field protocol used by the CSV logger ------------------------
    @staticmethod
    def field_names() -> list[str]:
        names = [f"torque_{i}" for i in range(NUM_JOINTS)]
        names += [f"position_{i}" for i in range(NUM_JOINTS)]
        names += [f"kp_{i}" for i in range(NUM_JOINTS)]
        names += [f"kd_{i}" for i in range(NUM_JOINTS)]
        return names

    def to_fields(self) -> list[float | None]:
        out: list[float | None] = list(self.torque)
        for part in (self.position, self.position_kp, self.position_kd):
            out += [None] * NUM_JOINTS if part is None else list(part)
        return out

    @classmethod
    def from_fields(cls, values) -> "HandAction":
        n = NUM_JOINTS
        if len(values) != 4 * n:
            raise ValueError(f"expected {4 * n} fields, got {len(values)}")

        def block(i):
            chunk = values[i * n : (i + 1) * n]
            if all(v is None for v in chunk):
                return None
            if any(v is None for v in chunk):
                raise ValueError("partially empty joint-vector field block")
            return np.array(chunk, dtype=float)

        torque = block(0)
        if torque is None:
            raise ValueError("torque block must always be present")
        return cls(
            torque=torque,
            position=block(1),
            position_kp=block(2),
            position_kd=block(3),
        )


@dataclass(frozen=True, eq=False)
class HandObservation:
    """Proprioceptive snapshot: joint position, velocity and torque."""

    position: np.ndarray
    velocity: np.ndarray
    torque: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", _joint_vector(self.position, "position"))
        object.__setattr__(self, "velocity", _joint_vector(self.velocity, "velocity"))
        object.__setattr__(self, "torque", _joint_vector(self.torque, "torque"))

    def __eq__(self, other):
        if not isinstance(other, HandObservation):
            return NotImplemented
        return (
            np.array_equal(self.position, other.position)
            and np.array_equal(self.velocity, other.velocity)
            and np.array_equal(self.torque, other.torque)
        )

    @classmethod
    def zero(cls) -> "HandObservation":
        z = np.zeros(NUM_JOINTS)
        return cls(position=z, velocity=z.copy(), torque=z.copy())

    @classmethod
    def _trusted(cls, position, velocity, torque) -> "HandObservation":
        # hot-path constructor; arrays must be fresh float64 (9,) copies
        self = object.__new__(cls)
        for name, arr in (("position", position), ("velocity", velocity), ("torque", torque)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        return self

    @staticmethod
    def field_names() -> list[str]:
        names = [f"position_{i}" for i in range(NUM_JOINTS)]
        names += [f"velocity_{i}" for i in range(NUM_JOINTS)]
        names += [f"torque_{i}" for i in range(NUM_JOINTS)]
        return names

    def to_fields(self) -> list[float | None]:
        return list(self.position) + list(self.velocity) + list(self.torque)

    @classmethod
    def from_fields(cls, values) -> "HandObservation":
        n = NUM_JOINTS
        if len(values) != 3 * n:
            raise ValueError(f"expected {3 * n} fields, got {len(values)}")
        if any(v is None for v in values):
            raise ValueError("observation fields cannot be empty")
        arr = np.array(values, dtype=float)
        return cls(position=arr[:n], velocity=arr[n : 2 * n], torque=arr[2 * n :])


@dataclass(frozen=True)
class CameraFrame:
    """Typed stub for the camera channel; image handling is out of scope.

    Camera frames arrive on a separate interface from the 1 kHz channel
    because of their lower rate; only the envelope is modeled.
    """

    camera_id: int
    timestamp: float
    payload: bytes = b""

    def __post_init__(self):
        if not 0 <= self.camera_id < NUM_FINGERS:
            raise ValueError(f"camera_id must be in 0..2, got {self.camera_id}")


def effective_torque(
    action: HandAction,
    observation: HandObservation,
    default_kp: float | np.ndarray = DEFAULT_POSITION_KP,
    default_kd: float | np.ndarray = DEFAULT_POSITION_KD,
) -> np.ndarray:
    """Torque the motors are asked for once PD position feedback is folded in.

    Without a position target this is just ``action.torque``; with one it is
    ``torque + kp * (target - q) - kd * qdot``.
    """
    if action.position is None:
        return action.torque  # already read-only
    kp = action.position_kp if action.position_kp is not None else default_kp
    kd = action.position_kd if action.position_kd is not None else default_kd
    return (
        action.torque
        + kp * (action.position - observation.position)
        - kd * observation.velocity
    )
