"""Front-end/back-end pair around shared robot data.

The user talks to a :class:`Frontend`: append desired actions, read the
synchronized histories of desired actions, applied actions and
observations.  A :class:`Backend` thread consumes desired actions, passes
them to a driver and fills in the applied-action and observation series.
The two sides communicate exclusively through :class:`RobotData`.

Per completed cycle ``t`` the back-end

1. obtains the desired action ``a_t`` (waiting per the configured mode),
2. in real-time mode sleeps until the cycle instant ``t * delta``,
3. appends the observation ``y_t`` (state *before* the action takes effect),
4. calls ``driver.apply_action`` and appends the applied action ``a'_t``,
5. appends a status record.

An observation is therefore never exposed before the cycle's action has been
consumed (or repeated).  The first ``append_desired_action`` marks time zero;
until then the back-end idles.

Real-time mode treats a late action as a fault: depending on the policy the
back-end either repeats the previous applied action (recording an
``action_repeated`` status and filling the desired series on the user's
behalf, so per-cycle rows stay aligned) or counts consecutive misses and
shuts down once they exceed ``max_missed_actions``.
"""

from __future__ import annotations

import enum
import threading
from dataclasses import dataclass
from typing import Protocol

from .clocks import MonotonicClock
from .errors import ShutdownError, WaitTimeoutError
from .timeseries import DEFAULT_CAPACITY, TimeSeries


class Status(enum.Enum):
    OK = "ok"
    ACTION_REPEATED = "action_repeated"
    SHUTDOWN = "shutdown"


@dataclass(frozen=True)
class StatusRecord:
    state: Status
    message: str = ""


class Mode(enum.Enum):
    REAL_TIME = "real_time"
    NON_REAL_TIME = "non_real_time"


class LateActionPolicy(enum.Enum):
    SHUTDOWN = "shutdown"
    REPEAT_PREVIOUS = "repeat_previous"


@dataclass(frozen=True)
class BackendConfig:
    mode: Mode = Mode.NON_REAL_TIME
    delta: float = 0.001  # control period in real-time mode
    max_missed_actions: int = 10
    late_action_policy: LateActionPolicy = LateActionPolicy.SHUTDOWN

    def __post_init__(self):
        if self.mode is Mode.REAL_TIME and self.delta <= 0:
            raise ValueError("delta must be positive in real-time mode")
        if self.max_missed_actions < 0:
            raise ValueError("max_missed_actions must be non-negative")


class RobotDriver(Protocol):
    """What the back-end needs from a robot (or simulator) driver.

    ``apply_action`` may modify the action (safety checks) and returns what
    was actually applied.  Drivers may additionally expose
    ``get_error() -> str | None``; a non-None value makes the back-end shut
    down with that message.
    """

    def get_latest_observation(self): ...

    def apply_action(self, action): ...


class RobotData:
    """The four shared time series: a, a', y and status."""

    def __init__(self, capacity: int = DEFAULT_CAPACITY, clock=None):
        self.clock = clock if clock is not None else MonotonicClock()
        self.desired_actions = TimeSeries(capacity, self.clock)
        self.applied_actions = TimeSeries(capacity, self.clock)
        self.observations = TimeSeries(capacity, self.clock)
        self.status = TimeSeries(capacity, self.clock)

    def completed_cycles(self) -> int:
        return min(
            len(self.desired_actions),
            len(self.applied_actions),
            len(self.observations),
            len(self.status),
        )

    def close_all(self, reason: str) -> None:
        for series in (
            self.desired_actions,
            self.applied_actions,
            self.observations,
            self.status,
        ):
            series.close(reason)


class Frontend:
    """User-side view of the robot: append actions, read histories."""

    def __init__(self, data: RobotData):
        self._data = data

    def append_desired_action(self, action) -> int:
        """Queue an action; returns its time index.

        The first call marks time zero and starts back-end consumption.
        """
        status = self._data.status
        newest = status.newest_index()
        if newest is not None and status.get(newest).state is Status.SHUTDOWN:
            raise ShutdownError("backend has shut down; cannot append actions")
        return self._data.desired_actions.append(action)

    def get_observation(self, t: int, timeout: float | None = None):
        """Observation of cycle ``t``; blocks while it is in the future."""
        return self._data.observations.get(t, timeout)

    def get_desired_action(self, t: int, timeout: float | None = None):
        return self._data.desired_actions.get(t, timeout)

    def get_applied_action(self, t: int, timeout: float | None = None):
        return self._data.applied_actions.get(t, timeout)

    def get_status(self, t: int, timeout: float | None = None) -> StatusRecord:
        return self._data.status.get(t, timeout)

    def get_observation_timestamp(self, t: int, timeout: float | None = None) -> float:
        return self._data.observations.get_timestamp(t, timeout)

    def latest_time_index(self) -> int | None:
        return self._data.observations.newest_index()


class _Stop(Exception):
    """Internal: backend stop requested."""


class _Fault(Exception):
    """Internal: shut down with this message."""


class Backend:
    """Runs the control cycle in its own thread until shutdown.

    The backend is the single writer of a', y and status; it also appends to
    the desired series when repeating a late action (the series' lock keeps
    that safe against a concurrently resuming user).
    """

    def __init__(self, driver: RobotDriver, data: RobotData, config: BackendConfig | None = None):
        self.driver = driver
        self.data = data
        self.config = config if config is not None else BackendConfig()
        self._stop_requested = threading.Event()
        self._thread: threading.Thread | None = None

    # -- lifecycle ----------------------------------------------------------
    def start(self) -> "Backend":
        if self._thread is not None:
            raise RuntimeError("backend already started")
        self._thread = threading.Thread(target=self._run, name="robot-backend", daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        """Request shutdown; blocked front-end readers are released."""
        self._stop_requested.set()
        # wake the loop if it is blocked waiting for the next desired action
        self.data.desired_actions.close("backend stopping")

    def join(self, timeout: float | None = None) -> None:
        if self._thread is not None:
            self._thread.join(timeout)

    @property
    def running(self) -> bool:
        return self._thread is not None and self._thread.is_alive()

    # -- main loop ----------------------------------------------------------
    def _run(self) -> None:
        data = self.data
        clock = data.clock
        cfg = self.config
        real_time = cfg.mode is Mode.REAL_TIME
        try:
            self._wait_interruptible(0)  # first append marks time zero
            time_zero = clock.now()
            previous_applied = None
            t = 0
            while True:
                if self._stop_requested.is_set():
                    raise _Stop()
                deadline = time_zero + t * cfg.delta
                if real_time:
                    action, repeated = self._acquire_real_time(
                        t, deadline, previous_applied
                    )
                    clock.sleep_until(deadline)
                else:
                    action, repeated = self._wait_interruptible(t), False

                try:
                    observation = self.driver.get_latest_observation()
                    data.observations.append(observation)
                    applied = self.driver.apply_action(action)
                except _Stop:
                    raise
                except Exception as exc:  # driver fault
                    raise _Fault(f"driver fault: {exc!r}") from exc
                data.applied_actions.append(applied)

                error = getattr(self.driver, "get_error", lambda: None)()
                if error is not None:
                    raise _Fault(error)

                data.status.append(
                    StatusRecord(Status.ACTION_REPEATED if repeated else Status.OK)
                )
                previous_applied = applied
                t += 1
        except _Stop:
            self._shutdown("backend stopped")
        except _Fault as fault:
            self._shutdown(str(fault))
        except ShutdownError as exc:
            if self._stop_requested.is_set():
                self._shutdown("backend stopped")
            else:
                self._shutdown(f"backend error: {exc!r}")
        except Exception as exc:  # never die silently
            self._shutdown(f"backend error: {exc!r}")

    def _shutdown(self, message: str) -> None:
        try:
            self.data.status.append(StatusRecord(Status.SHUTDOWN, message))
        except ShutdownError:
            pass
        self.data.close_all(f"backend shut down: {message}")

    # -- action acquisition ---------------------------------------------------
    def _wait_interruptible(self, t: int):
        """Block for desired action ``t``; stop() closes the series and
        releases this wait with ShutdownError."""
        if self._stop_requested.is_set():
            raise _Stop()
        return self.data.desired_actions.get(t)

    def _acquire_real_time(self, t: int, deadline: float, previous_applied):
        """Desired action ``t`` or the late-action fallback.

        Each expired wait budget counts as one missed cycle.  Under the
        repeat policy the previous applied action substitutes immediately
        and is also recorded in the desired series so cycle rows stay
        aligned; under the shutdown policy misses accumulate until the
        threshold trips.
        """
        cfg = self.config
        clock = self.data.clock
        missed = 0
        while True:
            if self._stop_requested.is_set():
                raise _Stop()
            budget = clock.wait_budget(deadline + missed * cfg.delta)
            try:
                return self.data.desired_actions.get(t, timeout=budget), False
            except WaitTimeoutError:
                if cfg.late_action_policy is LateActionPolicy.REPEAT_PREVIOUS:
                    if previous_applied is None:
                        raise _Fault("no previous action available to repeat")
                    self.data.desired_actions.append(previous_applied)
                    return previous_applied, True
                missed += 1
                if missed > cfg.max_missed_actions:
                    raise _Fault(
                        f"missed {missed} consecutive actions "
                        f"(limit {cfg.max_missed_actions}); shutting down"
                    )
