"""Wall clock and simulated clock behind one small interface.

Everything that needs time (time-series timestamps, back-end deadlines, the
driver watchdog) takes a clock object so tests run deterministically on
simulated time.

A clock provides:

* ``now()``          -- current time in seconds.
* ``sleep_until(t)`` -- return once the clock reads at least ``t``.
* ``wait_budget(deadline)`` -- how many *real* seconds a caller may block on
  a condition variable before treating ``deadline`` as missed.
"""

from __future__ import annotations

import threading
import time


class MonotonicClock:
    """Real time from ``time.monotonic``."""

    def now(self) -> float:
        return time.monotonic()

    def sleep_until(self, t: float) -> None:
        remaining = t - time.monotonic()
        if remaining > 0:
            time.sleep(remaining)

    def wait_budget(self, deadline: float) -> float:
        return max(0.0, deadline - time.monotonic())


class SimulatedClock:
    """Virtual time that advances only through ``sleep_until``.

    The back-end is the only component that sleeps, so it is the component
    that drives simulated time forward.  Blocking reads do not consult the
    clock at all; they wait on condition variables.  ``wait_budget`` is a
    fixed real-time patience: how long the back-end waits for the user's
    next action before a simulated deadline counts as missed.  Tests set it
    large to make deadline misses impossible and small to provoke them.
    """

    def __init__(self, start: float = 0.0, patience: float = 0.05):
        self._now = float(start)
        self._lock = threading.Lock()
        self.patience = float(patience)

    def now(self) -> float:
        with self._lock:
            return self._now

    def sleep_until(self, t: float) -> None:
        with self._lock:
            if t > self._now:
                self._now = t

    def advance(self, dt: float) -> None:
        if dt < 0:
            raise ValueError("cannot move a monotonic clock backwards")
        with self._lock:
            self._now += dt

    def wait_budget(self, deadline: float) -> float:
        return self.patience
