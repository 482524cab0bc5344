"""Indexed, history-bounded, blocking time-series buffer.

This is the storage primitive under every robot data channel: desired
actions, applied actions, observations and status records are all time
series.  Elements get consecutive integer time indices starting at 0, the
newest ``capacity`` elements are retained, and reading a future index blocks
until it is appended.

Semantics worth calling out:

* ``len(series)`` is the number of elements appended *ever* (so
  ``append`` returns ``len(series) - 1``), not the number retained.
* Reading an index that fell out of the ring raises
  :class:`~trimanip.errors.EvictedIndexError`; stale data is never returned.
* Exactly one writer is assumed; any number of readers may block
  concurrently.  Blocked readers wake on the append of the awaited index,
  never earlier, via a condition variable (no spinning).
"""

from __future__ import annotations

import threading
import time

from .clocks import MonotonicClock
from .errors import EvictedIndexError, ShutdownError, WaitTimeoutError

DEFAULT_CAPACITY = 10_000


class TimeSeries:
    def __init__(self, capacity: int = DEFAULT_CAPACITY, clock=None):
        if capacity < 1:
            raise ValueError("capacity must be a positive integer")
        self._capacity = int(capacity)
        self._clock = clock if clock is not None else MonotonicClock()
        self._values = [None] * self._capacity
        self._stamps = [0.0] * self._capacity
        self._next = 0  # index the next append receives
        self._cond = threading.Condition()
        self._closed = False
        self._close_reason = ""

    @property
    def capacity(self) -> int:
        return self._capacity

    def __len__(self) -> int:
        with self._cond:
            return self._next

    def newest_index(self) -> int | None:
        """Index of the last appended element, or None if empty."""
        with self._cond:
            return self._next - 1 if self._next > 0 else None

    def oldest_index(self) -> int | None:
        """Smallest index still retained, or None if empty."""
        with self._cond:
            if self._next == 0:
                return None
            return max(0, self._next - self._capacity)

    def append(self, value) -> int:
        with self._cond:
            if self._closed:
                raise ShutdownError(self._close_reason)
            t = self._next
            slot = t % self._capacity
            self._values[slot] = value
            self._stamps[slot] = self._clock.now()
            self._next = t + 1
            self._cond.notify_all()
            return t

    def get(self, t: int, timeout: float | None = None):
        """Element at index ``t``; blocks while ``t`` is in the future."""
        return self._read(t, timeout, stamp=False)

    def get_timestamp(self, t: int, timeout: float | None = None) -> float:
        """Clock reading taken when element ``t`` was appended."""
        return self._read(t, timeout, stamp=True)

    def newest(self):
        """Latest element; raises ShutdownError on an empty closed series."""
        with self._cond:
            if self._next == 0:
                if self._closed:
                    raise ShutdownError(self._close_reason)
                raise EvictedIndexError("series is empty")
            return self._values[(self._next - 1) % self._capacity]

    def close(self, reason: str = "series closed") -> None:
        """Stop the channel: wake all blocked readers, reject new appends.

        Elements already stored remain readable.
        """
        with self._cond:
            self._closed = True
            self._close_reason = reason
            self._cond.notify_all()

    @property
    def closed(self) -> bool:
        with self._cond:
            return self._closed

    def _read(self, t: int, timeout: float | None, stamp: bool):
        if t < 0:
            raise ValueError(f"time index must be non-negative, got {t}")
        deadline = None if timeout is None else time.monotonic() + timeout
        with self._cond:
            while t >= self._next:
                if self._closed:
                    raise ShutdownError(self._close_reason)
                if deadline is None:
                    self._cond.wait()
                else:
                    remaining = deadline - time.monotonic()
                    if remaining <= 0 or not self._cond.wait(remaining):
                        if t < self._next:  # appended during the final wait
                            break
                        raise WaitTimeoutError(
                            f"index {t} not appended within {timeout} s"
                        )
            oldest = self._next - self._capacity
            if t < oldest:
                raise EvictedIndexError(
                    f"index {t} was evicted (oldest retained is {oldest})"
                )
            slot = t % self._capacity
            return self._stamps[slot] if stamp else self._values[slot]
