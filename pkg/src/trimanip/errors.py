"""Error types shared by the robot data channels and the front-end."""


class TimeSeriesError(Exception):
    """Base class for time-series access errors."""


class EvictedIndexError(TimeSeriesError, IndexError):
    """The requested index was pushed out of the ring buffer.

    Raised instead of silently returning stale data; a control loop that
    reads history it cannot have must fail loudly.
    """


class WaitTimeoutError(TimeSeriesError, TimeoutError):
    """A blocking read timed out before the element was appended."""


class ShutdownError(TimeSeriesError, RuntimeError):
    """The channel was closed by its producer (e.g. back-end shutdown).

    Blocked readers are released with this error rather than hanging, and
    further appends are rejected with it.
    """


class ConfigError(Exception):
    """Invalid or unknown configuration content."""
