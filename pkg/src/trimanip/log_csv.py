"""CSV logging of synchronized robot data, and its exact inverse.

One row per completed cycle: ``t, timestamp, <action fields>,
<applied fields>, <observation fields>, status``.  Floats are written with
17 significant digits so that reading the file back reproduces every value
bit for bit.  The timestamp column is the observation's append time.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .errors import EvictedIndexError
from .hand import HandAction, HandObservation
from .robot import RobotData, Status, StatusRecord

_FLOAT_FORMAT = "{:.17g}"


def _format(value) -> str:
    return "" if value is None else _FLOAT_FORMAT.format(float(value))


def _parse(text: str):
    return None if text == "" else float(text)


def _status_to_field(record: StatusRecord) -> str:
    if record.message:
        return f"{record.state.value}:{record.message}"
    return record.state.value


def _status_from_field(text: str) -> StatusRecord:
    state, _, message = text.partition(":")
    return StatusRecord(Status(state), message)


@dataclass(frozen=True)
class LogRecord:
    t: int
    timestamp: float
    desired_action: HandAction
    applied_action: HandAction
    observation: HandObservation
    status: StatusRecord


def log_header(action_type=HandAction, observation_type=HandObservation) -> list[str]:
    header = ["t", "timestamp"]
    header += [f"action_{name}" for name in action_type.field_names()]
    header += [f"applied_{name}" for name in action_type.field_names()]
    header += [f"obs_{name}" for name in observation_type.field_names()]
    header.append("status")
    return header


def write_log(
    data: RobotData,
    path,
    start: int = 0,
    stop: int | None = None,
    action_type=HandAction,
    observation_type=HandObservation,
) -> int:
    """Write cycles ``start <= t < stop`` to ``path``; returns the row count.

    ``stop`` defaults to the number of completed cycles.  Requesting indices
    that were already evicted raises EvictedIndexError.
    """
    if stop is None:
        stop = data.completed_cycles()
    if start < 0 or stop < start:
        raise ValueError(f"invalid range [{start}, {stop})")
    if stop > start:
        for series in (data.desired_actions, data.applied_actions, data.observations, data.status):
            oldest = series.oldest_index()
            if oldest is None or oldest > start:
                raise EvictedIndexError(
                    f"range start {start} is no longer retained (oldest: {oldest})"
                )
            if stop > len(series):
                raise ValueError(f"range stop {stop} exceeds completed cycles")

    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(log_header(action_type, observation_type))
        for t in range(start, stop):
            row = [str(t), _format(data.observations.get_timestamp(t))]
            row += [_format(v) for v in data.desired_actions.get(t).to_fields()]
            row += [_format(v) for v in data.applied_actions.get(t).to_fields()]
            row += [_format(v) for v in data.observations.get(t).to_fields()]
            row.append(_status_to_field(data.status.get(t)))
            writer.writerow(row)
    return stop - start


def read_log(
    path, action_type=HandAction, observation_type=HandObservation
) -> list[LogRecord]:
    """Parse a file written by :func:`write_log` back into records."""
    expected_header = log_header(action_type, observation_type)
    n_action = len(action_type.field_names())
    n_obs = len(observation_type.field_names())
    records = []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader)
        if header != expected_header:
            raise ValueError("unrecognized log header")
        for row in reader:
            if len(row) != len(expected_header):
                raise ValueError(f"malformed row of length {len(row)}")
            cursor = 2
            desired = action_type.from_fields([_parse(v) for v in row[cursor : cursor + n_action]])
            cursor += n_action
            applied = action_type.from_fields([_parse(v) for v in row[cursor : cursor + n_action]])
            cursor += n_action
            observation = observation_type.from_fields(
                [_parse(v) for v in row[cursor : cursor + n_obs]]
            )
            cursor += n_obs
            records.append(
                LogRecord(
                    t=int(row[0]),
                    timestamp=float(row[1]),
                    desired_action=desired,
                    applied_action=applied,
                    observation=observation,
                    status=_status_from_field(row[cursor]),
                )
            )
    return records
