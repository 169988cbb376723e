"""Event data model: validated streams of (x, y, t, p) sensor events.

Timestamps are integer microseconds. Polarity is +1 or -1. Streams are
immutable structure-of-arrays containers sorted by timestamp (stable
order for ties) and are safe to share across threads for reading.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple

import numpy as np

HEADER = "t_us,x,y,p"


class EventError(ValueError):
    """Base class for event-stream validation errors."""


class MalformedRow(EventError):
    def __init__(self, line_no: int, detail: str):
        super().__init__(f"line {line_no}: malformed row ({detail})")
        self.line_no = line_no


class OutOfBounds(EventError):
    def __init__(self, line_no: int, detail: str):
        super().__init__(f"line {line_no}: coordinate out of bounds ({detail})")
        self.line_no = line_no


class BadPolarity(EventError):
    def __init__(self, line_no: int, detail: str):
        super().__init__(f"line {line_no}: polarity must be 1 or -1 ({detail})")
        self.line_no = line_no


class InvalidRange(EventError):
    """Raised when a time interval has t0 > t1."""


class Event(NamedTuple):
    x: int
    y: int
    t: int
    p: int


@dataclass(frozen=True)
class EventStream:
    """Immutable, time-sorted stream of events on a width x height sensor."""

    width: int
    height: int
    x: np.ndarray  # int32, column index
    y: np.ndarray  # int32, row index
    t: np.ndarray  # int64, microseconds
    p: np.ndarray  # int8, +1 / -1

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise EventError(f"bad geometry {self.width}x{self.height}")
        n = len(self.t)
        if not (len(self.x) == len(self.y) == len(self.p) == n):
            raise EventError("field arrays must have equal length")
        if n:
            if self.t.min() < 0:
                raise EventError("negative timestamp")
            if np.any(np.diff(self.t) < 0):
                raise EventError("timestamps must be non-decreasing")
            if np.any((self.x < 0) | (self.x >= self.width)):
                raise EventError("x out of bounds")
            if np.any((self.y < 0) | (self.y >= self.height)):
                raise EventError("y out of bounds")
            if np.any(np.abs(self.p) != 1):
                raise EventError("polarity must be +1 or -1")
        for a in (self.x, self.y, self.t, self.p):
            a.flags.writeable = False

    @classmethod
    def from_arrays(cls, width, height, x, y, t, p, sort=True) -> "EventStream":
        x = np.asarray(x, dtype=np.int32)
        y = np.asarray(y, dtype=np.int32)
        t = np.asarray(t, dtype=np.int64)
        p = np.asarray(p, dtype=np.int8)
        if sort and len(t) and np.any(np.diff(t) < 0):
            order = np.argsort(t, kind="stable")
            x, y, t, p = x[order], y[order], t[order], p[order]
        return cls(width, height, x.copy(), y.copy(), t.copy(), p.copy())

    @classmethod
    def from_events(cls, width, height, events: Iterable[Event]) -> "EventStream":
        ev = list(events)
        if not ev:
            return cls.empty(width, height)
        x, y, t, p = zip(*((e.x, e.y, e.t, e.p) for e in ev))
        return cls.from_arrays(width, height, x, y, t, p)

    @classmethod
    def empty(cls, width, height) -> "EventStream":
        z = np.zeros(0)
        return cls(width, height, z.astype(np.int32), z.astype(np.int32),
                   z.astype(np.int64), z.astype(np.int8))

    def __len__(self) -> int:
        return len(self.t)

    def __getitem__(self, i: int) -> Event:
        return Event(int(self.x[i]), int(self.y[i]), int(self.t[i]), int(self.p[i]))

    def __iter__(self) -> Iterator[Event]:
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, EventStream):
            return NotImplemented
        return (self.width == other.width and self.height == other.height
                and np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y)
                and np.array_equal(self.t, other.t) and np.array_equal(self.p, other.p))


def _parse_row(line: str, line_no: int, width: int, height: int):
    parts = line.split(",")
    if len(parts) != 4:
        raise MalformedRow(line_no, f"expected 4 fields, got {len(parts)}")
    try:
        t, x, y, p = (int(s) for s in parts)
    except ValueError:
        raise MalformedRow(line_no, f"non-integer field in {line!r}") from None
    if t < 0:
        raise MalformedRow(line_no, f"negative timestamp {t}")
    if not (0 <= x < width and 0 <= y < height):
        raise OutOfBounds(line_no, f"({x},{y}) on {width}x{height} sensor")
    if p not in (1, -1):
        raise BadPolarity(line_no, f"got {p}")
    return t, x, y, p


def _parse(text: str, width: int, height: int, lenient: bool):
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0].strip() != HEADER:
        raise MalformedRow(1, f"missing header {HEADER!r}")
    ts, xs, ys, ps = [], [], [], []
    issues: list[EventError] = []
    for i, line in enumerate(lines[1:], start=2):
        try:
            t, x, y, p = _parse_row(line.strip(), i, width, height)
        except EventError as err:
            if not lenient:
                raise
            issues.append(err)
            continue
        ts.append(t)
        xs.append(x)
        ys.append(y)
        ps.append(p)
    stream = EventStream.from_arrays(width, height, xs, ys, ts, ps)
    return stream, issues


def parse_event_csv(text: str, width: int, height: int) -> EventStream:
    """Parse the event CSV format (header `t_us,x,y,p`); strict validation.

    Rows out of time order are stably sorted; already-sorted input keeps
    its row order, including ties.
    """
    stream, _ = _parse(text, width, height, lenient=False)
    return stream


def parse_event_csv_lenient(text: str, width: int, height: int):
    """Like parse_event_csv but skips bad rows, returning (stream, issues).

    Every input row is accounted for: len(stream) + len(issues) equals the
    number of data rows.
    """
    return _parse(text, width, height, lenient=True)


def write_event_csv(stream: EventStream) -> str:
    """Serialize a stream; parse_event_csv(write_event_csv(s)) == s."""
    rows = [HEADER]
    rows.extend(f"{t},{x},{y},{p}" for t, x, y, p
                in zip(stream.t.tolist(), stream.x.tolist(),
                       stream.y.tolist(), stream.p.tolist()))
    return "\n".join(rows) + "\n"


def slice_time(stream: EventStream, t0: int, t1: int) -> EventStream:
    """Events with t0 <= t < t1 (half-open); geometry preserved."""
    if t0 > t1:
        raise InvalidRange(f"t0={t0} > t1={t1}")
    lo = int(np.searchsorted(stream.t, t0, side="left"))
    hi = int(np.searchsorted(stream.t, t1, side="left"))
    return EventStream(stream.width, stream.height,
                       stream.x[lo:hi].copy(), stream.y[lo:hi].copy(),
                       stream.t[lo:hi].copy(), stream.p[lo:hi].copy())
