"""Timestamped interaction streams: parsing and partitioning into time windows."""
from __future__ import annotations

import io
import logging
import re
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Iterable, Iterator, TextIO

log = logging.getLogger(__name__)

WEEK = 7 * 86400


class MalformedLine(ValueError):
    def __init__(self, line_no: int, line: str = "", reason: str = ""):
        self.line_no = line_no
        msg = f"line {line_no}: {reason or 'malformed'}"
        if line:
            msg += f": {line!r}"
        super().__init__(msg)


class EmptyInput(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class InteractionEvent:
    source: str
    target: str
    timestamp: int


@dataclass(frozen=True)
class WindowSpec:
    """How to cut an event stream into base windows and aggregate them.

    ``mode`` is ``duration`` (fixed seconds), ``count`` (fixed events) or
    ``month`` (UTC calendar months).
    """

    mode: str = "duration"
    duration: int | None = WEEK
    count: int | None = None
    slide_width: int = 1
    step: int = 1
    align: str = "origin"

    def __post_init__(self):
        if self.mode == "duration":
            if not self.duration or self.duration < 1 or self.count is not None:
                raise ValueError("duration mode needs duration >= 1 and no count")
        elif self.mode == "count":
            if not self.count or self.count < 1 or self.duration is not None:
                raise ValueError("count mode needs count >= 1 and no duration")
        elif self.mode == "month":
            if self.duration is not None or self.count is not None:
                raise ValueError("month mode takes neither duration nor count")
        else:
            raise ValueError(f"unknown window mode {self.mode!r}")
        if self.slide_width < 1 or self.step < 1:
            raise ValueError("slide_width and step must be >= 1")
        if self.align not in ("origin", "calendar"):
            raise ValueError(f"align must be 'origin' or 'calendar', got {self.align!r}")


@dataclass(frozen=True)
class Window:
    index: int
    start: int
    end: int  # exclusive
    events: tuple[InteractionEvent, ...] = field(repr=False)
    partial: bool = False

    @property
    def empty(self) -> bool:
        return not self.events

    def __repr__(self):
        flags = "".join([" empty" if self.empty else "", " partial" if self.partial else ""])
        return f"Window({self.index}, [{self.start}, {self.end}), {len(self.events)} events{flags})"


_SPLIT_WS = re.compile(r"\s+")


def _split(line: str, sep: str | None):
    if sep == ",":
        return [f.strip() for f in line.split(",")]
    return _SPLIT_WS.split(line.strip())


def iter_events(lines: Iterable[str], strict: bool = False, counter: dict | None = None) -> Iterator[InteractionEvent]:
    """Stream events from edge-list lines. See :func:`parse_events`."""
    sep = None
    sep_known = False
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not sep_known:
            sep = "," if "," in line else None
            sep_known = True
        fields = _split(line, sep)
        reason = None
        if len(fields) != 3:
            reason = f"expected 3 fields, got {len(fields)}"
        elif not fields[0] or not fields[1]:
            reason = "empty node identifier"
        else:
            try:
                ts = int(fields[2])
                if ts < 0:
                    reason = "negative timestamp"
            except ValueError:
                reason = "timestamp is not an integer"
        if reason:
            if strict:
                raise MalformedLine(line_no, line, reason)
            log.warning("skipping line %d (%s)", line_no, reason)
            if counter is not None:
                counter["skipped"] = counter.get("skipped", 0) + 1
            continue
        yield InteractionEvent(fields[0], fields[1], ts)


def parse_events(stream: str | TextIO | Iterable[str], strict: bool = False) -> list[InteractionEvent]:
    """Parse ``source<sep>target<sep>timestamp`` lines.

    The separator (comma or whitespace) is taken from the first data line;
    blank lines and ``#`` comments are ignored. In strict mode the first bad
    line raises :class:`MalformedLine`; otherwise bad lines are logged with
    their line number and skipped.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    counter: dict = {}
    events = list(iter_events(stream, strict=strict, counter=counter))
    if counter.get("skipped"):
        log.warning("skipped %d malformed line(s)", counter["skipped"])
    return events


# --- partitioning -----------------------------------------------------------

def _utc(ts: int) -> datetime:
    return datetime.fromtimestamp(ts, tz=timezone.utc)


def calendar_origin(t0: int, spec: WindowSpec) -> int:
    """Snap ``t0`` to the start of its UTC month, week or day.

    Month mode and durations of 28 days or more (other than whole weeks) snap
    to the month, whole-week durations to Monday, anything else to midnight.
    """
    day = _utc(t0).replace(hour=0, minute=0, second=0, microsecond=0)
    whole_weeks = spec.duration is not None and spec.duration % WEEK == 0
    if spec.mode == "month" or (not whole_weeks and (spec.duration or 0) >= 28 * 86400):
        return int(day.replace(day=1).timestamp())
    if whole_weeks:
        return int((day - timedelta(days=day.weekday())).timestamp())
    return int(day.timestamp())


def _next_month(ts: int) -> int:
    dt = _utc(ts)
    y, m = (dt.year + 1, 1) if dt.month == 12 else (dt.year, dt.month + 1)
    return int(datetime(y, m, 1, tzinfo=timezone.utc).timestamp())


def _sorted(events) -> list[InteractionEvent]:
    events = list(events)
    if any(a.timestamp > b.timestamp for a, b in zip(events, events[1:])):
        events = sorted(events, key=lambda e: e.timestamp)  # stable: ties keep input order
    return events


def iter_windows(events: Iterable[InteractionEvent], spec: WindowSpec,
                 origin: int | None = None) -> Iterator[Window]:
    """Yield base windows as soon as they close; the input must be time-ordered.

    A duration window closes when the first event at or past its end arrives;
    the window still open when the stream ends is yielded last, flagged
    partial. Events earlier than the open window are logged and dropped.
    """
    it = iter(events)
    if spec.mode == "count":
        block: list[InteractionEvent] = []
        k = 0
        for ev in it:
            block.append(ev)
            if len(block) == spec.count:
                yield Window(k, block[0].timestamp, block[-1].timestamp + 1, tuple(block))
                block, k = [], k + 1
        if block:
            yield Window(k, block[0].timestamp, block[-1].timestamp + 1, tuple(block), partial=True)
        return

    first = next(it, None)
    if first is None:
        return
    t0 = origin if origin is not None else first.timestamp
    if origin is None and (spec.align == "calendar" or spec.mode == "month"):
        t0 = calendar_origin(t0, spec)
    if first.timestamp < t0:
        raise ValueError(f"origin {t0} lies after the first event at {first.timestamp}")

    def advance(start: int) -> int:
        return _next_month(start) if spec.mode == "month" else start + spec.duration

    k = 0
    start, end = t0, advance(t0)
    bucket: list[InteractionEvent] = []
    for ev in _chain(first, it):
        if ev.timestamp < start:
            log.warning("dropping late event at %d (window %d starts at %d)", ev.timestamp, k, start)
            continue
        while ev.timestamp >= end:
            if not bucket:
                log.info("window %d [%d, %d) is empty", k, start, end)
            yield Window(k, start, end, tuple(bucket))
            bucket, k = [], k + 1
            start, end = end, advance(end)
        bucket.append(ev)
    yield Window(k, start, end, tuple(bucket), partial=True)


def _chain(first, rest):
    yield first
    yield from rest


def partition(events: Iterable[InteractionEvent], spec: WindowSpec, origin: int | None = None) -> list[Window]:
    """Cut a stream into contiguous base windows.

    Duration windows start at the first event's timestamp (or its calendar
    week/month/day with ``align="calendar"``, or an explicit ``origin``); empty
    windows inside the range are emitted and the trailing window is flagged
    partial. Count windows are consecutive blocks of ``count`` events, the last
    possibly shorter. Unsorted input is sorted (stably) first.
    """
    events = _sorted(events)
    if not events:
        raise EmptyInput("no events to partition")
    return list(iter_windows(events, spec, origin))


def iter_aggregate(windows: Iterable[Window], slide_width: int = 1, step: int = 1) -> Iterator[Window]:
    """Streaming form of :func:`aggregate`."""
    if slide_width < 1 or step < 1:
        raise ValueError("slide_width and step must be >= 1")
    if slide_width == 1 and step == 1:
        yield from windows
        return
    buf: list[Window] = []
    offset = 0  # base index of buf[0]
    j = 0
    for w in windows:
        buf.append(w)
        lo = j * step - offset
        if lo + slide_width <= len(buf):
            group = buf[lo:lo + slide_width]
            evs = tuple(e for g in group for e in g.events)
            yield Window(j, group[0].start, group[-1].end, evs, partial=group[-1].partial)
            j += 1
            drop = min(j * step - offset, len(buf))
            buf = buf[drop:]
            offset += drop


def aggregate(windows: list[Window], slide_width: int = 1, step: int = 1) -> list[Window]:
    """Analysis window j is the union of base windows [j*step, j*step + slide_width).

    Trailing base windows that cannot fill a whole analysis window are dropped.
    """
    if slide_width > len(windows):
        raise ValueError(f"slide_width {slide_width} exceeds the {len(windows)} base windows")
    return list(iter_aggregate(windows, slide_width, step))


def windows_for(events: Iterable[InteractionEvent], spec: WindowSpec, origin: int | None = None) -> list[Window]:
    """Partition then aggregate, as configured by ``spec``."""
    return aggregate(partition(events, spec, origin), spec.slide_width, spec.step)
