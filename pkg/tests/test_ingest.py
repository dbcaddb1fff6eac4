import logging

import pytest

from netcpd.ingest import (EmptyInput, InteractionEvent, MalformedLine, WindowSpec, aggregate, calendar_origin,
                           iter_aggregate, iter_windows, parse_events, partition, windows_for)

WEEK = 604800


def ev(*ts):
    return [InteractionEvent("a", "b", t) for t in ts]


def test_parse_whitespace():
    assert parse_events("a b 100\nb c 110") == [InteractionEvent("a", "b", 100), InteractionEvent("b", "c", 110)]


def test_parse_comma_autodetect():
    assert parse_events("a,b,100") == [InteractionEvent("a", "b", 100)]


def test_parse_strict_missing_field():
    with pytest.raises(MalformedLine) as exc:
        parse_events("a b", strict=True)
    assert exc.value.line_no == 1


def test_parse_lenient_skips_and_logs(caplog):
    with caplog.at_level(logging.WARNING):
        out = parse_events("# header\na b 1\n\nbad line\nc d -4\ne f 2\n")
    assert [e.timestamp for e in out] == [1, 2]
    assert "line 4" in caplog.text and "line 5" in caplog.text


def test_parse_tabs_and_multiple_spaces():
    assert parse_events("a\tb   7\n") == [InteractionEvent("a", "b", 7)]


def test_week_boundary():
    ws = partition(ev(0, 5, 10, WEEK), WindowSpec(duration=WEEK))
    assert [[e.timestamp for e in w.events] for w in ws] == [[0, 5, 10], [WEEK]]
    assert ws[0].end == ws[1].start == WEEK
    assert ws[-1].partial and not ws[0].partial


def test_gap_gives_empty_window():
    ws = partition(ev(0, 2 * WEEK), WindowSpec(duration=WEEK))
    assert len(ws) == 3
    assert ws[1].empty and not ws[0].empty and not ws[2].empty


def test_count_blocks():
    ws = partition(ev(*range(10)), WindowSpec("count", None, 4))
    assert [len(w.events) for w in ws] == [4, 4, 2]
    assert ws[-1].partial


def test_unsorted_input_sorted_stably():
    events = [InteractionEvent("x", "y", 5), InteractionEvent("a", "b", 1), InteractionEvent("c", "d", 5)]
    ws = partition(events, WindowSpec(duration=100))
    assert [e.source for e in ws[0].events] == ["a", "x", "c"]


def test_partition_empty_raises():
    with pytest.raises(EmptyInput):
        partition([], WindowSpec())


def test_calendar_alignment_week_starts_monday():
    # 2021-01-06 is a Wednesday; the aligned week begins Monday 2021-01-04 00:00 UTC
    ws = partition(ev(1609934400), WindowSpec(duration=WEEK, align="calendar"))
    assert ws[0].start == 1609718400


def test_month_windows():
    jan, feb, mar = 1609459200, 1612137600, 1614556800
    ws = partition(ev(jan + 10, feb + 5, mar + 1), WindowSpec("month", None))
    assert [(w.start, w.end) for w in ws] == [(jan, feb), (feb, mar), (mar, 1617235200)]
    assert calendar_origin(jan + 99999, WindowSpec("month", None)) == jan


def test_explicit_origin():
    ws = partition(ev(15, 25), WindowSpec(duration=10), origin=10)
    assert [(w.start, w.end, len(w.events)) for w in ws] == [(10, 20, 1), (20, 30, 1)]


def test_spec_validation():
    with pytest.raises(ValueError):
        WindowSpec(duration=0)
    with pytest.raises(ValueError):
        WindowSpec("count", None, None)
    with pytest.raises(ValueError):
        WindowSpec(slide_width=0)
    with pytest.raises(ValueError):
        WindowSpec(align="sideways")


def _base(k):
    return partition(ev(*range(k)), WindowSpec(duration=1))


def test_aggregate_sliding():
    out = aggregate(_base(4), 2, 1)
    assert [[e.timestamp for e in w.events] for w in out] == [[0, 1], [1, 2], [2, 3]]


def test_aggregate_identity():
    base = _base(4)
    assert aggregate(base, 1, 1) == base


def test_aggregate_stride_drops_trailing():
    out = aggregate(_base(5), 2, 2)
    assert [[e.timestamp for e in w.events] for w in out] == [[0, 1], [2, 3]]


def test_aggregate_too_wide():
    with pytest.raises(ValueError):
        aggregate(_base(2), 3, 1)


def test_streaming_matches_batch():
    events = ev(0, 3, 3, 9, 30, 31, 55)
    spec = WindowSpec(duration=7, slide_width=3, step=2)
    streamed = list(iter_aggregate(iter_windows(iter(events), spec), 3, 2))
    assert streamed == windows_for(events, spec)


def test_iter_windows_is_lazy():
    def gen():
        yield from ev(0, 1, 12)
        raise AssertionError("read past what was needed")
    it = iter_windows(gen(), WindowSpec(duration=10))
    first = next(it)
    assert len(first.events) == 2
