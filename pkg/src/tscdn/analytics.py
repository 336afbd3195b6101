"""Trend extraction over query results: per-channel time series, weekend
windows, daily averages, and channel rankings."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from datetime import date, datetime, timedelta, timezone
from typing import Iterable

from .corpus import Corpus
from .index import InvertedIndex, QuerySpec, query
from .store import CdnStore
from .timeutil import day_start, utc_date

GRANULARITIES = ("day", "week", "month")

WEEKDAY_WED, WEEKDAY_THU, WEEKDAY_FRI, WEEKDAY_SAT = 2, 3, 4, 5


def _bucket_start(instant: datetime, granularity: str) -> datetime:
    d = utc_date(instant)
    if granularity == "day":
        return day_start(d)
    if granularity == "week":
        return day_start(d - timedelta(days=d.weekday()))
    if granularity == "month":
        return day_start(d.replace(day=1))
    raise ValueError(f"unknown granularity {granularity!r}")


def _next_bucket(start: datetime, granularity: str) -> datetime:
    if granularity == "day":
        return start + timedelta(days=1)
    if granularity == "week":
        return start + timedelta(days=7)
    d = utc_date(start)
    return day_start(date(d.year + (d.month == 12), d.month % 12 + 1, 1))


@dataclass
class TrendBucket:
    start: datetime
    count: int = 0
    mean_score: float = 0.0


@dataclass
class TrendSeries:
    keywords: list[str]
    interval: tuple[datetime, datetime]
    granularity: str
    channels: dict[str, list[TrendBucket]] = field(default_factory=dict)

    def total_count(self) -> int:
        return sum(b.count for series in self.channels.values() for b in series)


def _clamp(instant: datetime, t_b: datetime, t_e: datetime) -> datetime:
    return min(max(instant, t_b), t_e)


def _resolve_window(corpus: Corpus, spec: QuerySpec) -> tuple[datetime, datetime] | None:
    t_b, t_e = spec.interval
    if t_b is None:
        t_b = corpus.min_timestamp()
    if t_e is None:
        stamps = [chain[-1].timestamp for chain in corpus.events.values()]
        candidates = [t for t in (corpus.max_crawl_time(), max(stamps, default=None))
                      if t is not None]
        t_e = max(candidates) if candidates else None
    if t_b is None or t_e is None:
        return None
    return (t_b, t_e)


def trend_series(index: InvertedIndex, corpus: Corpus, spec: QuerySpec,
                 granularity: str) -> TrendSeries:
    """Query matches bucketed by UTC calendar unit per channel; buckets are
    contiguous over the window and zero-count buckets are present."""
    if granularity not in GRANULARITIES:
        raise ValueError(f"granularity must be one of {GRANULARITIES}")
    window = _resolve_window(corpus, spec)
    if window is None:
        return TrendSeries(list(spec.keywords),
                           (datetime(1970, 1, 1, tzinfo=timezone.utc),) * 2,
                           granularity, {})
    t_b, t_e = window

    results = query(index, replace(spec, interval=(t_b, t_e), limit=None, offset=0))

    starts: list[datetime] = []
    cursor = _bucket_start(t_b, granularity)
    last = _bucket_start(t_e, granularity)
    while cursor <= last:
        starts.append(cursor)
        cursor = _next_bucket(cursor, granularity)

    channel_names = spec.channels if spec.channels else sorted(corpus.channels)
    series = TrendSeries(list(spec.keywords), (t_b, t_e), granularity,
                         {c: [TrendBucket(s) for s in starts] for c in channel_names})
    position = {s: i for i, s in enumerate(starts)}
    sums: dict[str, list[float]] = {c: [0.0] * len(starts) for c in channel_names}

    for result in results:
        channel = result.event.channel_slug
        if channel not in series.channels:
            continue
        # clamp so intersecting-but-earlier events land in the first bucket
        slot = position[_bucket_start(_clamp(result.timestamp, t_b, t_e), granularity)]
        bucket = series.channels[channel][slot]
        bucket.count += 1
        sums[channel][slot] += result.tf_ief_sum

    for channel, buckets in series.channels.items():
        for i, bucket in enumerate(buckets):
            if bucket.count:
                bucket.mean_score = sums[channel][i] / bucket.count
    return series


# -- weekend windows ----------------------------------------------------------

@dataclass
class WeekendCells:
    wed: int = 0
    thu_fri: int = 0
    sat: int = 0


@dataclass
class MonthWindow:
    label: str
    start: date
    end: date
    channels: dict[str, WeekendCells] = field(default_factory=dict)


@dataclass
class WeekendWindow:
    months: list[MonthWindow]
    totals: dict[str, WeekendCells]


def weekend_window(index: InvertedIndex, spec: QuerySpec,
                   months: Iterable[tuple[str, date, date]],
                   zone: timezone) -> WeekendWindow:
    """Per month and channel: counts of matching events falling on the local
    Wednesday / Thursday+Friday / Saturday (weekends are local phenomena,
    hence the configured fixed offset)."""
    month_list = sorted(months, key=lambda m: m[1])
    for (_, _, prev_end), (_, nxt_start, _) in zip(month_list, month_list[1:]):
        if nxt_start <= prev_end:
            raise ValueError("month ranges overlap")

    if index.corpus is None:
        raise ValueError("index has no attached corpus")
    channel_names = spec.channels if spec.channels else sorted(index.corpus.channels)
    results = query(index, replace(spec, limit=None, offset=0))

    windows = [MonthWindow(label, start, end,
                           {c: WeekendCells() for c in channel_names})
               for label, start, end in month_list]
    totals = {c: WeekendCells() for c in channel_names}

    for result in results:
        channel = result.event.channel_slug
        if channel not in totals:
            continue
        local = result.timestamp.astimezone(zone)
        local_date = local.date()
        weekday = local.weekday()
        for window in windows:
            if window.start <= local_date <= window.end:
                cells = window.channels[channel]
                if weekday == WEEKDAY_WED:
                    cells.wed += 1
                    totals[channel].wed += 1
                elif weekday in (WEEKDAY_THU, WEEKDAY_FRI):
                    cells.thu_fri += 1
                    totals[channel].thu_fri += 1
                elif weekday == WEEKDAY_SAT:
                    cells.sat += 1
                    totals[channel].sat += 1
                break
    return WeekendWindow(windows, totals)


# -- daily averages ------------------------------------------------------------

@dataclass
class DailyAverage:
    matches: int
    days: int
    raw: float
    rounded: int


def daily_average(index: InvertedIndex, spec: QuerySpec,
                  interval: tuple[datetime, datetime]) -> dict[str, DailyAverage]:
    """Match count / calendar days in the interval (inclusive UTC day span),
    presented rounded to the nearest integer alongside the raw value."""
    t_b, t_e = interval
    days = (utc_date(t_e) - utc_date(t_b)).days + 1
    if days < 1:
        raise ValueError("interval must span at least one day")
    if index.corpus is None:
        raise ValueError("index has no attached corpus")
    channel_names = spec.channels if spec.channels else sorted(index.corpus.channels)
    results = query(index, replace(spec, interval=(t_b, t_e), limit=None, offset=0))
    counts = {c: 0 for c in channel_names}
    for result in results:
        if result.event.channel_slug in counts:
            counts[result.event.channel_slug] += 1
    return {
        channel: DailyAverage(n, days, n / days, math.floor(n / days + 0.5))
        for channel, n in counts.items()
    }


# -- channel rankings -------------------------------------------------------------

@dataclass
class ChannelRow:
    channel: str
    posts: int
    media_before: dict[str, int]
    media_after: dict[str, int]
    total_media_before: int
    total_media_after: int
    bytes_before: int
    bytes_after: int


def channel_rankings(corpus: Corpus, store: CdnStore | None = None) -> list[ChannelRow]:
    """Per-channel post counts and media counts/volumes by kind, before and
    after deduplication, ordered by post count descending."""
    rows: dict[str, ChannelRow] = {}
    distinct: dict[str, dict[tuple[str, str], tuple[str, int]]] = {}
    for slug in sorted(corpus.channels):
        rows[slug] = ChannelRow(slug, 0, {}, {}, 0, 0, 0, 0)
        distinct[slug] = {}
    for event, chain in corpus.events.items():
        row = rows.get(event.channel_slug)
        if row is None:
            continue
        row.posts += 1
        for ref in chain[-1].media:
            size = ref.size
            if store is not None:
                obj = store.objects.get((ref.hash, ref.ext))
                if obj is not None:
                    size = obj.size
            row.media_before[ref.kind] = row.media_before.get(ref.kind, 0) + 1
            row.total_media_before += 1
            row.bytes_before += size
            distinct[event.channel_slug][(ref.hash, ref.ext)] = (ref.kind, size)
    for slug, objects in distinct.items():
        row = rows[slug]
        for kind, size in objects.values():
            row.media_after[kind] = row.media_after.get(kind, 0) + 1
            row.total_media_after += 1
            row.bytes_after += size
    return sorted(rows.values(), key=lambda r: (-r.posts, r.channel))
