"""Traffic count series: loading, cleaning and daily profiles.

A series is a fixed-interval grid of flow values (vehicles per interval)
spanning whole days.  Every grid slot carries a quality mark: observed,
interpolated (filled by cleaning) or missing.  Timestamps are local
civil time on the interval grid.
"""
from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass
from datetime import date, datetime, timedelta

import numpy as np

from .errors import ArgumentError, AvailabilityError, DomainError, FormatError, InputError

QUALITY_MISSING = 0
QUALITY_OBSERVED = 1
QUALITY_INTERPOLATED = 2

TRAFFIC_HEADER = ["sensor_id", "timestamp", "flow"]


class HolidayCalendar:
    """Set of holiday dates."""

    def __init__(self, dates=()):
        self._dates = frozenset(dates)
        for d in self._dates:
            if not isinstance(d, date):
                raise ArgumentError(f"holiday entries must be dates, got {type(d).__name__}")

    def __contains__(self, d: date) -> bool:
        return d in self._dates

    def __len__(self) -> int:
        return len(self._dates)

    def __iter__(self):
        return iter(sorted(self._dates))

    @classmethod
    def from_csv(cls, source) -> "HolidayCalendar":
        """One ISO date per non-blank line; '#' lines are comments."""
        if isinstance(source, (str, os.PathLike)):
            try:
                with open(source, "r", encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                raise InputError(f"cannot read holiday calendar: {exc}") from exc
        else:
            text = source.decode("utf-8") if isinstance(source, bytes) else str(source)
        days = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                days.append(date.fromisoformat(line))
            except ValueError as exc:
                raise FormatError(f"holidays line {lineno}: {exc}") from exc
        return cls(days)


def is_weekday(d: date, holidays: HolidayCalendar | None = None) -> bool:
    """Monday..Friday and not a holiday."""
    return d.weekday() < 5 and not (holidays is not None and d in holidays)


@dataclass
class TrafficSeries:
    """Grid-aligned flow series for one sensor.

    ``flows`` and ``quality`` are (n_days, slots_per_day) arrays; missing
    slots hold NaN flow and quality 0.
    """

    sensor_id: str
    interval_min: int
    start_date: date
    flows: np.ndarray
    quality: np.ndarray

    def __post_init__(self):
        if 1440 % self.interval_min != 0:
            raise ArgumentError(f"interval {self.interval_min} does not divide 1440 minutes")
        if self.flows.shape != self.quality.shape:
            raise ArgumentError("flows and quality arrays must have the same shape")
        if self.flows.ndim != 2 or self.flows.shape[1] != self.slots_per_day:
            raise ArgumentError(
                f"expected (days, {self.slots_per_day}) arrays, got {self.flows.shape}"
            )

    @property
    def slots_per_day(self) -> int:
        return 1440 // self.interval_min

    @property
    def n_days(self) -> int:
        return self.flows.shape[0]

    def dates(self) -> list[date]:
        return [self.start_date + timedelta(days=i) for i in range(self.n_days)]

    def date_index(self, d: date) -> int:
        i = (d - self.start_date).days
        if i < 0 or i >= self.n_days:
            raise AvailabilityError(
                f"sensor {self.sensor_id!r}: {d.isoformat()} outside the recorded span "
                f"{self.start_date.isoformat()}..{self.dates()[-1].isoformat()}"
            )
        return i

    def is_complete_day(self, d: date) -> bool:
        return bool((self.quality[self.date_index(d)] != QUALITY_MISSING).all())

    def complete_days(self) -> list[date]:
        return [d for d in self.dates() if self.is_complete_day(d)]


def _read_text(source) -> str:
    if isinstance(source, (str, os.PathLike)) and "\n" not in str(source):
        try:
            with open(source, "r", encoding="utf-8", newline="") as fh:
                return fh.read()
        except OSError as exc:
            raise InputError(f"cannot read traffic CSV {source}: {exc}") from exc
    return source.decode("utf-8") if isinstance(source, bytes) else str(source)


def _parse_traffic_text(
    text: str, interval_min: int, on_duplicate: str
) -> dict[str, dict[datetime, float]]:
    """Validate raw CSV text into per-sensor timestamp->flow maps."""
    if 1440 % interval_min != 0:
        raise ArgumentError(f"interval {interval_min} does not divide 1440 minutes")
    if on_duplicate not in ("error", "first"):
        raise ArgumentError(f"on_duplicate must be 'error' or 'first', got {on_duplicate!r}")
    rows = list(csv.reader(io.StringIO(text)))
    rows_nonblank = [(i + 1, r) for i, r in enumerate(rows) if r]
    if not rows_nonblank or [c.strip() for c in rows_nonblank[0][1]] != TRAFFIC_HEADER:
        raise FormatError(f"bad traffic CSV header: expected {','.join(TRAFFIC_HEADER)}")

    by_sensor: dict[str, dict[datetime, float]] = {}
    for lineno, row in rows_nonblank[1:]:
        if len(row) != 3:
            raise FormatError(f"traffic CSV row {lineno}: expected 3 fields, got {len(row)}")
        sid, ts_text, flow_text = row
        try:
            ts = datetime.fromisoformat(ts_text)
        except ValueError as exc:
            raise FormatError(f"traffic CSV row {lineno}: {exc}") from exc
        if ts.tzinfo is not None:
            raise FormatError(
                f"traffic CSV row {lineno}: timestamps must be naive local civil time"
            )
        if ts.second or ts.microsecond or (ts.hour * 60 + ts.minute) % interval_min:
            raise FormatError(
                f"traffic CSV row {lineno}: {ts_text} is off the {interval_min}-minute grid"
            )
        try:
            flow = float(flow_text)
        except ValueError as exc:
            raise FormatError(f"traffic CSV row {lineno}: {exc}") from exc
        if not np.isfinite(flow) or flow < 0:
            raise FormatError(
                f"traffic CSV row {lineno}: flow must be finite and non-negative, got {flow_text}"
            )
        records = by_sensor.setdefault(sid, {})
        if ts in records:
            if on_duplicate == "error":
                raise FormatError(f"traffic CSV row {lineno}: duplicate timestamp {ts_text}")
            continue
        records[ts] = flow
    if not by_sensor:
        raise FormatError("traffic CSV holds no data rows")
    return by_sensor


def _series_from_records(
    sensor_id: str, records: dict[datetime, float], interval_min: int
) -> TrafficSeries:
    slots = 1440 // interval_min
    first = min(records).date()
    last = max(records).date()
    n_days = (last - first).days + 1
    flows = np.full((n_days, slots), np.nan)
    quality = np.full((n_days, slots), QUALITY_MISSING, dtype=np.uint8)
    for ts, flow in records.items():
        day = (ts.date() - first).days
        slot = (ts.hour * 60 + ts.minute) // interval_min
        flows[day, slot] = flow
        quality[day, slot] = QUALITY_OBSERVED
    return TrafficSeries(sensor_id, interval_min, first, flows, quality)


def load_series(source, interval_min: int = 15, on_duplicate: str = "error") -> TrafficSeries:
    """Load one sensor's series from ``sensor_id,timestamp,flow`` CSV.

    Timestamps must be naive ISO-8601 on the interval grid; grid slots
    absent from the file become missing.  A file mixing several sensor
    ids is rejected (use :func:`load_traffic_csv` for combined files).
    ``on_duplicate="first"`` keeps the first record of a repeated
    timestamp (for fall-back clock changes); the default raises.
    """
    by_sensor = _parse_traffic_text(_read_text(source), interval_min, on_duplicate)
    if len(by_sensor) != 1:
        raise FormatError(
            f"mixed sensor ids in one series: {', '.join(sorted(by_sensor))}"
        )
    (sensor_id, records), = by_sensor.items()
    return _series_from_records(sensor_id, records, interval_min)


def load_traffic_csv(
    source, interval_min: int = 15, on_duplicate: str = "error"
) -> dict[str, TrafficSeries]:
    """Load a traffic CSV that may combine several sensors."""
    by_sensor = _parse_traffic_text(_read_text(source), interval_min, on_duplicate)
    return {
        sid: _series_from_records(sid, records, interval_min)
        for sid, records in sorted(by_sensor.items())
    }


@dataclass
class CleaningStats:
    spikes_removed: int = 0
    slots_interpolated: int = 0
    slots_missing: int = 0
    incomplete_days: int = 0
    total_days: int = 0


def clean_series(
    series: TrafficSeries, spike_factor: float = 5.0, max_gap: int = 4
) -> tuple[TrafficSeries, CleaningStats]:
    """Spike removal followed by short-gap interpolation.

    An observed value above ``spike_factor`` times the per-slot median of
    observed values (over all days) is re-marked missing; removal is
    iterated to a fixed point so cleaning is idempotent.  Slots whose
    median is zero are exempt from the multiplicative rule.  Missing runs
    of at most ``max_gap`` slots bounded by data on both sides are filled
    linearly; longer or unbounded runs stay missing.
    """
    if spike_factor <= 0:
        raise ArgumentError(f"spike factor must be positive, got {spike_factor}")
    if max_gap < 0:
        raise ArgumentError(f"max gap must be >= 0, got {max_gap}")
    flows = series.flows.copy()
    quality = series.quality.copy()
    slots = series.slots_per_day

    spikes = 0
    while True:
        removed = 0
        for slot in range(slots):
            observed = quality[:, slot] == QUALITY_OBSERVED
            col = flows[observed, slot]
            if col.size == 0:
                continue
            med = float(np.median(col))
            if med <= 0.0:
                continue
            mask = observed & (flows[:, slot] > spike_factor * med)
            n = int(mask.sum())
            if n:
                flows[mask, slot] = np.nan
                quality[mask, slot] = QUALITY_MISSING
                removed += n
        spikes += removed
        if removed == 0:
            break

    # gap filling works on the flattened timeline so runs may span midnight
    flat_flow = flows.reshape(-1)
    flat_q = quality.reshape(-1)
    interpolated = 0
    n = flat_q.size
    i = 0
    while i < n:
        if flat_q[i] != QUALITY_MISSING:
            i += 1
            continue
        j = i
        while j < n and flat_q[j] == QUALITY_MISSING:
            j += 1
        run = j - i
        if 0 < run <= max_gap and i > 0 and j < n:
            left = flat_flow[i - 1]
            right = flat_flow[j]
            for k in range(run):
                frac = (k + 1) / (run + 1)
                flat_flow[i + k] = left + (right - left) * frac
                flat_q[i + k] = QUALITY_INTERPOLATED
            interpolated += run
        i = j

    cleaned = TrafficSeries(
        series.sensor_id, series.interval_min, series.start_date, flows, quality
    )
    stats = CleaningStats(
        spikes_removed=spikes,
        slots_interpolated=interpolated,
        slots_missing=int((quality == QUALITY_MISSING).sum()),
        incomplete_days=sum(1 for d in cleaned.dates() if not cleaned.is_complete_day(d)),
        total_days=cleaned.n_days,
    )
    return cleaned, stats


@dataclass(frozen=True)
class TrafficProfile:
    """Per-slot median daily flow with its per-slot spread."""

    sensor_id: str
    interval_min: int
    day_filter: str
    n_days: int
    values: np.ndarray
    stdev: np.ndarray


DAY_FILTERS = ("weekdays", "weekends", "all")


def _filter_days(dates, day_filter: str, holidays: HolidayCalendar | None):
    if day_filter == "weekdays":
        return [d for d in dates if is_weekday(d, holidays)]
    if day_filter == "weekends":
        return [d for d in dates if d.weekday() >= 5]
    if day_filter == "all":
        return list(dates)
    raise ArgumentError(f"unknown day filter {day_filter!r}; expected one of {DAY_FILTERS}")


def daily_profile(
    series: TrafficSeries,
    day_filter: str = "weekdays",
    holidays: HolidayCalendar | None = None,
) -> TrafficProfile:
    """Per-slot median over the complete days passing the filter.

    Weekdays are Monday..Friday excluding holidays.  The spread is the
    per-slot sample standard deviation (zero for a single day).  Days
    with any missing slot are left out entirely.
    """
    days = _filter_days(series.complete_days(), day_filter, holidays)
    if not days:
        raise DomainError(
            f"sensor {series.sensor_id!r}: no complete days match filter {day_filter!r}"
        )
    rows = np.array([series.date_index(d) for d in days])
    block = series.flows[rows]
    values = np.median(block, axis=0)
    if len(days) >= 2:
        stdev = np.std(block, axis=0, ddof=1)
    else:
        stdev = np.zeros(series.slots_per_day)
    return TrafficProfile(
        sensor_id=series.sensor_id,
        interval_min=series.interval_min,
        day_filter=day_filter,
        n_days=len(days),
        values=values,
        stdev=stdev,
    )


def slice_day(series: TrafficSeries, d: date) -> np.ndarray:
    """Flow vector of one complete day; raises when absent or incomplete."""
    idx = series.date_index(d)
    missing = int((series.quality[idx] == QUALITY_MISSING).sum())
    if missing:
        raise AvailabilityError(
            f"sensor {series.sensor_id!r}: {d.isoformat()} has {missing} missing slots"
        )
    return series.flows[idx].copy()


def mean_weekday_flow(
    series: TrafficSeries, holidays: HolidayCalendar | None = None
) -> float:
    """Mean of every observed or interpolated flow on non-holiday weekdays."""
    rows = [
        series.date_index(d) for d in series.dates() if is_weekday(d, holidays)
    ]
    if rows:
        block_q = series.quality[rows]
        block_f = series.flows[rows]
        vals = block_f[block_q != QUALITY_MISSING]
        if vals.size:
            return float(vals.mean())
    raise DomainError(
        f"sensor {series.sensor_id!r}: no weekday flow values to average"
    )
