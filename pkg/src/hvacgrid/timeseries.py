"""Weather and real-time price ingestion.

File schema (delimited text, header row, ISO-8601 timestamps with an explicit
UTC offset):

    weather: timestamp,t_out_c,irradiance_kw_m2
    prices:  timestamp,buy_price

Input may be on any (strictly increasing) time grid; ingestion resamples by
linear interpolation onto a uniform slot grid anchored at the first timestamp.
Negative irradiance readings are clamped to zero (counted per file); negative
prices are a validation error.

The package bundles synthetic series in the same schema, qualitatively shaped
like a hot-climate summer (all values invented defaults).
"""

from __future__ import annotations

import csv
import importlib.resources
from dataclasses import dataclass, replace
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

SLOTS_PER_DAY_DEFAULT = 48


class SeriesFormatError(ValueError):
    """Malformed input file (bad header, row, timestamp, or ordering)."""


@dataclass(frozen=True)
class WeatherSeries:
    start: datetime
    slot_hours: float
    t_out_c: np.ndarray
    irradiance_kw_m2: np.ndarray
    n_clamped: int = 0

    def __post_init__(self):
        object.__setattr__(self, "t_out_c", np.asarray(self.t_out_c, dtype=float))
        object.__setattr__(self, "irradiance_kw_m2",
                           np.asarray(self.irradiance_kw_m2, dtype=float))
        if self.t_out_c.shape != self.irradiance_kw_m2.shape:
            raise ValueError("weather columns must have equal length")
        if np.any(self.irradiance_kw_m2 < 0):
            raise ValueError("irradiance must be >= 0 after ingestion")

    def __len__(self) -> int:
        return self.t_out_c.shape[0]

    def timestamps(self) -> list[datetime]:
        step = timedelta(hours=self.slot_hours)
        return [self.start + i * step for i in range(len(self))]


@dataclass(frozen=True)
class PriceSeries:
    start: datetime
    slot_hours: float
    buy_price: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "buy_price", np.asarray(self.buy_price, dtype=float))
        if np.any(self.buy_price < 0):
            raise ValueError("prices must be >= 0")

    def __len__(self) -> int:
        return self.buy_price.shape[0]

    def timestamps(self) -> list[datetime]:
        step = timedelta(hours=self.slot_hours)
        return [self.start + i * step for i in range(len(self))]


def _parse_timestamp(raw: str, path, line_no: int) -> datetime:
    text = raw.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    try:
        ts = datetime.fromisoformat(text)
    except ValueError as exc:
        raise SeriesFormatError(f"{path}:{line_no}: bad timestamp {raw!r}: {exc}") from None
    if ts.tzinfo is None:
        raise SeriesFormatError(f"{path}:{line_no}: timestamp {raw!r} lacks a UTC offset")
    return ts


def _read_columns(path, columns: list[str]) -> tuple[list[datetime], np.ndarray]:
    """Parse (timestamp, *columns) rows; returns timestamps and a value matrix."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"data file not found: {path}")
    times: list[datetime] = []
    values: list[list[float]] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SeriesFormatError(f"{path}: empty file") from None
        expected = ["timestamp"] + columns
        if [h.strip() for h in header] != expected:
            raise SeriesFormatError(
                f"{path}: header {header!r} does not match expected {expected!r}")
        for line_no, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(expected):
                raise SeriesFormatError(
                    f"{path}:{line_no}: expected {len(expected)} fields, got {len(row)}")
            times.append(_parse_timestamp(row[0], path, line_no))
            try:
                values.append([float(v) for v in row[1:]])
            except ValueError as exc:
                raise SeriesFormatError(f"{path}:{line_no}: bad value: {exc}") from None
    if len(times) < 2:
        raise SeriesFormatError(f"{path}: need at least two rows to form a grid")
    return times, np.asarray(values, dtype=float)


def _resample(times: list[datetime], values: np.ndarray, slot_hours: float, path) -> np.ndarray:
    """Linear interpolation onto a uniform grid anchored at the first timestamp."""
    t0 = times[0]
    hours = np.array([(t - t0).total_seconds() / 3600.0 for t in times])
    if np.any(np.diff(hours) <= 0):
        bad = int(np.argmax(np.diff(hours) <= 0)) + 2
        raise SeriesFormatError(f"{path}: timestamps not strictly increasing near row {bad}")
    span = hours[-1]
    n_slots = int(np.floor(span / slot_hours + 1e-9)) + 1
    grid = np.arange(n_slots) * slot_hours
    out = np.empty((n_slots, values.shape[1]))
    for j in range(values.shape[1]):
        out[:, j] = np.interp(grid, hours, values[:, j])
    return out


def load_weather(path, slot_hours: float = 0.5) -> WeatherSeries:
    """Load, validate and resample a weather file onto the slot grid."""
    times, raw = _read_columns(path, ["t_out_c", "irradiance_kw_m2"])
    n_clamped = int(np.sum(raw[:, 1] < 0))
    raw[:, 1] = np.maximum(raw[:, 1], 0.0)
    grid = _resample(times, raw, slot_hours, path)
    return WeatherSeries(start=times[0], slot_hours=slot_hours,
                         t_out_c=grid[:, 0], irradiance_kw_m2=np.maximum(grid[:, 1], 0.0),
                         n_clamped=n_clamped)


def load_prices(path, slot_hours: float = 0.5) -> PriceSeries:
    """Load, validate and resample a price file onto the slot grid."""
    times, raw = _read_columns(path, ["buy_price"])
    if np.any(raw[:, 0] < 0):
        raise SeriesFormatError(f"{path}: negative buy price")
    grid = _resample(times, raw, slot_hours, path)
    return PriceSeries(start=times[0], slot_hours=slot_hours, buy_price=grid[:, 0])


def slots_per_day(series) -> int:
    spd = 24.0 / series.slot_hours
    if abs(spd - round(spd)) > 1e-9:
        raise ValueError("slot length does not divide a day")
    return int(round(spd))


def n_days(series) -> int:
    return len(series) // slots_per_day(series)


def slice_day(series, day: int):
    """Return the 48-slot (one-day) window ``day``; errors on partial coverage."""
    spd = slots_per_day(series)
    lo, hi = day * spd, (day + 1) * spd
    if day < 0 or hi > len(series):
        raise ValueError(f"day {day} not fully covered by series of {len(series)} slots")
    start = series.start + timedelta(hours=lo * series.slot_hours)
    if isinstance(series, WeatherSeries):
        return replace(series, start=start, t_out_c=series.t_out_c[lo:hi],
                       irradiance_kw_m2=series.irradiance_kw_m2[lo:hi])
    return replace(series, start=start, buy_price=series.buy_price[lo:hi])


# ---------------------------------------------------------------------------
# synthetic bundled data
# ---------------------------------------------------------------------------

_START = datetime(2024, 3, 1, tzinfo=timezone.utc)


def _diurnal_temp(hour_of_day: np.ndarray) -> np.ndarray:
    """Piecewise half-cosine: min 24 degC at 05:00, max 36 degC at 14:00."""
    h = np.mod(hour_of_day - 5.0, 24.0)      # hours since the daily minimum
    rising = h <= 9.0                        # 05:00 -> 14:00
    frac_up = h / 9.0
    frac_down = (h - 9.0) / 15.0             # 14:00 -> 05:00 next day
    shape = np.where(rising,
                     0.5 * (1.0 - np.cos(np.pi * frac_up)),
                     0.5 * (1.0 + np.cos(np.pi * frac_down)))
    return 24.0 + 12.0 * shape


def _diurnal_irradiance(hour_of_day: np.ndarray) -> np.ndarray:
    """Clipped sine, daylight 06:00-18:00, peak 0.9 kW/m^2."""
    return 0.9 * np.maximum(np.sin(np.pi * (hour_of_day - 6.0) / 12.0), 0.0)


def _daily_price(hour_of_day: np.ndarray) -> np.ndarray:
    """Two-tier price with an evening peak block (currency/kWh)."""
    price = np.full_like(hour_of_day, 0.08, dtype=float)
    price[(hour_of_day >= 22.0) | (hour_of_day < 6.0)] = 0.04
    price[(hour_of_day >= 17.0) & (hour_of_day < 21.0)] = 0.16
    return price


def synthetic_weather(days: int, slot_hours: float = 0.5, seed: int = 20240301) -> WeatherSeries:
    """Deterministic synthetic weather; per-day offsets keep days distinct."""
    rng = np.random.default_rng(seed)
    spd = int(round(24.0 / slot_hours))
    hours = np.arange(days * spd) * slot_hours
    hod = np.mod(hours, 24.0)
    day_idx = (hours // 24.0).astype(int)
    temp_offset = rng.uniform(-1.5, 1.5, size=days)[day_idx]
    irr_scale = rng.uniform(0.82, 1.0, size=days)[day_idx]
    return WeatherSeries(start=_START, slot_hours=slot_hours,
                         t_out_c=_diurnal_temp(hod) + temp_offset,
                         irradiance_kw_m2=_diurnal_irradiance(hod) * irr_scale)


def synthetic_prices(days: int, slot_hours: float = 0.5) -> PriceSeries:
    spd = int(round(24.0 / slot_hours))
    hod = np.mod(np.arange(days * spd) * slot_hours, 24.0)
    return PriceSeries(start=_START, slot_hours=slot_hours, buy_price=_daily_price(hod))


def write_weather_csv(series: WeatherSeries, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp", "t_out_c", "irradiance_kw_m2"])
        for ts, t, g in zip(series.timestamps(), series.t_out_c, series.irradiance_kw_m2):
            writer.writerow([ts.isoformat(), repr(float(t)), repr(float(g))])


def write_prices_csv(series: PriceSeries, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp", "buy_price"])
        for ts, v in zip(series.timestamps(), series.buy_price):
            writer.writerow([ts.isoformat(), repr(float(v))])


def bundled_path(name: str) -> Path:
    """Path of a bundled dataset file (weather.csv / prices.csv)."""
    return Path(importlib.resources.files("hvacgrid").joinpath("datasets", name))


def load_bundled(slot_hours: float = 0.5) -> tuple[WeatherSeries, PriceSeries]:
    weather = load_weather(bundled_path("weather.csv"), slot_hours)
    prices = load_prices(bundled_path("prices.csv"), slot_hours)
    return weather, prices
