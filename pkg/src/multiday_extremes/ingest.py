"""Readers and validated containers for daily precipitation, station
metadata and monthly SOI records.

File formats (UTF-8, comma separated, ``.`` decimal separator):

* daily precipitation: ``date,prcp_mm`` with ISO dates, blank value = missing
* station metadata: ``station_id,lat,lon,cdist_km``
* SOI: ``year,month,soi``
"""
from __future__ import annotations

import calendar
import csv
import datetime as dt
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .exceptions import DataValidationError, ParseError

DAILY_HEADER = ("date", "prcp_mm")
STATION_HEADER = ("station_id", "lat", "lon", "cdist_km")
SOI_HEADER = ("year", "month", "soi")

MAX_MISSING_FRACTION = 0.01


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DailySeries:
    """One station's daily record on a gap-free calendar.

    ``values[i]`` is the depth in mm on ``start + i`` days; NaN marks a
    missing observation.
    """

    station_id: str
    start: dt.date
    values: np.ndarray

    def __post_init__(self):
        if not self.station_id:
            raise DataValidationError("station_id must be non-empty")
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise DataValidationError("values must be one-dimensional")
        if np.any(values[~np.isnan(values)] < 0):
            raise DataValidationError("negative precipitation")
        object.__setattr__(self, "values", _readonly(values))

    def __len__(self) -> int:
        return self.values.size

    def __eq__(self, other):
        if not isinstance(other, DailySeries):
            return NotImplemented
        return (
            self.station_id == other.station_id
            and self.start == other.start
            and np.array_equal(self.values, other.values, equal_nan=True)
        )

    @property
    def dates(self) -> np.ndarray:
        return np.datetime64(self.start, "D") + np.arange(len(self))

    @property
    def years(self) -> np.ndarray:
        return self.dates.astype("datetime64[Y]").astype(int) + 1970

    @property
    def missing(self) -> np.ndarray:
        return np.isnan(self.values)

    def scaled(self, factor: float) -> "DailySeries":
        return DailySeries(self.station_id, self.start, self.values * factor)


@dataclass(frozen=True)
class StationMeta:
    station_id: str
    latitude: float
    longitude: float
    coastal_distance: float

    def __post_init__(self):
        if not self.station_id:
            raise DataValidationError("station_id must be non-empty")
        if not -90 <= self.latitude <= 90:
            raise DataValidationError(f"{self.station_id}: latitude {self.latitude} outside [-90, 90]")
        if not -180 <= self.longitude <= 180:
            raise DataValidationError(f"{self.station_id}: longitude {self.longitude} outside [-180, 180]")
        if not self.coastal_distance > 0:
            raise DataValidationError(
                f"{self.station_id}: coastal distance must be strictly positive, got {self.coastal_distance}"
            )

    @property
    def log_cdist(self) -> float:
        return math.log(self.coastal_distance)


@dataclass(frozen=True, eq=False)
class SoiSeries:
    """Monthly SOI values, sorted, with no gaps inside the covered span."""

    years: np.ndarray
    months: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        years = np.asarray(self.years, dtype=int)
        months = np.asarray(self.months, dtype=int)
        values = np.asarray(self.values, dtype=float)
        if not (years.shape == months.shape == values.shape) or years.ndim != 1:
            raise DataValidationError("years, months and values must be 1-D and equally long")
        if np.any((months < 1) | (months > 12)):
            raise DataValidationError("month outside 1..12")
        if np.any(~np.isfinite(values)):
            raise DataValidationError("SOI values must be finite")
        index = years * 12 + (months - 1)
        if index.size and np.any(np.diff(index) != 1):
            raise DataValidationError("SOI months must be strictly increasing without gaps")
        object.__setattr__(self, "years", _readonly(years))
        object.__setattr__(self, "months", _readonly(months))
        object.__setattr__(self, "values", _readonly(values))

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class CovariateRow:
    station_id: str
    year: int
    soi: float
    log_cdist: float
    lat: float
    lon: float

    def __post_init__(self):
        if not math.isfinite(self.log_cdist):
            raise DataValidationError(f"{self.station_id}/{self.year}: log coastal distance not finite")


# --------------------------------------------------------------------------- daily


def _check_header(path, row, expected):
    got = tuple(c.strip().lower() for c in row)
    if got != expected:
        raise ParseError(f"{path}: expected header {','.join(expected)!r}, got {','.join(row)!r}")


def parse_daily_csv(path, station_id: str | None = None) -> DailySeries:
    """Read a ``date,prcp_mm`` file into a :class:`DailySeries`.

    Calendar gaps between rows become missing days. The station id
    defaults to the file stem.
    """
    path = Path(path)
    station_id = station_id or path.stem
    dates: list[dt.date] = []
    values: list[float] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ParseError(f"{path}: empty file")
        _check_header(path, header, DAILY_HEADER)
        for rowno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise ParseError(f"{path}: row {rowno}: expected 2 fields, got {len(row)}")
            try:
                day = dt.date.fromisoformat(row[0].strip())
            except ValueError:
                raise ParseError(f"{path}: row {rowno}: malformed date {row[0]!r}") from None
            text = row[1].strip()
            if text:
                try:
                    value = float(text)
                except ValueError:
                    raise ParseError(f"{path}: row {rowno}: malformed value {text!r}") from None
                if not math.isfinite(value):
                    raise ParseError(f"{path}: row {rowno}: non-finite value {text!r}")
                if value < 0:
                    raise DataValidationError(f"{path}: row {rowno}: negative precipitation {value}")
            else:
                value = math.nan
            if dates and day <= dates[-1]:
                raise DataValidationError(f"{path}: row {rowno}: dates not strictly increasing ({day})")
            dates.append(day)
            values.append(value)
    if not dates:
        raise ParseError(f"{path}: no data rows")
    start = dates[0]
    offsets = np.array([(d - start).days for d in dates])
    filled = np.full(offsets[-1] + 1, np.nan)
    filled[offsets] = values
    return DailySeries(station_id, start, filled)


def write_daily_csv(series: DailySeries, path) -> None:
    """Write every calendar day of ``series``; missing days get a blank value."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(DAILY_HEADER) + "\n")
        for day, value in zip(series.dates.astype(str), series.values):
            fh.write(f"{day},{'' if math.isnan(value) else repr(float(value))}\n")


def quality_filter(series: DailySeries, max_missing_fraction: float = MAX_MISSING_FRACTION) -> set[int]:
    """Calendar years whose fraction of missing days is below the limit.

    Days of a year that the record does not cover count as missing, and
    leap years use 366 as the denominator.
    """
    years = series.years
    present = ~series.missing
    admissible = set()
    for year in np.unique(years):
        n_days = 366 if calendar.isleap(int(year)) else 365
        n_present = int(np.count_nonzero(present[years == year]))
        if (n_days - n_present) / n_days < max_missing_fraction:
            admissible.add(int(year))
    return admissible


# --------------------------------------------------------------------------- stations


def parse_station_meta(path) -> dict[str, StationMeta]:
    path = Path(path)
    stations: dict[str, StationMeta] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ParseError(f"{path}: empty file")
        _check_header(path, header, STATION_HEADER)
        for rowno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 4:
                raise ParseError(f"{path}: row {rowno}: expected 4 fields, got {len(row)}")
            sid = row[0].strip()
            try:
                lat, lon, cdist = (float(c) for c in row[1:])
            except ValueError:
                raise ParseError(f"{path}: row {rowno}: malformed number") from None
            if sid in stations:
                raise DataValidationError(f"{path}: row {rowno}: duplicate station {sid!r}")
            try:
                stations[sid] = StationMeta(sid, lat, lon, cdist)
            except DataValidationError as exc:
                raise DataValidationError(f"{path}: row {rowno}: {exc}") from None
    return stations


def write_station_meta(stations: Iterable[StationMeta], path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(STATION_HEADER) + "\n")
        for s in stations:
            fh.write(f"{s.station_id},{s.latitude!r},{s.longitude!r},{s.coastal_distance!r}\n")


# --------------------------------------------------------------------------- SOI


def parse_soi_csv(path) -> SoiSeries:
    """Read monthly SOI rows; rows may come in any order."""
    path = Path(path)
    rows = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ParseError(f"{path}: empty file")
        _check_header(path, header, SOI_HEADER)
        for rowno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise ParseError(f"{path}: row {rowno}: expected 3 fields, got {len(row)}")
            try:
                rows.append((int(row[0]), int(row[1]), float(row[2])))
            except ValueError:
                raise ParseError(f"{path}: row {rowno}: malformed number") from None
    if not rows:
        raise ParseError(f"{path}: no data rows")
    rows.sort(key=lambda r: (r[0], r[1]))
    for a, b in zip(rows, rows[1:]):
        if a[:2] == b[:2]:
            raise DataValidationError(f"{path}: duplicate SOI entry for {a[0]}-{a[1]:02d}")
    y, m, v = zip(*rows)
    try:
        return SoiSeries(np.array(y), np.array(m), np.array(v))
    except DataValidationError as exc:
        raise DataValidationError(f"{path}: {exc}") from None


def write_soi_csv(soi: SoiSeries, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(SOI_HEADER) + "\n")
        for y, m, v in zip(soi.years, soi.months, soi.values):
            fh.write(f"{y},{m},{float(v)!r}\n")


def yearly_soi(soi: SoiSeries, year: int) -> float:
    """Arithmetic mean of the twelve monthly SOI values of ``year``."""
    sel = soi.years == year
    present = set(soi.months[sel].tolist())
    for month in range(1, 13):
        if month not in present:
            raise DataValidationError(f"SOI missing for {year}-{month:02d}")
    return float(np.mean(soi.values[sel]))


def yearly_soi_table(soi: SoiSeries) -> dict[int, float]:
    """Yearly means for every year with all twelve months present."""
    out = {}
    for year in np.unique(soi.years):
        if np.count_nonzero(soi.years == year) == 12:
            out[int(year)] = yearly_soi(soi, int(year))
    return out


def covariate_row(station: StationMeta, year: int, soi_by_year: Mapping[int, float]) -> CovariateRow:
    if year not in soi_by_year:
        raise DataValidationError(f"{station.station_id}/{year}: no complete SOI year")
    return CovariateRow(
        station.station_id, int(year), float(soi_by_year[year]), station.log_cdist, station.latitude, station.longitude
    )


@dataclass
class Dataset:
    """Everything the pipeline reads from disk."""

    series: dict[str, DailySeries]
    stations: dict[str, StationMeta]
    soi: SoiSeries
    admissible: dict[str, set[int]] = field(default_factory=dict)


def load_dataset(daily_dir, station_path, soi_path) -> Dataset:
    """Load a directory of ``<station_id>.csv`` daily files plus metadata.

    Every daily file must have a metadata row; stations without a daily
    file are ignored.
    """
    daily_dir = Path(daily_dir)
    for p in (daily_dir, Path(station_path), Path(soi_path)):
        if not p.exists():
            raise DataValidationError(f"input not found: {p}")
    stations = parse_station_meta(station_path)
    soi = parse_soi_csv(soi_path)
    series = {}
    for path in sorted(daily_dir.glob("*.csv")):
        s = parse_daily_csv(path)
        if s.station_id not in stations:
            raise DataValidationError(f"{path}: station {s.station_id!r} missing from {station_path}")
        series[s.station_id] = s
    if not series:
        raise DataValidationError(f"{daily_dir}: no daily CSV files")
    admissible = {sid: quality_filter(s) for sid, s in series.items()}
    return Dataset(series, stations, soi, admissible)
