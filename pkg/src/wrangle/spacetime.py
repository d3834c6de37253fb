"""Joining traffic records to nearby weather observations, and wet/dry labels.

A traffic row matches the weather observation that is closest in space
among those within both buffers (great-circle distance and absolute time
difference); distance ties fall back to the smaller time gap, then to
weather row order. Each traffic row gains at most one observation, so row
count and order are preserved for downstream grouping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import date, datetime, time

from .errors import RangeError, SchemaMismatch, TypeMismatch, UnknownColumn
from .table import Cell, Column, CType, Table

EARTH_RADIUS_M = 6_371_000.0

#: Significant-weather codes treated as rain by default (the rain family).
DEFAULT_WET_CODES = frozenset({9, 10, 11, 12, 13, 14, 15})

MILE_M = 1609.34


def haversine_m(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Great-circle distance in meters on a sphere of Earth radius."""
    for lat in (lat1, lat2):
        if not -90.0 <= lat <= 90.0:
            raise RangeError(f"latitude {lat} out of range")
    for lon in (lon1, lon2):
        if not -180.0 <= lon <= 180.0:
            raise RangeError(f"longitude {lon} out of range")
    phi1, phi2 = math.radians(lat1), math.radians(lat2)
    dphi = math.radians(lat2 - lat1)
    dlam = math.radians(lon2 - lon1)
    a = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2) ** 2
    return 2 * EARTH_RADIUS_M * math.asin(math.sqrt(a))


@dataclass(frozen=True)
class SpaceTimeParams:
    """Column names and buffers for the join.

    The traffic timestamp comes either from one timestamp column
    (``traffic_timestamp``) or from a date column plus a time-of-day column;
    exactly one of the two forms must be configured.
    """

    space_buffer_m: float = MILE_M
    time_buffer_s: int = 1800
    traffic_lat: str = "Lat"
    traffic_lon: str = "Lon"
    traffic_timestamp: str | None = None
    traffic_date: str | None = "Date"
    traffic_time: str | None = "Hours"
    weather_lat: str = "Lat"
    weather_lon: str = "Lon"
    weather_date: str = "ObsDate"
    weather_time: str = "ObsTime"

    def __post_init__(self) -> None:
        if self.space_buffer_m <= 0 or self.time_buffer_s <= 0:
            raise RangeError("buffers must be positive")
        if self.traffic_timestamp is not None:
            if self.traffic_date is not None and self.traffic_time is not None:
                # Defaults for the pair are still set; the timestamp wins.
                object.__setattr__(self, "traffic_date", None)
                object.__setattr__(self, "traffic_time", None)
        elif self.traffic_date is None or self.traffic_time is None:
            raise ValueError(
                "need traffic_timestamp or both traffic_date and traffic_time"
            )


@dataclass(frozen=True)
class WetCodeSet:
    codes: frozenset[int] = field(default=DEFAULT_WET_CODES)

    def __post_init__(self) -> None:
        if not self.codes:
            raise ValueError("wet code set must not be empty")


def _require(t: Table, name: str, kinds: set[CType], what: str) -> Column:
    col = t.column(name)
    if col.ctype not in kinds:
        wanted = "/".join(sorted(k.value for k in kinds))
        raise TypeMismatch(f"{what} column '{name}' is {col.ctype.value}, need {wanted}")
    return col


def _traffic_instants(traffic: Table, p: SpaceTimeParams) -> list[datetime | None]:
    if p.traffic_timestamp is not None:
        col = _require(traffic, p.traffic_timestamp, {CType.TIMESTAMP}, "traffic")
        return list(col.cells)  # type: ignore[arg-type]
    dcol = _require(traffic, p.traffic_date, {CType.DATE}, "traffic")  # type: ignore[arg-type]
    tcol = _require(traffic, p.traffic_time, {CType.TIME}, "traffic")  # type: ignore[arg-type]
    out: list[datetime | None] = []
    for d, t in zip(dcol.cells, tcol.cells):
        if d is None or t is None:
            out.append(None)
        else:
            out.append(datetime.combine(d, t))  # type: ignore[arg-type]
    return out


def time_space_join(traffic: Table, weather: Table, p: SpaceTimeParams) -> Table:
    """Append the nearest in-buffer weather observation to each traffic row.

    Weather columns arrive with a ``wx_`` prefix; unmatched traffic rows
    keep null weather cells. Traffic row count and order are unchanged.
    """
    lat_col = _require(traffic, p.traffic_lat, {CType.REAL, CType.INT}, "traffic")
    lon_col = _require(traffic, p.traffic_lon, {CType.REAL, CType.INT}, "traffic")
    instants = _traffic_instants(traffic, p)

    wlat = _require(weather, p.weather_lat, {CType.REAL, CType.INT}, "weather")
    wlon = _require(weather, p.weather_lon, {CType.REAL, CType.INT}, "weather")
    wdate = _require(weather, p.weather_date, {CType.DATE}, "weather")
    wtime = _require(weather, p.weather_time, {CType.TIME}, "weather")

    candidates: list[tuple[int, float, float, datetime]] = []
    for j in range(weather.row_count):
        lat, lon = wlat.cells[j], wlon.cells[j]
        d, t = wdate.cells[j], wtime.cells[j]
        if lat is None or lon is None or d is None or t is None:
            continue
        candidates.append((j, float(lat), float(lon), datetime.combine(d, t)))  # type: ignore[arg-type]

    matches: list[int | None] = []
    for i in range(traffic.row_count):
        lat, lon, instant = lat_col.cells[i], lon_col.cells[i], instants[i]
        if lat is None or lon is None or instant is None:
            matches.append(None)
            continue
        best: tuple[float, float, int] | None = None
        for j, wx_lat, wx_lon, wx_instant in candidates:
            dt = abs((instant - wx_instant).total_seconds())
            if dt > p.time_buffer_s:
                continue
            dist = haversine_m(float(lat), float(lon), wx_lat, wx_lon)
            if dist > p.space_buffer_m:
                continue
            rank = (dist, dt, j)
            if best is None or rank < best:
                best = rank
        matches.append(best[2] if best is not None else None)

    taken = set(traffic.column_names)
    out = list(traffic.columns)
    for col in weather.columns:
        name = f"wx_{col.name}"
        if name in taken:
            raise SchemaMismatch(f"traffic table already has a column '{name}'")
        cells: list[Cell] = [
            col.cells[j] if j is not None else None for j in matches
        ]
        out.append(Column(name, col.ctype, tuple(cells)))
    return Table(tuple(out))


def add_weather_condition(t: Table, wet: WetCodeSet = WetCodeSet(), col: str = "wx_W") -> Table:
    """Append a text ``weatherCond`` column: wet, dry, or null when the code is null."""
    codes = t.column(col)
    if codes.ctype is not CType.INT and any(v is not None for v in codes.cells):
        raise TypeMismatch(f"column '{col}' is {codes.ctype.value}, need int codes")
    cells = tuple(
        None if v is None else ("wet" if v in wet.codes else "dry")
        for v in codes.cells
    )
    return Table(t.columns + (Column("weatherCond", CType.TEXT, cells),))
