"""Independent reference implementations used to check operators.

Everything here works on plain Python lists/dicts with the standard
library only; nothing imports from the package under test. The end-to-end
oracles recompute the two analysis questions directly from the raw
generated files.
"""

from __future__ import annotations

import csv
import json
import math
from datetime import date, datetime, time
from pathlib import Path

MPH_TO_MPS = 0.44704
EARTH_RADIUS_M = 6_371_000.0

_SAKAMOTO = (0, 3, 2, 5, 0, 3, 5, 1, 4, 6, 2, 4)
# index 0 = Sunday
SAKAMOTO_NAMES = (
    "Sunday", "Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday",
)


def sakamoto_weekday(y: int, m: int, d: int) -> str:
    if m < 3:
        y -= 1
    return SAKAMOTO_NAMES[(y + y // 4 - y // 100 + y // 400 + _SAKAMOTO[m - 1] + d) % 7]


def law_of_cosines_m(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dl = math.radians(lon2 - lon1)
    c = math.sin(p1) * math.sin(p2) + math.cos(p1) * math.cos(p2) * math.cos(dl)
    return EARTH_RADIUS_M * math.acos(min(1.0, max(-1.0, c)))


def haversine_ref_m(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    # atan2 form, distinct from the implementation's asin form
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp = math.radians(lat2 - lat1)
    dl = math.radians(lon2 - lon1)
    a = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * EARTH_RADIUS_M * math.atan2(math.sqrt(a), math.sqrt(1 - a))


# ---------------------------------------------------------------------------
# Relational oracles over row lists
# ---------------------------------------------------------------------------

def nested_loop_join(
    left_rows: list[tuple],
    right_rows: list[tuple],
    key_pairs: list[tuple[int, int]],
    right_keep: list[int],
) -> list[tuple]:
    """Inner join; output = left row + kept right cells; null keys never match."""
    out = []
    for lrow in left_rows:
        for rrow in right_rows:
            ok = True
            for li, ri in key_pairs:
                if lrow[li] is None or rrow[ri] is None or lrow[li] != rrow[ri]:
                    ok = False
                    break
            if ok:
                out.append(tuple(lrow) + tuple(rrow[i] for i in right_keep))
    return out


def brute_force_groups(
    rows: list[tuple], group_idx: list[int], target_idx: int | None
) -> dict[tuple, dict]:
    """Per-group recomputation: count plus mean/sum/min/max of the target."""
    groups: dict[tuple, list] = {}
    order: list[tuple] = []
    for row in rows:
        key = tuple(row[i] for i in group_idx)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(row)
    out = {}
    for key in order:
        members = groups[key]
        stats: dict = {"count": len(members)}
        if target_idx is not None:
            present = [r[target_idx] for r in members if r[target_idx] is not None]
            stats["mean"] = sum(present) / len(present) if present else None
            stats["sum"] = float(sum(present)) if present else None
            stats["min"] = min(present) if present else None
            stats["max"] = max(present) if present else None
        out[key] = stats
    return out


def nearest_observation(
    traffic: list[tuple[float, float, datetime]],
    weather: list[tuple[float, float, datetime]],
    space_buffer_m: float,
    time_buffer_s: float,
) -> list[int | None]:
    """Exhaustive scan: index of the matching weather row per traffic row."""
    out: list[int | None] = []
    for lat, lon, instant in traffic:
        best_rank = None
        best_j = None
        for j, (wlat, wlon, winstant) in enumerate(weather):
            dt = abs((instant - winstant).total_seconds())
            if dt > time_buffer_s:
                continue
            dist = haversine_ref_m(lat, lon, wlat, wlon)
            if dist > space_buffer_m:
                continue
            rank = (dist, dt, j)
            if best_rank is None or rank < best_rank:
                best_rank, best_j = rank, j
        out.append(best_j)
    return out


# ---------------------------------------------------------------------------
# End-to-end oracles over the raw generated files
# ---------------------------------------------------------------------------

def _read_raw_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    width = len(header)
    body = []
    for row in rows[1:]:
        row = row[:width] + [""] * (width - len(row))
        body.append(row)
    return header, body


def _clean_site(raw: str) -> int:
    return int(raw.lstrip("'"))


def _parse_stamp(raw: str) -> datetime:
    base, _, frac = raw.partition(".")
    stamp = datetime.strptime(base, "%Y-%m-%d %H:%M:%S")
    if frac:
        stamp = stamp.replace(microsecond=int(frac.ljust(6, "0")))
    return stamp


def _site_links(sites_csv: Path) -> dict[int, tuple[float, float, float]]:
    """site id -> (lat, lon, link length)"""
    header, body = _read_raw_csv(sites_csv)
    idx = {name: i for i, name in enumerate(header)}
    out = {}
    for row in body:
        out[int(row[idx["Site.ID"]])] = (
            float(row[idx["Lat"]]),
            float(row[idx["Lon"]]),
            float(row[idx["LinkLength"]]),
        )
    return out


def dwr1_journey_time(traffic_csvs: list[Path], sites_csv: Path) -> float:
    """Friday 17:00-18:00 southbound journey time, straight from the files."""
    links = _site_links(sites_csv)
    speeds: dict[int, list[float]] = {}
    site_order: list[int] = []
    for path in traffic_csvs:
        header, body = _read_raw_csv(path)
        idx = {name: i for i, name in enumerate(header)}
        for row in body:
            stamp = _parse_stamp(row[idx["Date"]])
            if sakamoto_weekday(stamp.year, stamp.month, stamp.day) != "Friday":
                continue
            if not time(17, 0) <= stamp.time() < time(18, 0):
                continue
            if row[idx["Direction Name"]] != "South":
                continue
            site = _clean_site(row[idx["Site ID"]])
            if site not in links:
                continue
            if site not in speeds:
                speeds[site] = []
                site_order.append(site)
            speeds[site].append(float(row[idx["Speed"]]))
    total = 0.0
    for site in site_order:
        mean = sum(speeds[site]) / len(speeds[site])
        total += links[site][2] / (mean * MPH_TO_MPS)
    return total


def _weather_reps(weather_json: Path) -> list[tuple[float, float, datetime, int]]:
    doc = json.loads(weather_json.read_text(encoding="utf-8"))
    root = doc.get("SiteRep", doc)
    reps = []
    for loc in root["DV"]["Location"]:
        lat, lon = float(loc["lat"]), float(loc["lon"])
        for period in loc["Period"]:
            day = date.fromisoformat(period["value"].rstrip("Z"))
            for rep in period["Rep"]:
                minutes = int(rep["$"])
                stamp = datetime.combine(day, time(minutes // 60, minutes % 60))
                reps.append((lat, lon, stamp, int(rep["W"])))
    return reps


def dwr2_condition_means(
    traffic_csv: Path,
    sites_csv: Path,
    weather_json: Path,
    wet_codes: frozenset[int] = frozenset({9, 10, 11, 12, 13, 14, 15}),
    space_buffer_m: float = 1609.34,
    time_buffer_s: float = 1800.0,
) -> dict[str, float]:
    """Friday mean speed per wet/dry label, straight from the files."""
    links = _site_links(sites_csv)
    reps = _weather_reps(weather_json)
    sums = {"wet": 0.0, "dry": 0.0}
    counts = {"wet": 0, "dry": 0}
    header, body = _read_raw_csv(traffic_csv)
    idx = {name: i for i, name in enumerate(header)}
    for row in body:
        stamp = _parse_stamp(row[idx["Date"]])
        if sakamoto_weekday(stamp.year, stamp.month, stamp.day) != "Friday":
            continue
        site = _clean_site(row[idx["Site ID"]])
        if site not in links:
            continue
        lat, lon, _ = links[site]
        best = None
        code = None
        for j, (wlat, wlon, winstant, wcode) in enumerate(reps):
            dt = abs((stamp - winstant).total_seconds())
            if dt > time_buffer_s:
                continue
            dist = haversine_ref_m(lat, lon, wlat, wlon)
            if dist > space_buffer_m:
                continue
            rank = (dist, dt, j)
            if best is None or rank < best:
                best, code = rank, wcode
        if code is None:
            continue
        label = "wet" if code in wet_codes else "dry"
        sums[label] += float(row[idx["Speed"]])
        counts[label] += 1
    return {
        label: sums[label] / counts[label] for label in ("wet", "dry") if counts[label]
    }
