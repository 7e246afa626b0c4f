"""CSV ingestion for the six input files and cadence alignment.

File formats (UTF-8, comma-separated, '.' decimal, empty cell = missing):

    stations.csv       station_id,name,lat,lon
    species.csv        timestamp,station_id,<one column per species>
    pollutants.csv     timestamp,station_id,<one column per measure>
    meteorology.csv    timestamp,station_id,<one column per measure>
    grid_sensors.csv   sensor_id,lat,lon
    grid_readings.csv  timestamp,sensor_id,pm25

Timestamps are ISO-8601 and standardized to UTC on load. Species values
at a stamp are means over the window ending at that stamp, so alignment
of finer-cadence series averages over the *preceding* tensor interval
(T - step, T].
"""
from __future__ import annotations

import csv
import warnings
from collections import Counter, defaultdict
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Iterable, Literal, Sequence

import numpy as np

from .errors import (
    DuplicateSample,
    IncompatibleCadence,
    IrregularCadenceWarning,
    MalformedRow,
    NegativeConcentration,
    UnknownStation,
)
from .tensor import SpatioTemporalTensor

AuxKind = Literal["pollutant", "meteorology"]

TIMESTAMP_FMT = "%Y-%m-%dT%H:%M:%SZ"


def parse_timestamp(text: str, line: int | None = None) -> datetime:
    """Parse an ISO-8601 stamp to an aware UTC datetime; naive means UTC."""
    raw = text.strip()
    try:
        ts = datetime.fromisoformat(raw.replace("Z", "+00:00"))
    except ValueError:
        raise MalformedRow(line or 0, f"bad timestamp {text!r}") from None
    if ts.tzinfo is None:
        return ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_timestamp(ts: datetime) -> str:
    if ts.tzinfo is not None:
        ts = ts.astimezone(timezone.utc).replace(tzinfo=None)
    return ts.strftime(TIMESTAMP_FMT)


@dataclass(frozen=True)
class StationInfo:
    station_id: str
    name: str
    lat: float
    lon: float


@dataclass(frozen=True)
class StationCatalog:
    entries: tuple[StationInfo, ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        ids = [e.station_id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise DuplicateSample("duplicate station_id in catalog")
        for e in self.entries:
            if not (-90.0 <= e.lat <= 90.0) or not (-180.0 <= e.lon <= 180.0):
                raise MalformedRow(0, f"station {e.station_id!r} has out-of-range coordinates")

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(e.station_id for e in self.entries)

    def index_of(self, station_id: str) -> int:
        try:
            return self.ids.index(station_id)
        except ValueError:
            raise UnknownStation(f"station {station_id!r} not in catalog") from None


@dataclass(frozen=True)
class AuxiliarySeries:
    """One hourly (or coarser) measure keyed by (station_id, timestamp)."""

    kind: AuxKind
    name: str
    samples: dict[tuple[str, datetime], float]
    cadence: timedelta | None
    partial_cells: frozenset[tuple[str, datetime]] = field(default_factory=frozenset)

    def stations(self) -> tuple[str, ...]:
        return tuple(sorted({s for s, _ in self.samples}))

    def subset(self, station_ids: Iterable[str]) -> "AuxiliarySeries":
        keep = set(station_ids)
        return replace(
            self,
            samples={k: v for k, v in self.samples.items() if k[0] in keep},
            partial_cells=frozenset(c for c in self.partial_cells if c[0] in keep),
        )


@dataclass(frozen=True)
class GridSensorSet:
    """Dense PM2.5 sensor fleet: positions plus per-timestamp readings."""

    sensors: tuple[tuple[str, float, float], ...]
    readings: dict[tuple[str, datetime], float]

    def __post_init__(self):
        object.__setattr__(self, "sensors", tuple(self.sensors))
        ids = [s[0] for s in self.sensors]
        if len(set(ids)) != len(ids):
            raise DuplicateSample("duplicate sensor_id")
        if any(v < 0 for v in self.readings.values()):
            raise NegativeConcentration("grid readings must be >= 0")

    def timestamps(self) -> tuple[datetime, ...]:
        return tuple(sorted({ts for _, ts in self.readings}))


def _read_rows(path: str | Path) -> tuple[list[str], list[tuple[int, list[str]]]]:
    """Return (header, [(line_no, cells), ...]) with 1-based line numbers."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        rows = [(i + 1, row) for i, row in enumerate(reader) if row]
    if not rows:
        raise MalformedRow(0, f"{path}: empty file")
    header = [c.strip() for c in rows[0][1]]
    return header, rows[1:]


def _parse_float(cell: str, line: int) -> float | None:
    cell = cell.strip()
    if cell == "":
        return None
    try:
        return float(cell)
    except ValueError:
        raise MalformedRow(line, f"bad number {cell!r}") from None


def load_stations(path: str | Path) -> StationCatalog:
    header, rows = _read_rows(path)
    if header[:4] != ["station_id", "name", "lat", "lon"]:
        raise MalformedRow(1, "expected header station_id,name,lat,lon")
    entries = []
    for line, row in rows:
        if len(row) != 4:
            raise MalformedRow(line, f"expected 4 cells, got {len(row)}")
        lat = _parse_float(row[2], line)
        lon = _parse_float(row[3], line)
        if lat is None or lon is None:
            raise MalformedRow(line, "lat/lon cannot be empty")
        entries.append(StationInfo(row[0].strip(), row[1].strip(), lat, lon))
    return StationCatalog(entries=tuple(entries))


def load_species(path: str | Path, catalog: StationCatalog) -> SpatioTemporalTensor:
    """Load species.csv onto the grid of observed timestamps x catalog stations.

    Cells absent from the file are masked missing; negative readings and
    rows naming unknown stations are rejected.
    """
    header, rows = _read_rows(path)
    if header[:2] != ["timestamp", "station_id"] or len(header) < 3:
        raise MalformedRow(1, "expected header timestamp,station_id,<features...>")
    features = header[2:]
    d = len(features)

    seen: dict[tuple[datetime, str], int] = {}
    parsed: list[tuple[datetime, int, list[float | None]]] = []
    for line, row in rows:
        if len(row) != 2 + d:
            raise MalformedRow(line, f"expected {2 + d} cells, got {len(row)}")
        ts = parse_timestamp(row[0], line)
        sid = row[1].strip()
        j = catalog.index_of(sid)
        key = (ts, sid)
        if key in seen:
            raise DuplicateSample(
                f"({sid}, {format_timestamp(ts)}) defined at lines {seen[key]} and {line}"
            )
        seen[key] = line
        vals = []
        for f, cell in enumerate(row[2:]):
            v = _parse_float(cell, line)
            if v is not None and v < 0:
                raise NegativeConcentration(
                    f"line {line}: {features[f]} = {v} is negative"
                )
            vals.append(v)
        parsed.append((ts, j, vals))

    times = sorted({ts for ts, _, _ in parsed})
    time_pos = {ts: i for i, ts in enumerate(times)}
    t, n = len(times), len(catalog.ids)
    values = np.zeros((t, n, d))
    mask = np.zeros((t, n, d), dtype=bool)
    for ts, j, vals in parsed:
        i = time_pos[ts]
        for f, v in enumerate(vals):
            if v is not None:
                values[i, j, f] = v
                mask[i, j, f] = True
    return SpatioTemporalTensor(
        values=values,
        mask=mask,
        time_index=tuple(times),
        station_index=catalog.ids,
        feature_index=tuple(features),
    )


def _modal_step(times: Sequence[datetime]) -> timedelta | None:
    if len(times) < 2:
        return None
    steps = [b - a for a, b in zip(times, times[1:])]
    modal, count = Counter(steps).most_common(1)[0]
    deviating = len(steps) - count
    if deviating > 0.05 * len(steps):
        warnings.warn(
            f"{deviating}/{len(steps)} timestamp steps deviate from the modal "
            f"cadence {modal}",
            IrregularCadenceWarning,
        )
    return modal


def load_auxiliary(path: str | Path, kind: AuxKind) -> list[AuxiliarySeries]:
    """Load pollutants.csv / meteorology.csv into one series per measure."""
    header, rows = _read_rows(path)
    if header[:2] != ["timestamp", "station_id"] or len(header) < 3:
        raise MalformedRow(1, "expected header timestamp,station_id,<measures...>")
    measures = header[2:]

    seen: dict[tuple[str, datetime], int] = {}
    samples: list[dict[tuple[str, datetime], float]] = [{} for _ in measures]
    stamps: set[datetime] = set()
    for line, row in rows:
        if len(row) != 2 + len(measures):
            raise MalformedRow(line, f"expected {2 + len(measures)} cells, got {len(row)}")
        ts = parse_timestamp(row[0], line)
        sid = row[1].strip()
        key = (sid, ts)
        if key in seen:
            raise DuplicateSample(
                f"({sid}, {format_timestamp(ts)}) defined at lines {seen[key]} and {line}"
            )
        seen[key] = line
        stamps.add(ts)
        for m, cell in enumerate(row[2:]):
            v = _parse_float(cell, line)
            if v is not None:
                samples[m][key] = v

    cadence = _modal_step(sorted(stamps))
    return [
        AuxiliarySeries(kind=kind, name=name, samples=samples[m], cadence=cadence)
        for m, name in enumerate(measures)
    ]


def load_grid_sensors(path: str | Path) -> tuple[tuple[str, float, float], ...]:
    header, rows = _read_rows(path)
    if header[:3] != ["sensor_id", "lat", "lon"]:
        raise MalformedRow(1, "expected header sensor_id,lat,lon")
    sensors = []
    for line, row in rows:
        if len(row) != 3:
            raise MalformedRow(line, f"expected 3 cells, got {len(row)}")
        lat = _parse_float(row[1], line)
        lon = _parse_float(row[2], line)
        if lat is None or lon is None:
            raise MalformedRow(line, "lat/lon cannot be empty")
        sensors.append((row[0].strip(), lat, lon))
    return tuple(sensors)


def load_grid(sensors_path: str | Path, readings_path: str | Path) -> GridSensorSet:
    sensors = load_grid_sensors(sensors_path)
    known = {s[0] for s in sensors}
    header, rows = _read_rows(readings_path)
    if header[:3] != ["timestamp", "sensor_id", "pm25"]:
        raise MalformedRow(1, "expected header timestamp,sensor_id,pm25")
    readings: dict[tuple[str, datetime], float] = {}
    for line, row in rows:
        if len(row) != 3:
            raise MalformedRow(line, f"expected 3 cells, got {len(row)}")
        ts = parse_timestamp(row[0], line)
        sid = row[1].strip()
        if sid not in known:
            raise UnknownStation(f"line {line}: sensor {sid!r} not in grid_sensors")
        v = _parse_float(row[2], line)
        if v is None:
            continue
        if v < 0:
            raise NegativeConcentration(f"line {line}: pm25 = {v} is negative")
        readings[(sid, ts)] = v
    return GridSensorSet(sensors=sensors, readings=readings)


def align_to_tensor_cadence(
    series: AuxiliarySeries, tensor_times: Sequence[datetime]
) -> AuxiliarySeries:
    """Average fine-cadence samples onto the tensor grid.

    Each tensor timestamp T receives the mean of the samples falling in
    the preceding interval (T - step, T]; windows with no samples stay
    missing, windows missing some samples are flagged partial.
    """
    times = sorted(tensor_times)
    step = _modal_step(times)
    if step is None or series.cadence is None:
        raise IncompatibleCadence("need at least two timestamps on both grids")
    if series.cadence > step or (step % series.cadence) != timedelta(0):
        raise IncompatibleCadence(
            f"series cadence {series.cadence} does not divide tensor step {step}"
        )
    expected = step // series.cadence

    by_station: dict[str, list[tuple[datetime, float]]] = defaultdict(list)
    for (sid, ts), v in series.samples.items():
        by_station[sid].append((ts, v))
    for sid in by_station:
        by_station[sid].sort()

    aligned: dict[tuple[str, datetime], float] = {}
    partial: set[tuple[str, datetime]] = set()
    for sid, points in by_station.items():
        stamps = [ts for ts, _ in points]
        vals = [v for _, v in points]
        lo = 0
        for T in times:
            start = T - step
            # advance to the first sample with ts > start
            while lo < len(stamps) and stamps[lo] <= start:
                lo += 1
            hi = lo
            while hi < len(stamps) and stamps[hi] <= T:
                hi += 1
            window = vals[lo:hi]
            if window:
                aligned[(sid, T)] = float(np.mean(window))
                if len(window) < expected:
                    partial.add((sid, T))
    return AuxiliarySeries(
        kind=series.kind,
        name=series.name,
        samples=aligned,
        cadence=step,
        partial_cells=frozenset(partial),
    )


# -------- writers (used by the synthetic generator and round-trip tests) --------

def write_stations(catalog: StationCatalog, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["station_id", "name", "lat", "lon"])
        for e in catalog.entries:
            w.writerow([e.station_id, e.name, repr(float(e.lat)), repr(float(e.lon))])


def write_species(tensor: SpatioTemporalTensor, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp", "station_id", *tensor.feature_index])
        for i, ts in enumerate(tensor.time_index):
            for j, sid in enumerate(tensor.station_index):
                cells = [
                    repr(float(tensor.values[i, j, f])) if tensor.mask[i, j, f] else ""
                    for f in range(len(tensor.feature_index))
                ]
                w.writerow([format_timestamp(ts), sid, *cells])


def write_auxiliary(series_list: Sequence[AuxiliarySeries], path: str | Path) -> None:
    names = [s.name for s in series_list]
    keys = sorted({k for s in series_list for k in s.samples}, key=lambda k: (k[1], k[0]))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp", "station_id", *names])
        for sid, ts in keys:
            cells = [
                repr(float(s.samples[(sid, ts)])) if (sid, ts) in s.samples else ""
                for s in series_list
            ]
            w.writerow([format_timestamp(ts), sid, *cells])


def write_grid(grid: GridSensorSet, sensors_path: str | Path, readings_path: str | Path) -> None:
    with open(sensors_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["sensor_id", "lat", "lon"])
        for sid, lat, lon in grid.sensors:
            w.writerow([sid, repr(float(lat)), repr(float(lon))])
    with open(readings_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp", "sensor_id", "pm25"])
        for (sid, ts), v in sorted(grid.readings.items(), key=lambda kv: (kv[0][1], kv[0][0])):
            w.writerow([format_timestamp(ts), sid, repr(float(v))])
