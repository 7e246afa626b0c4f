from datetime import datetime, timedelta, timezone
from statistics import mean

import numpy as np
import pytest

from aerofactor.errors import (
    DuplicateSample,
    IncompatibleCadence,
    IrregularCadenceWarning,
    MalformedRow,
    NegativeConcentration,
    UnknownStation,
)
from aerofactor.ingest import (
    AuxiliarySeries,
    StationCatalog,
    StationInfo,
    align_to_tensor_cadence,
    load_auxiliary,
    load_grid,
    load_species,
    load_stations,
    parse_timestamp,
    write_species,
)

UTC = timezone.utc


def catalog(*ids):
    return StationCatalog(
        entries=tuple(StationInfo(i, i, 24.0, 120.0) for i in ids)
    )


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadSpecies:
    def test_complete_grid(self, tmp_path):
        path = write(
            tmp_path,
            "species.csv",
            "timestamp,station_id,a,b\n"
            "2018-03-12T08:00:00Z,S1,1.0,2.0\n"
            "2018-03-12T20:00:00Z,S1,3.0,4.0\n",
        )
        tensor = load_species(path, catalog("S1"))
        assert tensor.shape == (2, 1, 2)
        assert tensor.mask.all()
        np.testing.assert_array_equal(tensor.values[0, 0], [1.0, 2.0])

    def test_absent_cell_masked(self, tmp_path):
        path = write(
            tmp_path,
            "species.csv",
            "timestamp,station_id,a,b\n"
            "2018-03-12T08:00:00Z,S1,1.0,2.0\n"
            "2018-03-12T20:00:00Z,S1,3.0,\n",
        )
        tensor = load_species(path, catalog("S1"))
        assert not tensor.mask[1, 0, 1]
        assert tensor.mask[1, 0, 0]

    def test_twelve_hourly_stamps(self, tmp_path):
        # two-a-day cadence: t equals the number of distinct stamps
        rows = []
        stamps = []
        for day in (12, 13, 14):
            for hour in (8, 20):
                stamps.append(f"2018-03-{day}T{hour:02d}:00:00Z")
        for s in stamps:
            rows.append(f"{s},S1,1.0")
        path = write(
            tmp_path, "species.csv", "timestamp,station_id,a\n" + "\n".join(rows) + "\n"
        )
        tensor = load_species(path, catalog("S1"))
        assert tensor.shape[0] == len(stamps)

    def test_negative_rejected(self, tmp_path):
        path = write(
            tmp_path,
            "species.csv",
            "timestamp,station_id,a\n2018-03-12T08:00:00Z,S1,-0.5\n",
        )
        with pytest.raises(NegativeConcentration, match="line 2"):
            load_species(path, catalog("S1"))

    def test_unknown_station(self, tmp_path):
        path = write(
            tmp_path,
            "species.csv",
            "timestamp,station_id,a\n2018-03-12T08:00:00Z,S9,1.0\n",
        )
        with pytest.raises(UnknownStation):
            load_species(path, catalog("S1"))

    def test_malformed_row_carries_line(self, tmp_path):
        path = write(
            tmp_path,
            "species.csv",
            "timestamp,station_id,a\n2018-03-12T08:00:00Z,S1,oops\n",
        )
        with pytest.raises(MalformedRow) as exc:
            load_species(path, catalog("S1"))
        assert exc.value.line == 2

    def test_duplicate_cell(self, tmp_path):
        path = write(
            tmp_path,
            "species.csv",
            "timestamp,station_id,a\n"
            "2018-03-12T08:00:00Z,S1,1.0\n"
            "2018-03-12T08:00:00Z,S1,2.0\n",
        )
        with pytest.raises(DuplicateSample, match="lines 2 and 3"):
            load_species(path, catalog("S1"))

    def test_roundtrip_preserves_tensor_and_mask(self, tmp_path, rng):
        cat = catalog("S1", "S2")
        values = rng.uniform(0, 5, size=(3, 2, 2)).round(6)
        rows = ["timestamp,station_id,a,b"]
        t0 = datetime(2018, 3, 12, 8, tzinfo=UTC)
        for i in range(3):
            for j, sid in enumerate(cat.ids):
                if i == 2 and j == 1:
                    continue  # drop one full row
                a = repr(float(values[i, j, 0]))
                b = "" if (i == 1 and j == 0) else repr(float(values[i, j, 1]))
                stamp = (t0 + i * timedelta(hours=12)).strftime("%Y-%m-%dT%H:%M:%SZ")
                rows.append(f"{stamp},{sid},{a},{b}")
        path = write(tmp_path, "species.csv", "\n".join(rows) + "\n")
        first = load_species(path, cat)
        write_species(first, tmp_path / "again.csv")
        second = load_species(tmp_path / "again.csv", cat)
        np.testing.assert_array_equal(first.mask, second.mask)
        np.testing.assert_array_equal(
            first.values[first.mask], second.values[second.mask]
        )
        assert first.time_index == second.time_index


class TestLoadAuxiliary:
    def test_one_series_per_measure(self, tmp_path):
        path = write(
            tmp_path,
            "pollutants.csv",
            "timestamp,station_id,pm25,no2\n"
            "2018-03-12T00:00:00Z,S1,10,1\n"
            "2018-03-12T01:00:00Z,S1,11,2\n"
            "2018-03-12T02:00:00Z,S1,12,3\n",
        )
        series = load_auxiliary(path, "pollutant")
        assert [s.name for s in series] == ["pm25", "no2"]
        assert all(len(s.samples) == 3 for s in series)
        assert series[0].cadence == timedelta(hours=1)

    def test_duplicate_names_both_lines(self, tmp_path):
        path = write(
            tmp_path,
            "pollutants.csv",
            "timestamp,station_id,pm25\n"
            "2018-03-12T00:00:00Z,S1,10\n"
            "2018-03-12T00:00:00Z,S1,11\n",
        )
        with pytest.raises(DuplicateSample, match="lines 2 and 3"):
            load_auxiliary(path, "pollutant")

    def test_hourly_61_days_series_length(self, tmp_path):
        t0 = datetime(2020, 8, 1, 0, tzinfo=UTC)
        rows = ["timestamp,station_id,pm25"]
        hours = 61 * 24
        for h in range(hours):
            stamp = (t0 + h * timedelta(hours=1)).strftime("%Y-%m-%dT%H:%M:%SZ")
            rows.append(f"{stamp},S1,1.0")
        path = write(tmp_path, "pollutants.csv", "\n".join(rows) + "\n")
        series = load_auxiliary(path, "pollutant")
        assert len(series[0].samples) == 1464

    def test_irregular_cadence_warns(self, tmp_path):
        stamps = [
            "2018-03-12T00:00:00Z",
            "2018-03-12T01:00:00Z",
            "2018-03-12T03:30:00Z",
            "2018-03-12T07:00:00Z",
        ]
        rows = ["timestamp,station_id,pm25"] + [f"{s},S1,1.0" for s in stamps]
        path = write(tmp_path, "pollutants.csv", "\n".join(rows) + "\n")
        with pytest.warns(IrregularCadenceWarning):
            load_auxiliary(path, "pollutant")


class TestAlign:
    def _hourly(self, values, station="S1", start=None):
        start = start or datetime(2018, 3, 11, 21, tzinfo=UTC)
        samples = {
            (station, start + i * timedelta(hours=1)): float(v)
            for i, v in enumerate(values)
            if v is not None
        }
        return AuxiliarySeries(
            kind="pollutant", name="pm25", samples=samples, cadence=timedelta(hours=1)
        )

    def test_window_mean(self):
        # 12 hourly samples in the window ending at the stamp -> mean 6.5
        start = datetime(2018, 3, 12, 9, tzinfo=UTC)
        series = self._hourly(range(1, 13), start=start)
        target = (datetime(2018, 3, 12, 20, tzinfo=UTC), datetime(2018, 3, 13, 8, tzinfo=UTC))
        aligned = align_to_tensor_cadence(series, target)
        assert aligned.samples[("S1", target[0])] == pytest.approx(6.5)

    def test_empty_window_missing(self):
        series = self._hourly([1.0] * 12, start=datetime(2018, 3, 12, 9, tzinfo=UTC))
        times = (
            datetime(2018, 3, 12, 20, tzinfo=UTC),
            datetime(2018, 3, 13, 8, tzinfo=UTC),
            datetime(2018, 3, 13, 20, tzinfo=UTC),
        )
        aligned = align_to_tensor_cadence(series, times)
        assert ("S1", times[2]) not in aligned.samples

    def test_partial_window_flagged(self):
        values = [4.0, None, None, 8.0, None, None, None, None, None, None, None, 9.0]
        series = self._hourly(values, start=datetime(2018, 3, 12, 9, tzinfo=UTC))
        target = datetime(2018, 3, 12, 20, tzinfo=UTC)
        aligned = align_to_tensor_cadence(series, (target, target + timedelta(hours=12)))
        assert aligned.samples[("S1", target)] == pytest.approx(mean([4.0, 8.0, 9.0]))
        assert ("S1", target) in aligned.partial_cells

    def test_incompatible_cadence(self):
        series = AuxiliarySeries(
            kind="pollutant",
            name="pm25",
            samples={("S1", datetime(2018, 3, 12, tzinfo=UTC)): 1.0,
                     ("S1", datetime(2018, 3, 12, 5, tzinfo=UTC)): 2.0},
            cadence=timedelta(hours=5),
        )
        times = (
            datetime(2018, 3, 12, 8, tzinfo=UTC),
            datetime(2018, 3, 12, 20, tzinfo=UTC),
        )
        with pytest.raises(IncompatibleCadence):
            align_to_tensor_cadence(series, times)

    def test_commutes_with_station_subsetting(self, rng):
        start = datetime(2018, 3, 12, 9, tzinfo=UTC)
        samples = {}
        for sid in ("S1", "S2", "S3"):
            for h in range(24):
                if rng.uniform() < 0.8:
                    samples[(sid, start + h * timedelta(hours=1))] = float(
                        rng.uniform(0, 50)
                    )
        series = AuxiliarySeries(
            kind="pollutant", name="pm25", samples=samples, cadence=timedelta(hours=1)
        )
        times = (
            datetime(2018, 3, 12, 20, tzinfo=UTC),
            datetime(2018, 3, 13, 8, tzinfo=UTC),
        )
        a = align_to_tensor_cadence(series, times).subset(["S1", "S3"])
        b = align_to_tensor_cadence(series.subset(["S1", "S3"]), times)
        assert a.samples == b.samples
        assert a.partial_cells == b.partial_cells


class TestOtherLoaders:
    def test_stations(self, tmp_path):
        path = write(
            tmp_path,
            "stations.csv",
            "station_id,name,lat,lon\nS1,North,24.1,120.5\nS2,South,23.9,120.6\n",
        )
        cat = load_stations(path)
        assert cat.ids == ("S1", "S2")
        assert cat.entries[0].lat == pytest.approx(24.1)

    def test_station_bounds(self, tmp_path):
        path = write(
            tmp_path, "stations.csv", "station_id,name,lat,lon\nS1,x,123.0,0.0\n"
        )
        with pytest.raises(MalformedRow):
            load_stations(path)

    def test_grid(self, tmp_path):
        s = write(tmp_path, "grid_sensors.csv", "sensor_id,lat,lon\nG1,24.0,120.0\n")
        r = write(
            tmp_path,
            "grid_readings.csv",
            "timestamp,sensor_id,pm25\n2018-03-12T00:00:00Z,G1,33.0\n",
        )
        grid = load_grid(s, r)
        assert len(grid.sensors) == 1
        assert list(grid.readings.values()) == [33.0]

    def test_grid_unknown_sensor(self, tmp_path):
        s = write(tmp_path, "grid_sensors.csv", "sensor_id,lat,lon\nG1,24.0,120.0\n")
        r = write(
            tmp_path,
            "grid_readings.csv",
            "timestamp,sensor_id,pm25\n2018-03-12T00:00:00Z,G9,33.0\n",
        )
        with pytest.raises(UnknownStation):
            load_grid(s, r)


def test_parse_timestamp_variants():
    expect = datetime(2018, 3, 12, 8, tzinfo=UTC)
    assert parse_timestamp("2018-03-12T08:00:00Z") == expect
    assert parse_timestamp("2018-03-12T08:00:00+00:00") == expect
    assert parse_timestamp("2018-03-12T16:00:00+08:00") == expect
    assert parse_timestamp("2018-03-12T08:00:00") == expect
