import json

import pytest

from aerofactor import cli

RUN_FILES = (
    "sources.json",
    "similarity.json",
    "characteristics.json",
    "transitions.json",
    "report.txt",
)


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    rc = cli.main(
        [
            "synth",
            "--stations", "9",
            "--timestamps", "20",
            "--species", "12",
            "--sources", "3",
            "--clusters", "3",
            "--seed", "3",
            "--out", str(out),
        ]
    )
    assert rc == 0
    return out


class TestSynth:
    def test_writes_all_files(self, data_dir):
        names = {p.name for p in data_dir.iterdir()}
        assert names == {
            "stations.csv",
            "species.csv",
            "pollutants.csv",
            "meteorology.csv",
            "grid_sensors.csv",
            "grid_readings.csv",
            "ground_truth.json",
        }

    def test_ground_truth_contents(self, data_dir):
        truth = json.loads((data_dir / "ground_truth.json").read_text())
        assert len(truth["profiles"]) == 3
        assert set(truth["clusters"].values()) == {0, 1, 2}
        assert truth["p"] == 3
        assert "dominance" in truth

    def test_fixed_seed_identical_csvs(self, tmp_path):
        for sub in ("a", "b"):
            rc = cli.main(
                ["synth", "--stations", "4", "--timestamps", "6", "--species", "6",
                 "--sources", "2", "--clusters", "2", "--seed", "9",
                 "--out", str(tmp_path / sub)]
            )
            assert rc == 0
        for name in ("stations.csv", "species.csv", "pollutants.csv", "ground_truth.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_bounds_exit_2(self, tmp_path, capsys):
        rc = cli.main(
            ["synth", "--stations", "2", "--clusters", "5", "--out", str(tmp_path / "x")]
        )
        assert rc == 2
        assert "error" in capsys.readouterr().err


class TestRun:
    def test_outputs_and_exit_code(self, data_dir, tmp_path):
        rc = cli.main(
            ["run", "--data", str(data_dir), "--p", "3", "--k", "3",
             "--seed", "3", "--out", str(tmp_path / "out")]
        )
        assert rc == 0
        for name in RUN_FILES:
            assert (tmp_path / "out" / name).exists()
        figures = list((tmp_path / "out" / "figures").glob("*.png"))
        assert len(figures) >= 5

    def test_missing_p_usage_error(self, data_dir, tmp_path):
        with pytest.raises(SystemExit) as exc:
            cli.main(["run", "--data", str(data_dir), "--k", "3", "--out", str(tmp_path)])
        assert exc.value.code == 2

    def test_k_exceeds_stations_exit_2(self, data_dir, tmp_path, capsys):
        rc = cli.main(
            ["run", "--data", str(data_dir), "--p", "3", "--k", "99",
             "--out", str(tmp_path / "out")]
        )
        assert rc == 2
        assert "k=99" in capsys.readouterr().err

    def test_bad_data_dir_exit_2(self, tmp_path):
        rc = cli.main(
            ["run", "--data", str(tmp_path / "nothing"), "--p", "2", "--k", "2",
             "--out", str(tmp_path / "out")]
        )
        assert rc == 2

    def test_pipeline_failure_exit_3(self, data_dir, tmp_path, capsys, monkeypatch):
        from aerofactor import pipeline as pl

        def boom(dataset, config):
            raise RuntimeError("stage exploded")

        monkeypatch.setattr(pl, "run_pipeline", boom)
        rc = cli.main(
            ["run", "--data", str(data_dir), "--p", "3", "--k", "3",
             "--out", str(tmp_path / "out")]
        )
        assert rc == 3
        assert "stage exploded" in capsys.readouterr().err

    def test_byte_identical_reruns(self, data_dir, tmp_path):
        for sub in ("r1", "r2"):
            rc = cli.main(
                ["run", "--data", str(data_dir), "--p", "3", "--k", "3",
                 "--seed", "7", "--out", str(tmp_path / sub)]
            )
            assert rc == 0
        r1 = sorted(p for p in (tmp_path / "r1").rglob("*") if p.is_file())
        assert len(r1) >= len(RUN_FILES)
        for f in r1:
            rel = f.relative_to(tmp_path / "r1")
            assert f.read_bytes() == (tmp_path / "r2" / rel).read_bytes(), rel


class TestDiagP:
    def test_table_shape_and_elbow(self, tmp_path, capsys):
        # rank-2 synthetic: two sources, plateau after p=2
        rc = cli.main(
            ["synth", "--stations", "6", "--timestamps", "16", "--species", "8",
             "--sources", "2", "--clusters", "2", "--seed", "4", "--snr-db", "inf",
             "--out", str(tmp_path / "d")]
        )
        assert rc == 0
        rc = cli.main(
            ["diag-p", "--data", str(tmp_path / "d"), "--pmin", "1", "--pmax", "4"]
        )
        assert rc == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert out[0].split("\t") == ["p", "explained_variance_ratio", "objective"]
        rows = [line.split("\t") for line in out[1:]]
        assert len(rows) == 4
        evr = {int(p): float(e) for p, e, _ in rows}
        assert evr[2] - evr[1] > 0.3
        assert evr[4] >= evr[2] - 1e-6

    def test_pmin_greater_than_pmax(self, tmp_path, capsys):
        rc = cli.main(
            ["diag-p", "--data", str(tmp_path), "--pmin", "3", "--pmax", "1"]
        )
        assert rc == 2
        assert "pmin" in capsys.readouterr().err
