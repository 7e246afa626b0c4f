from datetime import datetime, timezone

import numpy as np
import pytest

from aerofactor import jsonio, pipeline, synth
from aerofactor.errors import ConfigBounds

UTC = timezone.utc


@pytest.fixture(scope="module")
def small_synth():
    return synth.generate(
        synth.SynthParams(stations=9, timestamps=20, species=12, sources=3, clusters=3, seed=5)
    )


@pytest.fixture(scope="module")
def result(small_synth):
    cfg = pipeline.PipelineConfig(p=3, k=3, seed=5, dr_method="pca2")
    return pipeline.run_pipeline(small_synth, cfg)


class TestConfig:
    def test_roundtrip(self):
        cfg = pipeline.PipelineConfig(p=4, k=2, seed=7, dr_method="pca2", alpha_mode=0.5)
        assert pipeline.PipelineConfig.from_dict(cfg.to_dict()) == cfg

    def test_unknown_field_rejected(self):
        with pytest.raises(ConfigBounds):
            pipeline.PipelineConfig.from_dict({"p": 1, "k": 1, "bogus": 2})

    @pytest.mark.parametrize(
        "field,value",
        [
            ("p", 0),
            ("k", 0),
            ("dr_method", "tsne"),
            ("impute_policy", "drop"),
            ("cell_deg", 0.0),
            ("alpha_mode", -1.0),
            ("n_neighbors", 1),
        ],
    )
    def test_bounds(self, field, value):
        base = {"p": 2, "k": 2}
        base[field] = value
        with pytest.raises(ConfigBounds):
            pipeline.PipelineConfig.from_dict(base)

    def test_data_dependent_bounds(self, small_synth):
        with pytest.raises(ConfigBounds):
            pipeline.validate_config_against(
                pipeline.PipelineConfig(p=3, k=10), small_synth
            )
        with pytest.raises(ConfigBounds):
            pipeline.validate_config_against(
                pipeline.PipelineConfig(p=13, k=2), small_synth
            )


class TestRun:
    def test_shapes(self, result, small_synth):
        t, n, d = small_synth.tensor.shape
        assert result.factorization.H_hat.values.shape == (3, d)
        assert result.factorization.W_hat.values.shape == (t * n, 3)
        assert result.embedding.Y.shape == (n, 3)
        assert result.embedding.Z.shape == (n, 2)
        assert len(result.embedding.cluster_labels) == n
        assert len(result.characteristics) == 3

    def test_contribution_rows_sum_to_one(self, result):
        sums = result.contributions.values.sum(axis=2)
        zero_rows = result.factorization.W_hat.zero_rows
        flat = sums.reshape(-1)
        keep = [r for r in range(flat.size) if r not in zero_rows]
        np.testing.assert_allclose(flat[keep], 1.0, atol=1e-9)

    def test_deterministic_payloads(self, small_synth):
        cfg = pipeline.PipelineConfig(p=3, k=3, seed=11)
        a = pipeline.run_pipeline(small_synth, cfg)
        b = pipeline.run_pipeline(small_synth, cfg)
        for build in (
            pipeline.payload_sources,
            pipeline.payload_similarity,
            pipeline.payload_characteristics,
            pipeline.payload_transitions_sources,
        ):
            assert jsonio.dumps(build(a)) == jsonio.dumps(build(b))

    def test_payload_fields(self, result):
        src = pipeline.payload_sources(result)
        assert src["seed"] == 5
        assert len(src["sources"]) == 3
        assert len(src["sources"][0]["concentrations"]) == 12
        assert src["ranking"] == src["ranking_full"][:15]
        assert src["correlations"]["rows"] == ["A", "B", "C"]

        sim = pipeline.payload_similarity(result)
        assert len(sim["Z"]) == 9 and len(sim["Z"][0]) == 2

        chars = pipeline.payload_characteristics(result)
        assert [c["cluster"] for c in chars["clusters"]] == [0, 1, 2]
        assert all(len(c["loadings"]) == 3 for c in chars["clusters"])

    def test_transitions_pm25_clipping(self, result, small_synth):
        full = pipeline.payload_transitions_pm25(result)
        ts = small_synth.tensor.time_index
        window = pipeline.payload_transitions_pm25(result, ts_from=ts[4], ts_to=ts[9])
        assert window["tensor_timestamps"][0] >= ts[4]
        assert window["tensor_timestamps"][-1] <= ts[9]
        assert len(window["tensor_timestamps"]) < len(full["tensor_timestamps"])
        sid = window["stations"][0]
        assert len(window["contributions"][sid]) == len(window["tensor_timestamps"])
        for a, b in window["dominance"][sid]:
            assert ts[4] <= a <= b <= ts[9]

    def test_transitions_pm25_unknown_station(self, result):
        with pytest.raises(ConfigBounds):
            pipeline.payload_transitions_pm25(result, stations=["nope"])

    def test_map_payload(self, result, small_synth):
        some_ts = small_synth.grid.timestamps()[0]
        payload = pipeline.payload_map(result, some_ts)
        assert len(payload["stations"]) == 9
        assert payload["grid"]["cells"]
        # a timestamp with no readings keeps stations but loses the grid
        empty = pipeline.payload_map(result, datetime(1999, 1, 1, tzinfo=UTC))
        assert len(empty["stations"]) == 9
        assert empty["grid"]["cells"] == []


class TestJsonio:
    def test_seventeen_significant_digits(self):
        assert jsonio.dumps(0.1) == "0.10000000000000001"
        assert jsonio.dumps(1.0) == "1"
        assert jsonio.dumps(float("nan")) == "null"
        assert jsonio.dumps({"a": [1, 2.5, None, True]}) == '{"a":[1,2.5,null,true]}'

    def test_roundtrip(self):
        payload = {"x": [0.1, 1e-17, 123456.789], "s": "hé"}
        again = jsonio.loads(jsonio.dumps(payload))
        assert again["x"] == payload["x"]
        assert again["s"] == payload["s"]

    def test_numpy_values(self):
        assert jsonio.dumps(np.float64(0.5)) == "0.5"
        assert jsonio.dumps(np.int64(3)) == "3"
        assert jsonio.dumps(np.array([1.0, 2.0])) == "[1,2]"


class TestRawWCorrelationFlag:
    def test_flag_switches_correlation_basis(self, small_synth):
        base = pipeline.run_pipeline(
            small_synth, pipeline.PipelineConfig(p=3, k=3, seed=5, correlate_raw_w=False)
        )
        raw = pipeline.run_pipeline(
            small_synth, pipeline.PipelineConfig(p=3, k=3, seed=5, correlate_raw_w=True)
        )
        assert not np.allclose(
            np.nan_to_num(base.correlations.r), np.nan_to_num(raw.correlations.r)
        )
        finite = raw.correlations.r[np.isfinite(raw.correlations.r)]
        assert np.all(np.abs(finite) <= 1.0)
        # everything outside the correlation view is untouched
        np.testing.assert_array_equal(
            base.embedding.Z, raw.embedding.Z
        )
