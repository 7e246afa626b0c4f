"""HTTP service: dataset upload, pipeline runs, and the six view payloads.

Datasets are persisted to a content-addressed directory under the data
dir (env AEROFACTOR_DATA_DIR). Run ids are content hashes of
(dataset_id, config), so re-posting an identical run returns the cached
result; a concurrent identical run is refused with 409. View payloads
are rendered once at run completion with the deterministic JSON emitter,
making every GET on a done run byte-identical.
"""
from __future__ import annotations

import hashlib
import os
import tempfile
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import Body, FastAPI, File, HTTPException, Query, UploadFile
from fastapi.responses import JSONResponse, Response

from . import jsonio, pipeline
from .errors import AerofactorError, ConfigBounds
from .ingest import parse_timestamp
from .pipeline import Dataset, PipelineConfig, PipelineResult

DATASET_FILES = (
    "stations",
    "species",
    "pollutants",
    "meteorology",
    "grid_sensors",
    "grid_readings",
)

VIEW_FILES = {
    "sources": pipeline.payload_sources,
    "similarity": pipeline.payload_similarity,
    "characteristics": pipeline.payload_characteristics,
    "transitions_sources": pipeline.payload_transitions_sources,
}


@dataclass
class RunRecord:
    run_id: str
    dataset_id: str
    config: PipelineConfig
    status: str = "pending"  # pending -> running -> done | failed
    error: str | None = None
    timings: dict = field(default_factory=dict)
    result: Optional[PipelineResult] = None
    rendered: dict[str, bytes] = field(default_factory=dict)

    def to_status(self) -> dict:
        return {
            "run_id": self.run_id,
            "dataset_id": self.dataset_id,
            "config": self.config.to_dict(),
            "status": self.status,
            "error": self.error,
            "timings": self.timings,
        }


class Registry:
    """Single mutual-exclusion domain guarding datasets and runs."""

    def __init__(self, data_dir: Path):
        self.data_dir = data_dir
        self.lock = threading.Lock()
        self.datasets: dict[str, Dataset] = {}
        self.runs: dict[str, RunRecord] = {}

    def dataset_dir(self, dataset_id: str) -> Path:
        return self.data_dir / "datasets" / dataset_id

    def get_dataset(self, dataset_id: str) -> Dataset:
        with self.lock:
            if dataset_id in self.datasets:
                return self.datasets[dataset_id]
        ddir = self.dataset_dir(dataset_id)
        if not ddir.is_dir():
            raise HTTPException(404, f"unknown dataset {dataset_id}")
        ds = pipeline.load_dataset(ddir)
        with self.lock:
            self.datasets[dataset_id] = ds
        return ds


def _dataset_id(files: dict[str, bytes]) -> str:
    h = hashlib.sha256()
    for name in sorted(files):
        h.update(name.encode())
        h.update(b"\0")
        h.update(files[name])
        h.update(b"\0")
    return h.hexdigest()[:16]


def _run_id(dataset_id: str, config: PipelineConfig) -> str:
    blob = dataset_id + "\0" + jsonio.dumps(config.to_dict())
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _validation_report(ds: Dataset) -> dict:
    t, n, d = ds.tensor.shape
    return {
        "species": {
            "timestamps": t,
            "stations": n,
            "features": d,
            "missing_cells": int((~ds.tensor.mask).sum()),
        },
        "pollutants": {
            "series": [s.name for s in ds.pollutants],
            "samples": sum(len(s.samples) for s in ds.pollutants),
        },
        "meteorology": {
            "series": [s.name for s in ds.meteorology],
            "samples": sum(len(s.samples) for s in ds.meteorology),
        },
        "grid": {
            "sensors": len(ds.grid.sensors),
            "readings": len(ds.grid.readings),
        },
    }


def _execute_run(registry: Registry, record: RunRecord) -> None:
    with registry.lock:
        record.status = "running"
    try:
        dataset = registry.get_dataset(record.dataset_id)
        result = pipeline.run_pipeline(dataset, record.config)
        rendered = {
            name: (jsonio.dumps(build(result)) + "\n").encode()
            for name, build in VIEW_FILES.items()
        }
        run_dir = registry.data_dir / "runs" / record.run_id
        run_dir.mkdir(parents=True, exist_ok=True)
        for name, data in rendered.items():
            (run_dir / f"{name}.json").write_bytes(data)
        with registry.lock:
            record.result = result
            record.rendered = rendered
            record.timings = {k: float(v) for k, v in result.timings.items()}
            record.status = "done"
    except Exception as exc:  # failure is a terminal run state, not a crash
        with registry.lock:
            record.status = "failed"
            record.error = f"{type(exc).__name__}: {exc}"


def create_app(data_dir: str | Path | None = None) -> FastAPI:
    if data_dir is None:
        data_dir = os.environ.get("AEROFACTOR_DATA_DIR") or tempfile.mkdtemp(
            prefix="aerofactor-"
        )
    registry = Registry(Path(data_dir))
    registry.data_dir.mkdir(parents=True, exist_ok=True)

    app = FastAPI(title="aerofactor", version="0.1.0")
    app.state.registry = registry

    def get_run(run_id: str, require_done: bool = True) -> RunRecord:
        with registry.lock:
            record = registry.runs.get(run_id)
        if record is None:
            raise HTTPException(404, f"unknown run {run_id}")
        if require_done:
            if record.status == "failed":
                raise HTTPException(409, f"run failed: {record.error}")
            if record.status != "done":
                raise HTTPException(409, f"run is {record.status}")
        return record

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/datasets", status_code=201)
    async def post_dataset(
        stations: UploadFile | None = File(None),
        species: UploadFile | None = File(None),
        pollutants: UploadFile | None = File(None),
        meteorology: UploadFile | None = File(None),
        grid_sensors: UploadFile | None = File(None),
        grid_readings: UploadFile | None = File(None),
    ):
        uploads = {
            "stations": stations,
            "species": species,
            "pollutants": pollutants,
            "meteorology": meteorology,
            "grid_sensors": grid_sensors,
            "grid_readings": grid_readings,
        }
        if uploads["stations"] is None:
            raise HTTPException(400, {"file": "stations.csv", "error": "catalog required"})
        for name, up in uploads.items():
            if up is None:
                raise HTTPException(400, {"file": f"{name}.csv", "error": "file required"})
        contents = {name: await up.read() for name, up in uploads.items()}

        dataset_id = _dataset_id(contents)
        ddir = registry.dataset_dir(dataset_id)
        ddir.mkdir(parents=True, exist_ok=True)
        for name, blob in contents.items():
            (ddir / f"{name}.csv").write_bytes(blob)
        # validate by loading; surface the failing file and line
        current = "stations"
        try:
            from . import ingest

            catalog = ingest.load_stations(ddir / "stations.csv")
            current = "species"
            tensor = ingest.load_species(ddir / "species.csv", catalog)
            current = "pollutants"
            pol = ingest.load_auxiliary(ddir / "pollutants.csv", "pollutant")
            current = "meteorology"
            met = ingest.load_auxiliary(ddir / "meteorology.csv", "meteorology")
            current = "grid_sensors"
            grid = ingest.load_grid(ddir / "grid_sensors.csv", ddir / "grid_readings.csv")
        except AerofactorError as exc:
            for f in ddir.iterdir():
                f.unlink()
            ddir.rmdir()
            raise HTTPException(
                400, {"file": f"{current}.csv", "error": str(exc)}
            ) from None
        ds = Dataset(
            catalog=catalog, tensor=tensor, pollutants=pol, meteorology=met, grid=grid
        )
        with registry.lock:
            registry.datasets[dataset_id] = ds
        return {"dataset_id": dataset_id, "report": _validation_report(ds)}

    @app.post("/datasets/{dataset_id}/runs")
    def post_run(dataset_id: str, config: dict = Body(...)):
        dataset = registry.get_dataset(dataset_id)
        try:
            cfg = PipelineConfig.from_dict(config)
            pipeline.validate_config_against(cfg, dataset)
        except (ConfigBounds, TypeError) as exc:
            raise HTTPException(422, str(exc)) from None
        run_id = _run_id(dataset_id, cfg)
        with registry.lock:
            existing = registry.runs.get(run_id)
            if existing is not None:
                if existing.status in ("pending", "running"):
                    raise HTTPException(409, f"identical run {run_id} is {existing.status}")
                return JSONResponse(existing.to_status(), status_code=200)
            record = RunRecord(run_id=run_id, dataset_id=dataset_id, config=cfg)
            registry.runs[run_id] = record
        thread = threading.Thread(
            target=_execute_run, args=(registry, record), daemon=True
        )
        thread.start()
        return JSONResponse(record.to_status(), status_code=202)

    @app.get("/runs/{run_id}")
    def run_status(run_id: str):
        return get_run(run_id, require_done=False).to_status()

    def rendered_view(run_id: str, name: str) -> Response:
        record = get_run(run_id)
        return Response(record.rendered[name], media_type="application/json")

    @app.get("/runs/{run_id}/sources")
    def view_sources(run_id: str):
        return rendered_view(run_id, "sources")

    @app.get("/runs/{run_id}/similarity")
    def view_similarity(run_id: str):
        return rendered_view(run_id, "similarity")

    @app.get("/runs/{run_id}/characteristics")
    def view_characteristics(run_id: str):
        return rendered_view(run_id, "characteristics")

    @app.get("/runs/{run_id}/transitions/sources")
    def view_transitions_sources(run_id: str):
        return rendered_view(run_id, "transitions_sources")

    @app.get("/runs/{run_id}/map")
    def view_map(run_id: str, ts: str):
        record = get_run(run_id)
        try:
            stamp = parse_timestamp(ts)
        except AerofactorError:
            raise HTTPException(422, f"bad timestamp {ts!r}") from None
        payload = pipeline.payload_map(record.result, stamp)
        return Response(jsonio.dumps(payload) + "\n", media_type="application/json")

    @app.get("/runs/{run_id}/transitions/pm25")
    def view_transitions_pm25(
        run_id: str,
        stations: str | None = None,
        source: str | None = None,
        window_from: str | None = Query(None, alias="from"),
        window_to: str | None = Query(None, alias="to"),
    ):
        record = get_run(run_id)
        try:
            t0 = parse_timestamp(window_from) if window_from else None
            t1 = parse_timestamp(window_to) if window_to else None
        except AerofactorError:
            raise HTTPException(422, "bad time range") from None
        if t0 is not None and t1 is not None and t0 > t1:
            raise HTTPException(422, "bad time range: from > to")
        station_list = stations.split(",") if stations else None
        try:
            payload = pipeline.payload_transitions_pm25(
                record.result,
                stations=station_list,
                source=source,
                ts_from=t0,
                ts_to=t1,
            )
        except ConfigBounds as exc:
            raise HTTPException(422, str(exc)) from None
        return Response(jsonio.dumps(payload) + "\n", media_type="application/json")

    return app
