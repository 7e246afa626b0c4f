"""Batch front-end: full pipeline runs, the synthetic generator, factor
count diagnostics, and the service launcher.

Exit codes: 0 success, 2 validation/usage errors, 3 pipeline failure.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import jsonio, pipeline, synth
from .errors import AerofactorError, ConfigBounds
from .factorization import select_p_diagnostics
from .tensor import impute, unfold

EXIT_VALIDATION = 2
EXIT_PIPELINE = 3


def _alpha_mode(text: str):
    if text == "auto":
        return "auto"
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("alpha must be 'auto' or a number")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aerofactor",
        description="Pollution-source analytics over spatiotemporal sensor data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute the full pipeline and export views")
    run.add_argument("--data", required=True, help="directory with the six CSV inputs")
    run.add_argument("--p", type=int, required=True, help="number of pollution sources")
    run.add_argument("--k", type=int, required=True, help="number of station clusters")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--dr-method", choices=pipeline.DR_METHODS, default="umap")
    run.add_argument("--alpha", type=_alpha_mode, default="auto")
    run.add_argument("--impute", choices=pipeline.IMPUTE_POLICIES, default="interpolate")
    run.add_argument("--cell-deg", type=float, default=0.05)
    run.add_argument("--n-neighbors", type=int, default=None)
    run.add_argument("--min-dist", type=float, default=0.1)
    run.add_argument("--n-epochs", type=int, default=500)
    run.add_argument("--no-figures", action="store_true", help="skip PNG rendering")

    sy = sub.add_parser("synth", help="generate a synthetic dataset with ground truth")
    sy.add_argument("--stations", type=int, default=12)
    sy.add_argument("--timestamps", type=int, default=40)
    sy.add_argument("--species", type=int, default=20)
    sy.add_argument("--sources", type=int, default=3)
    sy.add_argument("--clusters", type=int, default=3)
    sy.add_argument("--seed", type=int, default=0)
    sy.add_argument("--snr-db", type=float, default=25.0)
    sy.add_argument("--grid-sensors", type=int, default=24)
    sy.add_argument("--out", required=True)

    dp = sub.add_parser("diag-p", help="explained variance per candidate source count")
    dp.add_argument("--data", required=True)
    dp.add_argument("--pmin", type=int, required=True)
    dp.add_argument("--pmax", type=int, required=True)
    dp.add_argument("--seed", type=int, default=0)
    dp.add_argument("--impute", choices=pipeline.IMPUTE_POLICIES, default="interpolate")

    sv = sub.add_parser("serve", help="start the HTTP service")
    sv.add_argument("--host", default="127.0.0.1")
    sv.add_argument("--port", type=int, default=None, help="default AEROFACTOR_PORT or 8571")
    sv.add_argument("--data-dir", default=None, help="default AEROFACTOR_DATA_DIR")
    return parser


def _cmd_run(args) -> int:
    config = pipeline.PipelineConfig(
        p=args.p,
        k=args.k,
        seed=args.seed,
        dr_method=args.dr_method,
        n_neighbors=args.n_neighbors,
        min_dist=args.min_dist,
        n_epochs=args.n_epochs,
        alpha_mode=args.alpha,
        impute_policy=args.impute,
        cell_deg=args.cell_deg,
    )
    try:
        config.validate()
        dataset = pipeline.load_dataset(args.data)
        pipeline.validate_config_against(config, dataset)
    except (AerofactorError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    try:
        result = pipeline.run_pipeline(dataset, config)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        jsonio.dump_path(pipeline.payload_sources(result), out / "sources.json")
        jsonio.dump_path(pipeline.payload_similarity(result), out / "similarity.json")
        jsonio.dump_path(
            pipeline.payload_characteristics(result), out / "characteristics.json"
        )
        jsonio.dump_path(
            {
                "sources": pipeline.payload_transitions_sources(result),
                "pm25": pipeline.payload_transitions_pm25(result),
            },
            out / "transitions.json",
        )
        from . import report

        report.write_report(result, out / "report.txt")
        if not args.no_figures:
            report.render_figures(result, out / "figures")
    except Exception as exc:  # pipeline failure after validation
        print(f"pipeline failed: {exc}", file=sys.stderr)
        return EXIT_PIPELINE
    return 0


def _cmd_synth(args) -> int:
    params = synth.SynthParams(
        stations=args.stations,
        timestamps=args.timestamps,
        species=args.species,
        sources=args.sources,
        clusters=args.clusters,
        seed=args.seed,
        snr_db=args.snr_db,
        grid_sensors=args.grid_sensors,
    )
    try:
        data = synth.generate(params)
    except ConfigBounds as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    synth.write_dataset(data, args.out)
    return 0


def _cmd_diag_p(args) -> int:
    if args.pmin > args.pmax or args.pmin < 1:
        print("error: need 1 <= pmin <= pmax", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        dataset = pipeline.load_dataset(args.data)
        tensor = impute(dataset.tensor, args.impute)
        matrix = unfold(tensor)
    except (AerofactorError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        rows = select_p_diagnostics(matrix, range(args.pmin, args.pmax + 1), seed=args.seed)
    except AerofactorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    print("p\texplained_variance_ratio\tobjective")
    for p, evr, obj in rows:
        print(f"{p}\t{format(evr, '.17g')}\t{format(obj, '.17g')}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    port = args.port or int(os.environ.get("AEROFACTOR_PORT", "8571"))
    data_dir = args.data_dir or os.environ.get("AEROFACTOR_DATA_DIR")
    app = create_app(data_dir=data_dir)
    uvicorn.run(app, host=args.host, port=port)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {
        "run": _cmd_run,
        "synth": _cmd_synth,
        "diag-p": _cmd_diag_p,
        "serve": _cmd_serve,
    }[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
