"""Command line entry point: ``ricci-market analyze|forecast|report``."""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from pathlib import Path

from . import pipeline
from .config import ENV_CONFIG, PipelineConfig
from .curvature import CurvatureSeries
from .exceptions import InputIOError, MissingArtifactError, RicciMarketError


def _bool_flag(parser, name, help):
    parser.add_argument(f"--{name}", dest=name.replace("-", "_"),
                        action=argparse.BooleanOptionalAction, default=None, help=help)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ricci-market",
                                     description="Ricci curvature of stock correlation networks")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"config file (or ${ENV_CONFIG})")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("--jobs", type=int, help="parallel workers")
    common.add_argument("--curvatures", help="comma list of or,fr,mr,hr")
    sub = parser.add_subparsers(dest="command", required=True)

    an = sub.add_parser("analyze", parents=[common], help="prices -> curvature series")
    an.add_argument("--input", help="price CSV")
    an.add_argument("--scheme", choices=["non-overlapping", "rolling"])
    an.add_argument("--tau", type=int)
    an.add_argument("--delta", type=int)
    an.add_argument("--theta", type=float)
    _bool_flag(an, "dump-networks", "write one edge-list file per window")

    fc = sub.add_parser("forecast", parents=[common], help="curvature series -> forecasts")
    fc.add_argument("--curvature", help=f"curvature CSV (default <out>/{pipeline.CURVATURE_FILE})")
    fc.add_argument("--levels", type=int)
    fc.add_argument("--wavelet")
    _bool_flag(fc, "baseline", "also run the plain LSTM")
    _bool_flag(fc, "denoise", "threshold wavelet details before forecasting")
    fc.add_argument("--threshold", type=float)
    fc.add_argument("--mode", choices=["soft", "hard"])

    sub.add_parser("report", parents=[common], help="metrics table from forecast reports")
    return parser


def resolve_config(args) -> PipelineConfig:
    path = args.config or os.environ.get(ENV_CONFIG)
    cfg = PipelineConfig.load(path) if path else PipelineConfig()
    overrides = {k: v for k, v in vars(args).items()
                 if k not in ("command", "config", "curvature")}
    return cfg.updated(**overrides)


def cmd_analyze(cfg: PipelineConfig) -> str:
    series, nets = pipeline.analyze(cfg)
    out = Path(cfg.out)
    pipeline.write_atomic(out / pipeline.CURVATURE_FILE, series.to_csv())
    if cfg.dump_networks:
        for k, (date, net) in enumerate(zip(series.dates, nets)):
            pipeline.write_atomic(out / "networks" / f"window_{k:05d}_{date}.txt", net.dumps())
    return f"{len(series)} windows -> {out / pipeline.CURVATURE_FILE}"


def cmd_forecast(cfg: PipelineConfig, curvature_path=None) -> str:
    out = Path(cfg.out)
    path = Path(curvature_path) if curvature_path else out / pipeline.CURVATURE_FILE
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputIOError(f"cannot read {path}: {exc.strerror}") from exc
    series = CurvatureSeries.from_csv(text)
    reports = pipeline.forecast(cfg, series)
    for kind, dec in pipeline.decompositions(cfg, series).items():
        pipeline.write_atomic(out / f"decomposition_{kind}.csv", dec.to_csv())
    for model, report in reports.items():
        pipeline.write_atomic(out / pipeline.report_file(model), report.to_json())
        for kind, res in report.results.items():
            pipeline.write_atomic(out / f"forecast_{model}_{kind}.csv", res.to_csv())
    return "\n".join(f"{m}: {', '.join(r.results)}" for m, r in reports.items())


def cmd_report(cfg: PipelineConfig) -> str:
    out = Path(cfg.out)
    if not out.is_dir():
        raise MissingArtifactError(f"output directory {out} does not exist")
    rows = pipeline.metrics_table(pipeline.load_reports(out))
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    pipeline.write_atomic(out / "report.csv", buf.getvalue())
    text = pipeline.format_table(rows)
    pipeline.write_atomic(out / "report.txt", text)
    return text


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "analyze":
            msg = cmd_analyze(cfg)
        elif args.command == "forecast":
            msg = cmd_forecast(cfg, args.curvature)
        else:
            msg = cmd_report(cfg)
    except RicciMarketError as exc:
        print(f"ricci-market: error[{exc.error_class}]: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"ricci-market: error[io]: {exc}", file=sys.stderr)
        return InputIOError.exit_code
    print(msg)
    return 0


if __name__ == "__main__":
    sys.exit(main())
