"""End-to-end pipeline steps shared by the CLI and library callers."""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from .config import PipelineConfig
from .curvature import CurvatureSeries, curvature_series, window_networks
from .exceptions import MissingArtifactError, TooShortError
from .forecast import (
    LSTM,
    MODELS,
    WD_LSTM,
    ForecastReport,
    lstm_forecast,
    named_stream,
    wd_lstm_forecast,
)
from .market_data import load_prices, log_returns, make_schedule
from .wavelet import denoise, dwt_multilevel

# Column order of the metrics table, as in the published comparison tables.
REPORT_KINDS = ("or", "mr", "hr", "fr")
REPORT_METRICS = (("MAE", "mae"), ("MSE", "mse"), ("R2", "r2"))

CURVATURE_FILE = "curvature.csv"


def write_atomic(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def analyze(cfg: PipelineConfig, source=None):
    """Prices -> windows -> threshold networks -> curvature series.

    Returns ``(series, networks)``.
    """
    prices = load_prices(source if source is not None else cfg.input)
    returns = log_returns(prices)
    schedule = make_schedule(returns.n_rows, cfg.scheme, cfg.tau, cfg.delta)
    nets = window_networks(returns, schedule, cfg.theta)
    series = curvature_series(nets, schedule.end_dates(returns), cfg.kinds,
                              cfg.max_path_length, cfg.hr_squared, n_jobs=cfg.jobs)
    return series, nets


def check_length(values, cfg: PipelineConfig) -> np.ndarray:
    x = np.asarray(values, dtype=float)
    if len(x) < 2 ** cfg.levels:
        raise TooShortError(f"{len(x)} rows is too short for {cfg.levels} wavelet levels")
    return x


def _threshold(cfg: PipelineConfig):
    return cfg.threshold if cfg.denoise else None


def forecast(cfg: PipelineConfig, series: CurvatureSeries) -> dict:
    """Forecast every requested kind; returns ``{model: ForecastReport}``."""
    spec = cfg.wavelet_spec()
    tc = cfg.train_config()
    kinds = [k for k in cfg.kinds if k in series.kinds]
    reports = {WD_LSTM: {}, LSTM: {}}
    for kind in kinds:
        x = check_length(series[kind], cfg)
        reports[WD_LSTM][kind] = wd_lstm_forecast(
            x, spec, tc, dates=series.dates, stream=named_stream(cfg.seed, kind, WD_LSTM),
            n_jobs=cfg.jobs, threshold=_threshold(cfg), mode=cfg.mode)
        if cfg.baseline:
            reports[LSTM][kind] = lstm_forecast(
                x, tc, dates=series.dates, stream=named_stream(cfg.seed, kind, LSTM))
    echo = cfg.forecast_echo()
    return {m: ForecastReport(m, echo, r) for m, r in reports.items() if r}


def decompositions(cfg: PipelineConfig, series: CurvatureSeries) -> dict:
    """The band series each WD-LSTM trains on, keyed by curvature kind."""
    out = {}
    for k in cfg.kinds:
        if k in series.kinds:
            dec = dwt_multilevel(check_length(series[k], cfg), cfg.wavelet_spec())
            out[k] = denoise(dec, cfg.threshold, cfg.mode) if cfg.denoise else dec
    return out


def report_file(model: str) -> str:
    return f"forecast_{model}.json"


def load_reports(out_dir) -> dict:
    out_dir = Path(out_dir)
    found = {}
    for model in MODELS:
        path = out_dir / report_file(model)
        if path.exists():
            found[model] = ForecastReport.from_json(path.read_text(encoding="utf-8"))
    if not found:
        raise MissingArtifactError(f"no forecast reports in {out_dir}")
    return found


def metrics_table(reports: dict) -> list[list[str]]:
    """CSV rows: ``model, metric, <kind columns>`` with one 3-row block per model."""
    rows = []
    for model in MODELS:
        if model not in reports:
            continue
        res = reports[model].results
        kinds = [k for k in REPORT_KINDS if k in res]
        rows.append(["model", "metric", *(k.upper() for k in kinds)])
        for label, key in REPORT_METRICS:
            cells = []
            for k in kinds:
                v = getattr(res[k], key)
                cells.append("undefined" if v is None else f"{v:.4f}")
            rows.append([model, label, *cells])
    return rows


def format_table(rows: list[list[str]]) -> str:
    """Aligned plain-text rendering of :func:`metrics_table` rows."""
    blocks, current = [], []
    for row in rows:
        if row[0] == "model" and current:
            blocks.append(current)
            current = []
        current.append(row)
    if current:
        blocks.append(current)
    out = []
    for block in blocks:
        header = [""] + block[0][2:]
        body = [[r[1]] + r[2:] for r in block[1:]]
        widths = [max(len(r[i]) for r in [header] + body) for i in range(len(header))]
        out.append(block[1][0])
        for r in [header] + body:
            out.append("  ".join(c.rjust(w) for c, w in zip(r, widths)))
        out.append("")
    return "\n".join(out)
