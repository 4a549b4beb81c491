"""WD-LSTM and plain LSTM one-step-ahead forecasting with error metrics."""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, column_or_1d

from .exceptions import RicciMarketError, ValidationError
from .lstm import TrainConfig, split_index, train, walk_forward
from .wavelet import WaveletSpec, denoise, dwt_multilevel

WD_LSTM = "WD-LSTM"
LSTM = "LSTM"
MODELS = (WD_LSTM, LSTM)


def named_stream(seed, *names: str) -> np.random.SeedSequence:
    """Child seed for a named purpose, e.g. ``named_stream(7, "fr", "WD-LSTM", "d2")``.

    Each name is hashed with CRC-32 and appended to the spawn key of ``seed``
    (an int or a ``SeedSequence``), so a stream depends only on the root seed
    and its own names.
    """
    key = tuple(zlib.crc32(n.encode("utf-8")) for n in names)
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(entropy=seed.entropy, spawn_key=seed.spawn_key + key)
    return np.random.SeedSequence(entropy=int(seed), spawn_key=key)


def metrics(pred, actual) -> dict:
    """MAE, MSE and R^2; R^2 is ``None`` when the actuals have zero variance."""
    pred = np.asarray(pred, dtype=float)
    actual = np.asarray(actual, dtype=float)
    if pred.shape != actual.shape or pred.size == 0:
        raise ValidationError("predictions and actuals must have equal nonzero length")
    err = pred - actual
    mae = float(np.mean(np.abs(err)))
    mse = float(np.mean(err ** 2))
    # Test for constancy directly: the mean of repeated values can be off by
    # an ulp, which would leave a tiny positive total sum of squares.
    if np.ptp(actual) == 0.0:
        return {"mae": mae, "mse": mse, "r2": None}
    sst = float(np.sum((actual - actual.mean()) ** 2))
    r2 = 1.0 - float(np.sum(err ** 2)) / sst
    return {"mae": mae, "mse": mse, "r2": r2}


@dataclass
class ForecastResult:
    """Test-split forecast for one series under one model."""

    model: str
    dates: list
    actual: list
    predicted: list
    mae: float
    mse: float
    r2: Optional[float]
    # Test-split values outside the range each scaler was fitted on,
    # keyed by sub-series name ("series" for the plain model).
    saturated: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        lines = ["date,actual,predicted"]
        lines += [f"{d},{a!r},{p!r}" for d, a, p in zip(self.dates, self.actual, self.predicted)]
        return "\n".join(lines) + "\n"


def _out_of_range(values, scaler) -> int:
    v = np.asarray(values)
    return int(np.sum((v < scaler.min) | (v > scaler.max)))


def _fit_band(name, band, cfg, seed_seq):
    try:
        return train(band, cfg, rng=seed_seq)
    except RicciMarketError as exc:
        raise type(exc)(f"sub-series {name}: {exc}") from exc


def _result(model, series, predicted, split, dates, saturated) -> ForecastResult:
    actual = np.asarray(series, dtype=float)[split:]
    pred = np.asarray(predicted, dtype=float)[split:]
    m = metrics(pred, actual)
    test_dates = list(dates[split:]) if dates is not None else list(range(split, len(series)))
    return ForecastResult(model=model, dates=test_dates, actual=actual.tolist(),
                          predicted=pred.tolist(), saturated=saturated, **m)


def _seed_for(cfg: TrainConfig, stream, *names):
    return named_stream(cfg.seed if stream is None else stream, *names)


def lstm_forecast(series, cfg: TrainConfig = TrainConfig(), dates=None,
                  stream: Optional[np.random.SeedSequence] = None) -> ForecastResult:
    """Baseline: one LSTM trained directly on the series."""
    x = np.asarray(series, dtype=float).ravel()
    fit = _fit_band("series", x, cfg, _seed_for(cfg, stream, "series"))
    split = split_index(x.size, cfg.train_fraction)
    pred = walk_forward(fit.params, fit.scaler, x)
    sat = {"series": _out_of_range(x[split:], fit.scaler)}
    return _result(LSTM, x, pred, split, dates, sat)


def wd_lstm_forecast(series, spec: WaveletSpec = WaveletSpec(),
                     cfg: TrainConfig = TrainConfig(), dates=None,
                     stream: Optional[np.random.SeedSequence] = None,
                     n_jobs: Optional[int] = None, return_bands: bool = False,
                     threshold: Optional[float] = None, mode: str = "soft"):
    """Decompose, forecast every band with its own LSTM, and sum the band forecasts.

    The split index is taken on the parent series and applied to every band.
    A ``threshold`` denoises the detail bands before training; metrics are
    still scored against the original series. With ``return_bands`` the
    per-band walk-forward predictions are returned as a second value (dict
    keyed by band name).
    """
    x = np.asarray(series, dtype=float).ravel()
    dec = dwt_multilevel(x, spec)
    if threshold is not None:
        dec = denoise(dec, threshold, mode)
    names = dec.band_names
    bands = dec.bands.T
    fits = Parallel(n_jobs=n_jobs)(
        delayed(_fit_band)(name, band, cfg, _seed_for(cfg, stream, name))
        for name, band in zip(names, bands)
    )
    split = split_index(x.size, cfg.train_fraction)
    band_preds = {name: walk_forward(f.params, f.scaler, band)
                  for name, f, band in zip(names, fits, bands)}
    total = np.sum([band_preds[n] for n in names], axis=0)
    sat = {name: _out_of_range(band[split:], f.scaler)
           for name, f, band in zip(names, fits, bands)}
    result = _result(WD_LSTM, x, total, split, dates, sat)
    return (result, band_preds) if return_bands else result


@dataclass
class ForecastReport:
    """All curvature kinds forecast by one model, plus the configuration used."""

    model: str
    config: dict
    results: dict  # kind -> ForecastResult

    def to_json(self) -> str:
        body = {
            "model": self.model,
            "config": self.config,
            "kinds": {
                k: {"dates": r.dates, "actual": r.actual, "predicted": r.predicted,
                    "saturated": r.saturated}
                for k, r in self.results.items()
            },
            "metrics": {k: {"mae": r.mae, "mse": r.mse, "r2": r.r2}
                        for k, r in self.results.items()},
        }
        return json.dumps(body, sort_keys=True, indent=1, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ForecastReport":
        body = json.loads(text)
        results = {}
        for kind, arrays in body["kinds"].items():
            results[kind] = ForecastResult(model=body["model"], **arrays,
                                           **body["metrics"][kind])
        return cls(model=body["model"], config=body["config"], results=results)


def _train_config(est) -> TrainConfig:
    return TrainConfig(train_fraction=est.train_fraction, max_iterations=est.max_iter,
                       learning_rate=est.learning_rate, gradient_clip=est.gradient_clip,
                       hidden_size=est.hidden_size)


class LSTMForecaster(RegressorMixin, BaseEstimator):
    """One-step-ahead LSTM on a univariate series.

    ``fit(y)`` trains on the first ``train_fraction`` of ``y``. ``predict(y)``
    returns an array aligned with ``y`` whose entry ``t`` forecasts ``y[t]``
    from ``y[:t]`` (entry 0 is nan).
    """

    def __init__(self, hidden_size=200, max_iter=250, learning_rate=0.005,
                 gradient_clip=1.0, train_fraction=0.8, random_state=0):
        self.hidden_size = hidden_size
        self.max_iter = max_iter
        self.learning_rate = learning_rate
        self.gradient_clip = gradient_clip
        self.train_fraction = train_fraction
        self.random_state = random_state

    def fit(self, y, X=None):
        y = column_or_1d(y)
        cfg = _train_config(self)
        fit = train(y, cfg, rng=named_stream(self.random_state, "series"))
        self.params_, self.scaler_, self.loss_curve_ = fit.params, fit.scaler, fit.losses
        self.split_index_ = split_index(len(y), self.train_fraction)
        return self

    def predict(self, y):
        check_is_fitted(self)
        return walk_forward(self.params_, self.scaler_, column_or_1d(y))

    def score(self, y, X=None):
        """R^2 of the walk-forward forecasts on the test split of ``y``."""
        pred = self.predict(y)
        return metrics(pred[self.split_index_:], column_or_1d(y)[self.split_index_:])["r2"]


class WDLSTMForecaster(LSTMForecaster):
    """Wavelet-decomposed LSTM: one LSTM per band, band forecasts summed."""

    def __init__(self, wavelet="db4", level=4, hidden_size=200, max_iter=250,
                 learning_rate=0.005, gradient_clip=1.0, train_fraction=0.8,
                 random_state=0, n_jobs=None):
        super().__init__(hidden_size, max_iter, learning_rate, gradient_clip,
                         train_fraction, random_state)
        self.wavelet = wavelet
        self.level = level
        self.n_jobs = n_jobs

    def fit(self, y, X=None):
        y = column_or_1d(y)
        cfg = _train_config(self)
        self.spec_ = WaveletSpec(self.wavelet, self.level)
        dec = dwt_multilevel(y, self.spec_)
        fits = Parallel(n_jobs=self.n_jobs)(
            delayed(_fit_band)(name, band, cfg, named_stream(self.random_state, name))
            for name, band in zip(dec.band_names, dec.bands.T)
        )
        self.band_names_ = dec.band_names
        self.models_ = [(f.params, f.scaler) for f in fits]
        self.split_index_ = split_index(len(y), self.train_fraction)
        return self

    def predict(self, y):
        check_is_fitted(self)
        dec = dwt_multilevel(column_or_1d(y), self.spec_)
        preds = [walk_forward(p, s, band) for (p, s), band in zip(self.models_, dec.bands.T)]
        return np.sum(preds, axis=0)
