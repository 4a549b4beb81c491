"""Synthetic market and curvature-like data for tests and demonstrations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .market_data import PriceMatrix


@dataclass(frozen=True)
class CrashScenario:
    prices: PriceMatrix
    # Half-open range of return rows inside the high-correlation regime.
    regime: tuple


def one_factor_returns(n_stocks: int, n_days: int, rho, rng=None, vol: float = 0.02):
    """Returns ``vol * (sqrt(rho_t) f_t + sqrt(1 - rho_t) e_it)``.

    ``rho`` is the pairwise correlation, scalar or one value per day.
    """
    rng = np.random.default_rng(rng)
    rho = np.broadcast_to(np.asarray(rho, dtype=float), (n_days,))
    factor = rng.standard_normal(n_days)
    noise = rng.standard_normal((n_days, n_stocks))
    return vol * (np.sqrt(rho)[:, None] * factor[:, None] + np.sqrt(1 - rho)[:, None] * noise)


def crash_scenario(n_stocks: int = 40, n_days: int = 1200, regime_start: int = 594,
                   regime_length: int = 66, base_rho: float = 0.3, crash_rho: float = 0.8,
                   rng=None) -> CrashScenario:
    """Prices from a one-factor model with a block of elevated correlation.

    ``regime_start`` and ``regime_length`` index return rows; prices have one
    more row than returns.
    """
    rho = np.full(n_days - 1, base_rho)
    regime = (regime_start, regime_start + regime_length)
    rho[regime[0]:regime[1]] = crash_rho
    r = one_factor_returns(n_stocks, n_days - 1, rho, rng)
    logp = np.vstack([np.zeros(n_stocks), np.cumsum(r, axis=0)])
    dates = tuple(f"d{t:05d}" for t in range(n_days))
    tickers = tuple(f"S{k:03d}" for k in range(n_stocks))
    return CrashScenario(PriceMatrix(dates, tickers, 100.0 * np.exp(logp)), regime)


def curvature_like_series(n: int = 400, rng=None, noise: float = 0.15) -> np.ndarray:
    """Slow trend plus two sinusoids plus Gaussian noise."""
    rng = np.random.default_rng(rng)
    t = np.arange(n, dtype=float)
    phase = rng.uniform(0, 2 * np.pi, size=2)
    trend = 0.4 * t / n
    season = 0.6 * np.sin(2 * np.pi * t / 50 + phase[0]) + 0.3 * np.sin(2 * np.pi * t / 17 + phase[1])
    return -1.0 + trend + season + noise * rng.standard_normal(n)


def prices_to_csv(pm: PriceMatrix) -> str:
    lines = [",".join(("date",) + pm.tickers)]
    for d, row in zip(pm.dates, pm.prices):
        lines.append(",".join([d] + [repr(float(v)) for v in row]))
    return "\n".join(lines) + "\n"
