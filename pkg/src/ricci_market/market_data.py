"""Price ingestion, log returns and window schedules."""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass
from enum import Enum
from typing import IO, Iterator, Union

import numpy as np

from .exceptions import InputIOError, TooShortError, ValidationError

MIN_WINDOW = 3


@dataclass(frozen=True)
class PriceMatrix:
    """Dates x tickers grid of strictly positive, gap-filled prices."""

    dates: tuple
    tickers: tuple
    prices: np.ndarray

    def __post_init__(self):
        prices = np.asarray(self.prices, dtype=float)
        if prices.ndim != 2 or prices.shape != (len(self.dates), len(self.tickers)):
            raise ValidationError("prices shape does not match dates x tickers")
        if prices.shape[0] < 2 or prices.shape[1] < 2:
            raise ValidationError("need at least 2 dates and 2 tickers")
        if not np.all(np.isfinite(prices)) or np.any(prices <= 0):
            raise ValidationError("prices must be finite and strictly positive")
        if any(a >= b for a, b in zip(self.dates, self.dates[1:])):
            raise ValidationError("dates must be strictly increasing")
        prices.setflags(write=False)
        object.__setattr__(self, "prices", prices)


@dataclass(frozen=True)
class ReturnMatrix:
    """Log returns; row ``t`` is the move from price row ``t`` to ``t + 1``.

    ``dates[t]`` is the date of the later price, so a window of returns is
    labelled by the date of its last row.
    """

    dates: tuple
    tickers: tuple
    returns: np.ndarray

    @property
    def n_rows(self) -> int:
        return self.returns.shape[0]


class Scheme(str, Enum):
    NON_OVERLAPPING = "non-overlapping"
    ROLLING = "rolling"


@dataclass(frozen=True)
class WindowSchedule:
    scheme: Scheme
    tau: int
    delta: int
    windows: tuple  # (start, end) half-open row ranges

    def __len__(self):
        return len(self.windows)

    def __iter__(self) -> Iterator[tuple]:
        return iter(self.windows)

    def end_dates(self, returns: ReturnMatrix) -> list:
        return [returns.dates[end - 1] for _, end in self.windows]


def _open_source(source) -> IO[str]:
    if isinstance(source, (str, os.PathLike)):
        try:
            return open(source, newline="", encoding="utf-8")
        except OSError as exc:
            raise InputIOError(f"cannot read {source}: {exc.strerror}") from exc
    return source


def _parse_price(field: str, row: int, ticker: str) -> float:
    try:
        value = float(field)
    except ValueError:
        raise ValidationError(
            f"unparsable number {field!r} at row {row}, column {ticker}"
        ) from None
    if not math.isfinite(value) or value <= 0:
        raise ValidationError(f"non-positive price {field!r} at row {row}, column {ticker}")
    return value


def load_prices(source: Union[str, os.PathLike, IO[str]]) -> PriceMatrix:
    """Read a ``date,T1,T2,...`` CSV, forward-filling empty cells.

    Rows are sorted by their date label. The first row must be complete
    since there is no earlier value to fill from.
    """
    stream = _open_source(source)
    try:
        rows = [r for r in csv.reader(stream) if r and any(f.strip() for f in r)]
    finally:
        if stream is not source:
            stream.close()
    if len(rows) < 2:
        raise ValidationError("empty price table")
    header, body = rows[0], rows[1:]
    tickers = tuple(h.strip() for h in header[1:])
    if len(tickers) < 2:
        raise ValidationError("need at least 2 ticker columns")

    body.sort(key=lambda r: r[0].strip())
    dates = tuple(r[0].strip() for r in body)
    prices = np.empty((len(body), len(tickers)))
    last = [None] * len(tickers)
    for i, row in enumerate(body):
        if len(row) - 1 > len(tickers):
            raise ValidationError(f"row {dates[i]} has more fields than the header")
        fields = row[1:] + [""] * (len(tickers) - len(row) + 1)
        for k, field in enumerate(fields):
            field = field.strip()
            if field:
                last[k] = _parse_price(field, i, tickers[k])
            elif last[k] is None:
                raise ValidationError(
                    f"unfillable leading gap in column {tickers[k]} at {dates[i]}"
                )
            prices[i, k] = last[k]
    return PriceMatrix(dates=dates, tickers=tickers, prices=prices)


def loads_prices(text: str) -> PriceMatrix:
    return load_prices(io.StringIO(text))


def log_returns(pm: PriceMatrix) -> ReturnMatrix:
    logp = np.log(pm.prices)
    returns = logp[1:] - logp[:-1]
    returns.setflags(write=False)
    return ReturnMatrix(dates=pm.dates[1:], tickers=pm.tickers, returns=returns)


def make_schedule(n_returns: int, scheme="non-overlapping", tau: int = 22,
                  delta: int = 5) -> WindowSchedule:
    """Enumerate windows of ``tau`` return rows; trailing partial windows are dropped."""
    scheme = Scheme(scheme)
    if tau < MIN_WINDOW:
        raise ValidationError(f"tau={tau} is below the minimum window of {MIN_WINDOW}")
    if tau > n_returns:
        raise TooShortError(f"tau={tau} exceeds the {n_returns} available return rows")
    if scheme is Scheme.NON_OVERLAPPING:
        step = tau
    else:
        if delta < 1:
            raise ValidationError("delta must be >= 1 for rolling windows")
        step = delta
    windows = tuple((end - tau, end) for end in range(tau, n_returns + 1, step))
    return WindowSchedule(scheme=scheme, tau=tau,
                          delta=step if scheme is Scheme.ROLLING else tau,
                          windows=windows)
