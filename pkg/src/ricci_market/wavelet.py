"""Multilevel discrete wavelet decomposition into additive time-domain bands.

The Mallat pyramid uses half-sample symmetric extension at both ends, so any
series length works. Every coefficient band is reconstructed on its own to a
full-length series; the approximation plus all details add back to the input.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.special import comb
from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import TooShortError, ValidationError


@lru_cache(maxsize=None)
def daubechies(n_moments: int) -> tuple:
    """Minimum-phase Daubechies scaling filter with ``n_moments`` vanishing moments.

    Built by spectral factorisation; the result has ``2 * n_moments`` taps
    summing to sqrt(2).
    """
    if n_moments < 1:
        raise ValidationError("Daubechies order must be >= 1")
    n = n_moments
    # P(y) = sum_k C(n-1+k, k) y^k with y = (2 - z - 1/z) / 4.
    p = np.array([comb(n - 1 + k, k, exact=True) for k in range(n)], dtype=float)
    h = np.array([1.0])
    for y in np.roots(p[::-1]) if n > 1 else []:
        # z + 1/z = 2 - 4y; keep the root inside the unit circle.
        z = np.roots([1.0, -(2.0 - 4.0 * y), 1.0])
        z = z[np.argmin(np.abs(z))]
        h = P.polymul(h, [-z, 1.0])
    for _ in range(n):
        h = P.polymul(h, [1.0, 1.0])
    h = np.real(h)
    h = h * np.sqrt(2.0) / h.sum()
    return tuple(h[::-1])


@dataclass(frozen=True)
class WaveletSpec:
    """Orthogonal filter bank plus decomposition depth.

    ``family`` is ``"haar"`` or ``"dbN"``; ``rec_lo`` may be given directly
    for any other orthogonal scaling filter.
    """

    family: str = "db4"
    levels: int = 4
    rec_lo: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.levels < 1:
            raise ValidationError("levels must be >= 1")
        if not self.rec_lo:
            object.__setattr__(self, "rec_lo", _family_filter(self.family))
        h = np.asarray(self.rec_lo, dtype=float)
        if h.size < 2 or h.size % 2:
            raise ValidationError("scaling filter must have an even number of taps")
        # Orthonormal shifts: sum_k h[k] h[k + 2m] = delta_m.
        for m in range(h.size // 2):
            target = 1.0 if m == 0 else 0.0
            if abs(h[: h.size - 2 * m] @ h[2 * m:] - target) > 1e-10:
                raise ValidationError(f"filter for {self.family!r} is not orthogonal")

    @property
    def filter_length(self) -> int:
        return len(self.rec_lo)

    @property
    def filters(self):
        """``(dec_lo, dec_hi, rec_lo, rec_hi)``."""
        rec_lo = np.asarray(self.rec_lo, dtype=float)
        signs = (-1.0) ** np.arange(rec_lo.size)
        rec_hi = signs * rec_lo[::-1]
        return rec_lo[::-1].copy(), rec_hi[::-1].copy(), rec_lo, rec_hi


def _family_filter(family: str) -> tuple:
    name = family.lower()
    if name == "haar":
        return daubechies(1)
    if name.startswith("db") and name[2:].isdigit():
        return daubechies(int(name[2:]))
    raise ValidationError(f"unknown wavelet family {family!r}")


def dwt_step(x, spec: WaveletSpec):
    """One analysis level: ``(approximation, detail)`` coefficients."""
    dec_lo, dec_hi, _, _ = spec.filters
    f = spec.filter_length
    ext = np.pad(np.asarray(x, dtype=float), f - 1, mode="symmetric")
    n_out = (len(x) + f - 1) // 2
    lo = np.convolve(ext, dec_lo)[f::2][:n_out]
    hi = np.convolve(ext, dec_hi)[f::2][:n_out]
    return lo, hi


def idwt_step(approx, detail, spec: WaveletSpec):
    """One synthesis level; output has ``2 * len(approx) - F + 2`` samples."""
    _, _, rec_lo, rec_hi = spec.filters
    f = spec.filter_length
    m = len(approx)
    up_a = np.zeros(2 * m)
    up_a[::2] = approx
    up_d = np.zeros(2 * m)
    up_d[::2] = detail
    y = np.convolve(up_a, rec_lo) + np.convolve(up_d, rec_hi)
    return y[f - 2: f - 2 + 2 * m - f + 2]


def wavedec(x, spec: WaveletSpec) -> list:
    """Coefficient bands ``[cA_L, cD_L, ..., cD_1]``."""
    coeffs = []
    a = np.asarray(x, dtype=float)
    for _ in range(spec.levels):
        a, d = dwt_step(a, spec)
        coeffs.append(d)
    return [a] + coeffs[::-1]


def waverec(coeffs, spec: WaveletSpec) -> np.ndarray:
    a = coeffs[0]
    for d in coeffs[1:]:
        a = idwt_step(a[: len(d)], d, spec)
    return a


@dataclass(frozen=True)
class WaveletDecomposition:
    """Full-length band series; ``details[0]`` is the finest scale."""

    approximation: np.ndarray
    details: tuple
    original_length: int
    coeffs: tuple = field(repr=False)
    spec: WaveletSpec = field(repr=False)

    @property
    def levels(self) -> int:
        return len(self.details)

    @property
    def bands(self) -> np.ndarray:
        """``(n, levels + 1)`` array: approximation then details finest first."""
        return np.column_stack([self.approximation, *self.details])

    @property
    def band_names(self) -> list[str]:
        return ["approx"] + [f"d{j}" for j in range(1, self.levels + 1)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", *self.band_names])
        for t, row in enumerate(self.bands):
            w.writerow([t, *(repr(float(v)) for v in row)])
        return buf.getvalue()


def _band_series(coeffs, spec, n) -> tuple:
    out = []
    for j in range(len(coeffs)):
        only = [c if i == j else np.zeros_like(c) for i, c in enumerate(coeffs)]
        out.append(waverec(only, spec)[:n])
    # coeffs are [cA, cD_L, ..., cD_1]; details are stored finest first.
    return out[0], tuple(out[:0:-1])


def dwt_multilevel(series, spec: WaveletSpec = WaveletSpec()) -> WaveletDecomposition:
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise ValidationError("series must be one-dimensional")
    if not np.all(np.isfinite(x)):
        raise ValidationError("series contains non-finite values")
    if x.size < 2 ** spec.levels:
        raise TooShortError(
            f"series of length {x.size} is too short for {spec.levels} levels "
            f"(need >= {2 ** spec.levels})"
        )
    coeffs = tuple(wavedec(x, spec))
    approx, details = _band_series(coeffs, spec, x.size)
    return WaveletDecomposition(approx, details, x.size, coeffs, spec)


def reconstruct(dec: WaveletDecomposition) -> np.ndarray:
    total = dec.approximation.copy()
    for d in dec.details:
        total = total + d
    return total[: dec.original_length]


def threshold_coefficients(w, threshold: float, mode: str = "soft") -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if mode == "hard":
        return np.where(np.abs(w) > threshold, w, 0.0)
    if mode == "soft":
        return np.sign(w) * np.maximum(np.abs(w) - threshold, 0.0)
    raise ValidationError(f"unknown threshold mode {mode!r}")


def denoise(dec: WaveletDecomposition, threshold: float, mode: str = "soft") -> WaveletDecomposition:
    """Threshold the detail coefficients and rebuild the band series."""
    if not threshold >= 0:
        raise ValidationError("threshold must be non-negative")
    coeffs = (dec.coeffs[0],) + tuple(
        threshold_coefficients(c, threshold, mode) for c in dec.coeffs[1:]
    )
    approx, details = _band_series(coeffs, dec.spec, dec.original_length)
    return replace(dec, approximation=approx, details=details, coeffs=coeffs)


class WaveletDecomposer(TransformerMixin, BaseEstimator):
    """Split a 1-D series into ``level + 1`` additive band series.

    ``transform`` returns shape ``(n, level + 1)`` (approximation first,
    then details finest first); ``inverse_transform`` sums the bands back.
    Set ``threshold`` to denoise the details before reconstruction.
    """

    def __init__(self, wavelet="db4", level=4, threshold=None, mode="soft"):
        self.wavelet = wavelet
        self.level = level
        self.threshold = threshold
        self.mode = mode

    def fit(self, X, y=None):
        self.spec_ = WaveletSpec(self.wavelet, self.level)
        return self

    def decompose(self, series) -> WaveletDecomposition:
        spec = getattr(self, "spec_", None) or WaveletSpec(self.wavelet, self.level)
        dec = dwt_multilevel(np.ravel(series), spec)
        if self.threshold is not None:
            dec = denoise(dec, self.threshold, self.mode)
        return dec

    def transform(self, X):
        return self.decompose(X).bands

    def inverse_transform(self, X):
        return np.asarray(X, dtype=float).sum(axis=1)
