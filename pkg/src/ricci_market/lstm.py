"""Single-layer LSTM regressor trained by full-sequence backpropagation through time.

The stacked weight matrices hold the gates in the order forget, input,
output, candidate so that one sigmoid call covers the first three blocks. The scalar head is ``sigmoid(w . h_t + b)``, so targets are min-max
scaled into [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

import numpy as np
from numba import njit
from scipy.special import expit

from .exceptions import NumericError, TooShortError, ValidationError

GATES = ("f", "i", "o", "a")
MIN_SERIES = 20


sigmoid = expit


@dataclass
class LSTMParams:
    W: np.ndarray       # (4H, H) recurrent weights, gates stacked f, i, o, a
    U: np.ndarray       # (4H, D) input weights
    b: np.ndarray       # (4H,)
    w_head: np.ndarray  # (H,)
    b_head: np.ndarray  # (1,)

    def __post_init__(self):
        h = self.hidden_size
        if (self.W.shape != (4 * h, h) or self.U.shape[0] != 4 * h
                or self.b.shape != (4 * h,) or self.w_head.shape != (h,)
                or self.b_head.shape != (1,)):
            raise ValidationError("inconsistent LSTM parameter shapes")

    @property
    def hidden_size(self) -> int:
        return self.W.shape[1]

    @property
    def input_size(self) -> int:
        return self.U.shape[1]

    def gate(self, name: str):
        """``(W_g, U_g, b_g)`` views for gate ``name`` in ``f, i, a, o``."""
        h = self.hidden_size
        k = GATES.index(name)
        sl = slice(k * h, (k + 1) * h)
        return self.W[sl], self.U[sl], self.b[sl]

    def arrays(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def copy(self) -> "LSTMParams":
        return LSTMParams(**{k: v.copy() for k, v in self.arrays().items()})

    @classmethod
    def zeros(cls, hidden_size: int, input_size: int = 1) -> "LSTMParams":
        h = hidden_size
        return cls(np.zeros((4 * h, h)), np.zeros((4 * h, input_size)), np.zeros(4 * h),
                   np.zeros(h), np.zeros(1))

    @classmethod
    def init(cls, hidden_size: int, input_size: int = 1, rng=None) -> "LSTMParams":
        """Uniform in +-1/sqrt(hidden_size), drawn in field order."""
        rng = np.random.default_rng(rng)
        bound = 1.0 / np.sqrt(hidden_size)
        p = cls.zeros(hidden_size, input_size)
        for arr in p.arrays().values():
            arr[...] = rng.uniform(-bound, bound, size=arr.shape)
        return p


def lstm_step(p: LSTMParams, x_t, h_prev, c_prev):
    """Advance one time step; returns ``(h_t, C_t)``."""
    h = p.hidden_size
    z = p.W @ h_prev + p.U @ np.atleast_1d(x_t) + p.b
    f = sigmoid(z[:h])
    i = sigmoid(z[h:2 * h])
    o = sigmoid(z[2 * h:3 * h])
    a = np.tanh(z[3 * h:])
    c = c_prev * f + a * i
    h_t = o * np.tanh(c)
    for name, val in (("f", f), ("i", i), ("a", a), ("o", o), ("cell", c)):
        if not np.all(np.isfinite(val)):
            raise NumericError(f"non-finite value in LSTM {name} gate")
    return h_t, c


def forecast_head(p: LSTMParams, h_t) -> float:
    return float(sigmoid(np.atleast_1d(p.w_head @ h_t + p.b_head[0]))[0])


@njit(cache=True)
def _forward_kernel(W, xz):
    n, h4 = xz.shape
    h = h4 // 4
    hs = np.zeros((n + 1, h))
    cs = np.zeros((n + 1, h))
    tcs = np.zeros((n + 1, h))
    gates = np.empty((n, h4))
    for t in range(n):
        z = np.dot(W, hs[t])
        for j in range(h4):
            v = z[j] + xz[t, j]
            if j < 3 * h:
                gates[t, j] = 1.0 / (1.0 + np.exp(-v))
            else:
                gates[t, j] = np.tanh(v)
        for k in range(h):
            c = cs[t, k] * gates[t, k] + gates[t, 3 * h + k] * gates[t, h + k]
            cs[t + 1, k] = c
            tcs[t + 1, k] = np.tanh(c)
            hs[t + 1, k] = gates[t, 2 * h + k] * tcs[t + 1, k]
    return hs, cs, tcs, gates


@njit(cache=True)
def _backward_kernel(WT, gates, cs, tcs, dh_out):
    """Pre-activation gradients ``dz`` (T, 4H) given dL/dh_t from the head."""
    n, h4 = gates.shape
    h = h4 // 4
    dz = np.empty((n, h4))
    dh_next = np.zeros(h)
    dc_next = np.zeros(h)
    for t in range(n - 1, -1, -1):
        for k in range(h):
            f = gates[t, k]
            i = gates[t, h + k]
            o = gates[t, 2 * h + k]
            a = gates[t, 3 * h + k]
            tc = tcs[t + 1, k]
            dh = dh_out[t, k] + dh_next[k]
            dc = dh * o * (1.0 - tc * tc) + dc_next[k]
            dz[t, k] = dc * cs[t, k] * f * (1.0 - f)
            dz[t, h + k] = dc * a * i * (1.0 - i)
            dz[t, 2 * h + k] = dh * tc * o * (1.0 - o)
            dz[t, 3 * h + k] = dc * i * (1.0 - a * a)
            dc_next[k] = dc * f
        dh_next = np.dot(WT, dz[t])
    return dz


def _forward(p: LSTMParams, x):
    """Run the recurrence over ``x`` (T, D); keep everything backward needs."""
    xz = x @ p.U.T + p.b
    return _forward_kernel(np.ascontiguousarray(p.W), np.ascontiguousarray(xz))


def predict_sequence(p: LSTMParams, x) -> np.ndarray:
    """Head output after each step of the (scaled) input sequence."""
    x = np.asarray(x, dtype=float).reshape(len(x), -1)
    hs = _forward(p, x)[0]
    return sigmoid(hs[1:] @ p.w_head + p.b_head[0])


def loss_and_grad(p: LSTMParams, x, y):
    """Mean squared error of the head outputs against ``y`` and its gradient."""
    x = np.asarray(x, dtype=float).reshape(len(x), -1)
    y = np.asarray(y, dtype=float)
    n = x.shape[0]
    h = p.hidden_size
    hs, cs, tcs, gates = _forward(p, x)
    pred = sigmoid(hs[1:] @ p.w_head + p.b_head[0])
    err = pred - y
    loss = float(np.mean(err ** 2))

    dlogit = 2.0 * err / n * pred * (1.0 - pred)
    grad = LSTMParams.zeros(h, p.input_size)
    grad.w_head[:] = dlogit @ hs[1:]
    grad.b_head[0] = dlogit.sum()

    dh_out = dlogit[:, None] * p.w_head
    dz = _backward_kernel(np.ascontiguousarray(p.W.T), gates, cs, tcs, dh_out)
    grad.W[:] = dz.T @ hs[:-1]
    grad.U[:] = dz.T @ x
    grad.b[:] = dz.sum(axis=0)
    return loss, grad


def global_norm(grad: LSTMParams) -> float:
    return float(np.sqrt(sum(np.sum(g ** 2) for g in grad.arrays().values())))


def clip_gradient(grad: LSTMParams, max_norm: float) -> float:
    """Rescale ``grad`` in place so its global norm is at most ``max_norm``."""
    norm = global_norm(grad)
    if norm > max_norm:
        scale = max_norm / norm
        for g in grad.arrays().values():
            g *= scale
    return norm


@dataclass
class Adam:
    lr: float = 0.005
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    def step(self, params: LSTMParams, grad: LSTMParams):
        self.t += 1
        for name, g in grad.arrays().items():
            m = self.m.setdefault(name, np.zeros_like(g))
            v = self.v.setdefault(name, np.zeros_like(g))
            m *= self.beta1
            m += (1 - self.beta1) * g
            v *= self.beta2
            v += (1 - self.beta2) * g * g
            mhat = m / (1 - self.beta1 ** self.t)
            vhat = v / (1 - self.beta2 ** self.t)
            getattr(params, name)[...] -= self.lr * mhat / (np.sqrt(vhat) + self.eps)


@dataclass(frozen=True)
class TrainConfig:
    train_fraction: float = 0.8
    max_iterations: int = 250
    learning_rate: float = 0.005
    gradient_clip: float = 1.0
    hidden_size: int = 200
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ValidationError("train_fraction must be in (0, 1)")
        if self.max_iterations < 1 or self.hidden_size < 1:
            raise ValidationError("max_iterations and hidden_size must be >= 1")
        if self.learning_rate <= 0 or self.gradient_clip <= 0:
            raise ValidationError("learning_rate and gradient_clip must be positive")


@dataclass(frozen=True)
class Scaler:
    """Min-max map fitted on the training split."""

    min: float
    max: float

    @classmethod
    def fit(cls, values) -> "Scaler":
        lo, hi = float(np.min(values)), float(np.max(values))
        if hi - lo <= 1e-12 * max(1.0, abs(lo), abs(hi)):
            # Constant training data: centre it so the head can emit 0.5.
            half = 0.5 * max(1.0, abs(lo))
            return cls(lo - half, hi + half)
        return cls(lo, hi)

    def transform(self, x):
        return (np.asarray(x, dtype=float) - self.min) / (self.max - self.min)

    def inverse_transform(self, s):
        return np.asarray(s, dtype=float) * (self.max - self.min) + self.min


def split_index(n: int, train_fraction: float) -> int:
    return int(round(n * train_fraction))


@dataclass
class TrainResult:
    params: LSTMParams
    scaler: Scaler
    losses: list
    grad_norms: list  # post-clip global norms, one per update


def train(series, cfg: TrainConfig = TrainConfig(), rng=None) -> TrainResult:
    """Fit an LSTM to one-step-ahead prediction on the training prefix of ``series``.

    ``rng`` overrides ``cfg.seed`` (e.g. a spawned ``SeedSequence``).
    """
    x = np.asarray(series, dtype=float).ravel()
    if x.size < MIN_SERIES:
        raise TooShortError(f"series of length {x.size} is shorter than {MIN_SERIES}")
    if not np.all(np.isfinite(x)):
        raise ValidationError("series contains non-finite values")
    train_part = x[: split_index(x.size, cfg.train_fraction)]
    scaler = Scaler.fit(train_part)
    s = scaler.transform(train_part)
    inputs, targets = s[:-1, None], s[1:]

    params = LSTMParams.init(cfg.hidden_size, 1, cfg.seed if rng is None else rng)
    opt = Adam(cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon)
    losses, norms = [], []
    for it in range(1, cfg.max_iterations + 1):
        loss, grad = loss_and_grad(params, inputs, targets)
        if not np.isfinite(loss):
            raise NumericError(f"training diverged at iteration {it}")
        clip_gradient(grad, cfg.gradient_clip)
        norms.append(global_norm(grad))
        opt.step(params, grad)
        losses.append(loss)
    losses.append(loss_and_grad(params, inputs, targets)[0])
    return TrainResult(params, scaler, losses, norms)


def predict_one_step(params: LSTMParams, scaler: Scaler, history) -> float:
    """Forecast the value following ``history`` (teacher-forced recurrence)."""
    hist = np.asarray(history, dtype=float).ravel()
    if hist.size == 0:
        raise ValidationError("history must be nonempty")
    return float(scaler.inverse_transform(predict_sequence(params, scaler.transform(hist)[:, None])[-1]))


def walk_forward(params: LSTMParams, scaler: Scaler, series) -> np.ndarray:
    """``out[t]`` forecasts ``series[t]`` from ``series[:t]``; ``out[0]`` is nan."""
    x = np.asarray(series, dtype=float).ravel()
    out = np.full(x.size, np.nan)
    if x.size > 1:
        scaled = predict_sequence(params, scaler.transform(x[:-1])[:, None])
        out[1:] = scaler.inverse_transform(scaled)
    return out


def gradient_check(params: LSTMParams, x, y, step: float = 1e-5) -> float:
    """Largest per-tensor relative error between analytic and central-difference gradients."""
    _, grad = loss_and_grad(params, x, y)
    worst = 0.0
    for name, arr in params.arrays().items():
        analytic = getattr(grad, name)
        numeric = np.zeros_like(arr)
        it = np.nditer(arr, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = arr[idx]
            arr[idx] = orig + step
            lp = loss_and_grad(params, x, y)[0]
            arr[idx] = orig - step
            lm = loss_and_grad(params, x, y)[0]
            arr[idx] = orig
            numeric[idx] = (lp - lm) / (2 * step)
        scale = max(np.linalg.norm(analytic), np.linalg.norm(numeric))
        diff = np.linalg.norm(analytic - numeric)
        worst = max(worst, diff / scale if scale > 1e-12 else diff)
    return worst
