"""Pipeline configuration backed by an INI-style key-value file."""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, fields, replace

from .curvature import KINDS, MAX_PATH_LENGTH, _check_kinds
from .exceptions import InputIOError, ValidationError
from .lstm import TrainConfig
from .market_data import MIN_WINDOW, Scheme
from .wavelet import WaveletSpec

ENV_CONFIG = "RICCI_MARKET_CONFIG"


def _opt(default, section):
    return field(default=default, metadata={"section": section})


@dataclass(frozen=True)
class PipelineConfig:
    """Every knob of the analyze/forecast pipeline; defaults follow the published setup."""

    input: str = _opt("", "io")
    out: str = _opt("out", "io")
    seed: int = _opt(7, "run")
    jobs: int = _opt(1, "run")
    scheme: str = _opt("rolling", "market-data")
    tau: int = _opt(22, "market-data")
    delta: int = _opt(5, "market-data")
    theta: float = _opt(0.75, "network")
    dump_networks: bool = _opt(False, "network")
    curvatures: str = _opt(",".join(KINDS), "curvature")
    max_path_length: int = _opt(MAX_PATH_LENGTH, "curvature")
    hr_squared: bool = _opt(False, "curvature")
    wavelet: str = _opt("db4", "wavelet")
    levels: int = _opt(4, "wavelet")
    denoise: bool = _opt(False, "wavelet")
    threshold: float = _opt(0.0, "wavelet")
    mode: str = _opt("soft", "wavelet")
    train_fraction: float = _opt(0.8, "training")
    max_iterations: int = _opt(250, "training")
    learning_rate: float = _opt(0.005, "training")
    gradient_clip: float = _opt(1.0, "training")
    hidden_size: int = _opt(200, "training")
    beta1: float = _opt(0.9, "training")
    beta2: float = _opt(0.999, "training")
    epsilon: float = _opt(1e-8, "training")
    baseline: bool = _opt(False, "training")

    def __post_init__(self):
        try:
            Scheme(self.scheme)
        except ValueError:
            raise ValidationError(f"unknown window scheme {self.scheme!r}") from None
        if self.tau < MIN_WINDOW or self.delta < 1:
            raise ValidationError("tau must be >= 3 and delta >= 1")
        if not -1.0 <= self.theta <= 1.0:
            raise ValidationError("theta must lie in [-1, 1]")
        if self.max_path_length < 2:
            raise ValidationError("max_path_length must be >= 2")
        if self.threshold < 0 or self.mode not in ("soft", "hard"):
            raise ValidationError("threshold must be >= 0 and mode soft or hard")
        object.__setattr__(self, "curvatures", ",".join(_check_kinds(self.curvatures)))
        self.wavelet_spec()
        self.train_config()

    @property
    def kinds(self) -> tuple:
        return tuple(self.curvatures.split(","))

    def wavelet_spec(self) -> WaveletSpec:
        return WaveletSpec(self.wavelet, self.levels)

    def train_config(self) -> TrainConfig:
        return TrainConfig(train_fraction=self.train_fraction,
                           max_iterations=self.max_iterations,
                           learning_rate=self.learning_rate,
                           gradient_clip=self.gradient_clip, hidden_size=self.hidden_size,
                           beta1=self.beta1, beta2=self.beta2, epsilon=self.epsilon,
                           seed=self.seed)

    def forecast_echo(self) -> dict:
        """Settings that shape forecast numbers; paths are left out."""
        skip = {"input", "out", "jobs", "dump_networks"}
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name not in skip}

    def updated(self, **overrides) -> "PipelineConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def dumps(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        for f in fields(self):
            section = f.metadata["section"]
            if not cp.has_section(section):
                cp.add_section(section)
            cp.set(section, f.name, _format(getattr(self, f.name)))
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def loads(cls, text: str) -> "PipelineConfig":
        cp = configparser.ConfigParser(interpolation=None)
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ValidationError(f"malformed config: {exc}") from None
        known = {f.name: f for f in fields(cls)}
        values = {}
        for section in cp.sections():
            for key, raw in cp.items(section):
                name = key.replace("-", "_")
                f = known.get(name)
                if f is None or f.metadata["section"] != section:
                    raise ValidationError(f"unknown config key [{section}] {key}")
                values[name] = _parse(raw, type(f.default), name)
        return cls(**values)

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                return cls.loads(fh.read())
        except OSError as exc:
            raise InputIOError(f"cannot read config {path}: {exc.strerror}") from exc


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse(raw: str, kind, name):
    raw = raw.strip()
    try:
        if kind is bool:
            low = raw.lower()
            if low not in ("true", "false", "yes", "no", "1", "0", "on", "off"):
                raise ValueError(raw)
            return low in ("true", "yes", "1", "on")
        return kind(raw)
    except ValueError:
        raise ValidationError(f"bad value {raw!r} for {name}") from None
