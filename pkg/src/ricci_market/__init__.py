"""Discrete Ricci curvature of stock correlation networks and WD-LSTM forecasting."""

from .curvature import (
    CurvatureSeries,
    RicciCurvatureTransformer,
    average_curvatures,
    curvature_series,
    edge_curvatures,
    fr_curvature,
    hr_curvature,
    mr_curvature,
    or_curvature,
)
from .exceptions import (
    InputIOError,
    MissingArtifactError,
    NumericError,
    RicciMarketError,
    TooShortError,
    ValidationError,
)
from .forecast import (
    ForecastReport,
    LSTMForecaster,
    WDLSTMForecaster,
    lstm_forecast,
    metrics,
    wd_lstm_forecast,
)
from .lstm import LSTMParams, TrainConfig
from .market_data import PriceMatrix, ReturnMatrix, WindowSchedule, load_prices, log_returns, make_schedule
from .network import ThresholdNetwork, ThresholdNetworkBuilder, distance_matrix, mst_prim, pearson_matrix, threshold_network
from .wavelet import WaveletDecomposer, WaveletDecomposition, WaveletSpec, denoise, dwt_multilevel, reconstruct

__all__ = [
    "CurvatureSeries",
    "RicciCurvatureTransformer",
    "average_curvatures",
    "curvature_series",
    "edge_curvatures",
    "fr_curvature",
    "hr_curvature",
    "mr_curvature",
    "or_curvature",
    "InputIOError",
    "MissingArtifactError",
    "NumericError",
    "RicciMarketError",
    "TooShortError",
    "ValidationError",
    "ForecastReport",
    "LSTMForecaster",
    "WDLSTMForecaster",
    "lstm_forecast",
    "metrics",
    "wd_lstm_forecast",
    "LSTMParams",
    "TrainConfig",
    "PriceMatrix",
    "ReturnMatrix",
    "WindowSchedule",
    "load_prices",
    "log_returns",
    "make_schedule",
    "ThresholdNetwork",
    "ThresholdNetworkBuilder",
    "distance_matrix",
    "mst_prim",
    "pearson_matrix",
    "threshold_network",
    "WaveletDecomposer",
    "WaveletDecomposition",
    "WaveletSpec",
    "denoise",
    "dwt_multilevel",
    "reconstruct",
]

__version__ = "0.1.0"
