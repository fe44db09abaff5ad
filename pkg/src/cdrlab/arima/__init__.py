"""Box-Jenkins pipeline: stationarity testing, correlograms, order
suggestion, CSS estimation, and forecasting."""

from .adf import (
    AdfQuantileTable,
    AdfResult,
    Conclusion,
    Regression,
    adf_test,
    build_adf_table,
    default_table,
    read_table,
    schwert_lag_order,
    write_table,
)
from .correlogram import AcfResult, PacfResult, acf, default_max_lag, pacf, pacf_from_acf
from .model import (
    ArimaModel,
    evaluate,
    fit,
    forecast,
    model_from_json,
    model_to_json,
    simulate_arma,
)
from .order import ArimaSpec, suggest_order

__all__ = [
    "AcfResult", "AdfQuantileTable", "AdfResult", "ArimaModel", "ArimaSpec",
    "Conclusion", "PacfResult", "Regression", "acf", "adf_test",
    "build_adf_table", "default_max_lag", "default_table", "evaluate", "fit",
    "forecast", "model_from_json", "model_to_json", "pacf", "pacf_from_acf",
    "read_table", "schwert_lag_order", "simulate_arma", "suggest_order",
    "write_table",
]
