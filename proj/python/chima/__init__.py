"""Correlation-aware high-dimensional mediation analysis."""

from ._chima import (
    ChimaError,
    ConfigError,
    DataError,
    NumericalError,
    analyze,
    default_screen_size,
    fdr_hat,
    marginal_alpha,
    null_proportions,
    rholp,
    simulate,
    threshold,
)

__all__ = [
    "ChimaError",
    "ConfigError",
    "DataError",
    "NumericalError",
    "analyze",
    "default_screen_size",
    "fdr_hat",
    "marginal_alpha",
    "null_proportions",
    "rholp",
    "simulate",
    "threshold",
]
