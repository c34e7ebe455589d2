"""q-deformed growth-optimal portfolio toolkit."""

from ._core import (
    DataError,
    FitResult,
    GrowthRateEstimate,
    NumericalError,
    Portfolio,
    PriceRelativeSeries,
    QGaussianModel,
    UndefinedMetricError,
    WealthTrajectory,
    c_dq,
    c_q,
    density_1d,
    fit_gaussian_baseline,
    fit_mle,
    gaussianize,
    growth_q_rate,
    load_prices,
    optimal_portfolio,
    q_exp,
    q_log,
    q_product,
    sample_1d,
    sharpe_ratio,
    simple_returns,
    sortino_ratio,
    tsallis_entropy,
    wealth_relative,
)

__all__ = [
    "DataError",
    "FitResult",
    "GrowthRateEstimate",
    "NumericalError",
    "Portfolio",
    "PriceRelativeSeries",
    "QGaussianModel",
    "UndefinedMetricError",
    "WealthTrajectory",
    "c_dq",
    "c_q",
    "density_1d",
    "fit_gaussian_baseline",
    "fit_mle",
    "gaussianize",
    "growth_q_rate",
    "load_prices",
    "optimal_portfolio",
    "q_exp",
    "q_log",
    "q_product",
    "sample_1d",
    "sharpe_ratio",
    "simple_returns",
    "sortino_ratio",
    "tsallis_entropy",
    "wealth_relative",
]

__version__ = "0.1.0"
