"""Extreme expectile and quantile risk measures for heavy-tailed, weakly dependent series."""

from .exceptions import EstimationError, InputError, TailRiskError
from .series import OrderStats, PriceSeries, ReturnSeries, neg_log_returns, order_stats

__version__ = "0.1.0"

__all__ = [
    "EstimationError",
    "InputError",
    "OrderStats",
    "PriceSeries",
    "ReturnSeries",
    "TailRiskError",
    "neg_log_returns",
    "order_stats",
]
