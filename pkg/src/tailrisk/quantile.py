"""Empirical intermediate quantiles and Weissman extrapolation to extreme levels."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import InputError
from .series import SeriesLike, as_values
from .tail import hill_from_sorted

__all__ = [
    "LevelPair",
    "RiskEstimate",
    "intermediate_level",
    "tail_count",
    "default_extreme_level",
    "extrapolation_factor",
    "empirical_quantile",
    "weissman_quantile",
]

# Guards floor/ceil against representation error in n*(1-tau) when tau = 1 - k/n.
_COUNT_EPS = 1e-9


@dataclass(frozen=True)
class LevelPair:
    tau_n: float
    tau_prime: float

    def __post_init__(self):
        if not 0.0 < self.tau_n <= self.tau_prime < 1.0:
            raise InputError(f"levels must satisfy 0 < tau_n <= tau_prime < 1, got {self}")


@dataclass(frozen=True)
class RiskEstimate:
    """Point estimate of an extreme risk measure with its levels and tail index.

    ``ci`` is filled in by :mod:`tailrisk.uncertainty` when requested.
    """

    value: float
    kind: str
    tau_n: float
    tau_prime: float
    gamma_hat: float
    k: Optional[int] = None
    intermediate: Optional[float] = None
    ci: Optional[object] = None


def _check_level(tau: float, what: str = "tau") -> None:
    if not 0.0 < tau < 1.0:
        raise InputError(f"{what} must lie in (0, 1), got {tau!r}")


def tail_count(n: int, tau: float) -> int:
    """floor(n * (1 - tau)), robust to rounding when tau = 1 - k/n."""
    return int(math.floor(n * (1.0 - tau) + _COUNT_EPS))


def intermediate_level(k: int, n: int) -> float:
    """The intermediate level tau_n = 1 - k/n tied to k top order statistics."""
    if not 1 <= k < n:
        raise InputError(f"k must satisfy 1 <= k < n (k={k}, n={n})")
    return 1.0 - k / n


def default_extreme_level(n: int) -> float:
    """tau'_n = 1 - 1/n, the largest level reachable by extrapolation."""
    if n < 2:
        raise InputError("need n >= 2")
    return 1.0 - 1.0 / n


def extrapolation_factor(tau_n: float, tau_prime: float, gamma_hat: float) -> float:
    """((1 - tau_prime) / (1 - tau_n)) ** (-gamma_hat)."""
    return ((1.0 - tau_prime) / (1.0 - tau_n)) ** (-gamma_hat)


def empirical_quantile(s: SeriesLike, tau: float) -> float:
    """Order statistic Y_{n - floor(n(1-tau)), n}."""
    _check_level(tau)
    values = as_values(s)
    n = values.size
    if n == 0:
        raise InputError("empirical quantile of an empty sample")
    j = min(tail_count(n, tau), n - 1)
    return float(np.partition(values, n - j - 1)[n - j - 1])


def weissman_quantile(
    s: SeriesLike,
    k: int,
    tau_prime: float,
    gamma_hat: Optional[float] = None,
) -> RiskEstimate:
    """Weissman extreme quantile at ``tau_prime`` from the intermediate level 1 - k/n.

    Args:
        s: Loss sample.
        k: Number of top order statistics; fixes tau_n = 1 - k/n.
        tau_prime: Extreme level, must be >= tau_n.
        gamma_hat: Tail index; the Hill estimate at ``k`` when omitted.
    """
    values = as_values(s)
    n = values.size
    k = int(k)
    tau_n = intermediate_level(k, n)
    _check_level(tau_prime, "tau_prime")
    if tau_prime < tau_n:
        raise InputError(f"tau_prime={tau_prime} must not be below tau_n={tau_n} (extrapolation moves outward)")
    ordered = np.sort(values)
    if gamma_hat is None:
        gamma_hat = hill_from_sorted(ordered, k)
    q_inter = float(ordered[n - k - 1])
    value = extrapolation_factor(tau_n, tau_prime, gamma_hat) * q_inter
    return RiskEstimate(value, "quantile", tau_n, tau_prime, float(gamma_hat), k, q_inter)
