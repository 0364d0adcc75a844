"""Hill estimator of the tail index and its k-sweep."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InputError
from .series import SeriesLike, as_values

__all__ = ["TailIndexEstimate", "SweepFailure", "hill", "hill_sweep", "hill_from_sorted"]


@dataclass(frozen=True)
class TailIndexEstimate:
    gamma_hat: float
    k: int
    n: int


@dataclass(frozen=True)
class SweepFailure:
    """A k at which the sweep could not produce an estimate."""

    k: int
    n: int
    reason: str


def hill_from_sorted(sorted_values: np.ndarray, k: int) -> float:
    """Hill estimate from an already ascending-sorted sample."""
    n = sorted_values.size
    if not 1 <= k <= n - 1:
        raise InputError(f"k must satisfy 1 <= k <= n-1 (k={k}, n={n})")
    top = sorted_values[n - k - 1 :]
    if top[0] <= 0:
        raise InputError(
            f"Hill estimator undefined at k={k}: order statistic Y_(n-k,n)={top[0]:.6g} is not "
            "positive, so the log-spacings are undefined"
        )
    logs = np.log(top)
    return max(float(np.mean(logs[1:]) - logs[0]), 0.0)


def hill(s: SeriesLike, k: int) -> TailIndexEstimate:
    """Hill estimator based on the ``k`` largest observations.

    gamma_hat = (1/k) * sum_{i<k} log Y_{n-i,n} - log Y_{n-k,n}.
    Only the top ``k + 1`` order statistics need to be positive.
    """
    values = as_values(s)
    k = int(k)
    gamma = hill_from_sorted(np.sort(values), k)
    return TailIndexEstimate(gamma, k, values.size)


def hill_sweep(s: SeriesLike, k_min: int, k_max: int) -> list[TailIndexEstimate | SweepFailure]:
    """Hill estimates for every k in ``[k_min, k_max]``; failures are kept in place."""
    values = as_values(s)
    n = values.size
    if not 1 <= k_min <= k_max <= n - 1:
        raise InputError(f"need 1 <= k_min <= k_max <= n-1 (got {k_min}, {k_max}, n={n})")
    ordered = np.sort(values)
    out: list[TailIndexEstimate | SweepFailure] = []
    for k in range(k_min, k_max + 1):
        try:
            out.append(TailIndexEstimate(hill_from_sorted(ordered, k), k, n))
        except InputError as exc:
            out.append(SweepFailure(k, n, str(exc)))
    return out
