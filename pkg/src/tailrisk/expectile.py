"""Expectiles: LAWS and quantile-based estimators, extrapolation, level translation.

The LAWS estimator solves the first-order condition of the asymmetric
squared loss,

    tau * sum (Y_t - theta)_+ = (1 - tau) * sum (theta - Y_t)_+,

by bisection; the left-minus-right residual is continuous, piecewise linear
and strictly decreasing in theta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import InputError
from .quantile import extrapolation_factor
from .series import SeriesLike, as_values

__all__ = [
    "ExpectileEstimate",
    "AcceptanceReport",
    "check_function",
    "laws_expectile",
    "qb_expectile",
    "extrapolate_expectile",
    "level_for_quantile",
    "acceptance_report",
    "foc_residual",
]

METHODS = ("LAWS", "QB")


@dataclass(frozen=True)
class ExpectileEstimate:
    value: float
    tau: float
    method: str
    k: Optional[int] = None


@dataclass(frozen=True)
class AcceptanceReport:
    prob_ratio: float
    expect_ratio: float
    threshold: float
    acceptable_var: bool
    acceptable_evar: bool


def _check_level(tau: float) -> None:
    if not 0.0 < tau < 1.0:
        raise InputError(f"level must lie in (0, 1), got {tau!r}")


def check_function(x, tau: float):
    """Expectile check function |tau - 1{x <= 0}| * x**2 (vectorised)."""
    x = np.asarray(x, dtype=float)
    out = np.where(x <= 0, 1.0 - tau, tau) * x * x
    return out if out.ndim else float(out)


def foc_residual(values: np.ndarray, theta: float, tau: float) -> float:
    """tau * sum (Y - theta)_+ - (1 - tau) * sum (theta - Y)_+."""
    d = values - theta
    return float(tau * d[d > 0].sum() + (1.0 - tau) * d[d < 0].sum())


def _laws_root(values: np.ndarray, tau: float) -> float:
    lo, hi = float(values.min()), float(values.max())
    if lo == hi:
        return lo
    width_tol = 1e-12 * (1.0 + abs(hi))
    # psi(lo) >= 0 >= psi(hi); bisect on the sign of psi.
    while hi - lo > width_tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if foc_residual(values, mid, tau) > 0:
            lo = mid
        else:
            hi = mid
    # Inside the final bracket the partition into points above/below the root is
    # fixed unless a data point falls in it, so the linear equation can be solved exactly.
    mid = 0.5 * (lo + hi)
    above = values > mid
    w_above, w_below = tau * above.sum(), (1.0 - tau) * (~above).sum()
    exact = (tau * values[above].sum() + (1.0 - tau) * values[~above].sum()) / (w_above + w_below)
    if lo <= exact <= hi:
        return float(exact)
    return mid


def laws_expectile(s: SeriesLike, tau: float, k: Optional[int] = None) -> ExpectileEstimate:
    """Least asymmetrically weighted squares expectile of level ``tau``.

    ``k`` is recorded for provenance only.
    """
    _check_level(tau)
    values = as_values(s)
    if values.size == 0:
        raise InputError("expectile of an empty sample")
    return ExpectileEstimate(_laws_root(values, tau), tau, "LAWS", k)


def qb_expectile(q_hat: float, gamma_hat: float, tau: float = float("nan"), k: Optional[int] = None) -> ExpectileEstimate:
    """Quantile-based expectile (1/gamma - 1)**(-gamma) * q_hat.

    Defined for 0 < gamma_hat < 1 only; outside that range the expectile
    does not exist (gamma >= 1) or the relation degenerates, and the call is
    rejected rather than clamped.
    """
    if not math.isfinite(q_hat):
        raise InputError("quantile input must be finite")
    if not 0.0 < gamma_hat < 1.0:
        raise InputError(f"QB expectile requires 0 < gamma_hat < 1, got {gamma_hat!r}")
    if gamma_hat == 0.5:
        return ExpectileEstimate(q_hat, tau, "QB", k)
    return ExpectileEstimate((1.0 / gamma_hat - 1.0) ** (-gamma_hat) * q_hat, tau, "QB", k)


def extrapolate_expectile(
    xi_intermediate: ExpectileEstimate,
    tau_n: float,
    tau_prime: float,
    gamma_hat: float,
) -> ExpectileEstimate:
    """Weissman-type extrapolation of an intermediate expectile to ``tau_prime``."""
    _check_level(tau_n)
    _check_level(tau_prime)
    if tau_prime < tau_n:
        raise InputError(f"tau_prime={tau_prime} must not be below tau_n={tau_n}")
    if not gamma_hat > 0:
        raise InputError(f"gamma_hat must be positive, got {gamma_hat!r}")
    if tau_prime == tau_n:
        return ExpectileEstimate(xi_intermediate.value, tau_prime, xi_intermediate.method, xi_intermediate.k)
    value = extrapolation_factor(tau_n, tau_prime, gamma_hat) * xi_intermediate.value
    return ExpectileEstimate(value, tau_prime, xi_intermediate.method, xi_intermediate.k)


def level_for_quantile(alpha: float, gamma_hat: float) -> float:
    """Expectile level whose expectile matches the quantile of level ``alpha``.

    Returns 1 - (1 - alpha) * gamma / (1 - gamma).
    """
    _check_level(alpha)
    if not 0.0 < gamma_hat < 1.0:
        raise InputError(f"level translation requires 0 < gamma_hat < 1, got {gamma_hat!r}")
    if gamma_hat == 0.5:
        return alpha
    tau = 1.0 - (1.0 - alpha) * gamma_hat / (1.0 - gamma_hat)
    if not 0.0 < tau < 1.0:
        raise InputError(f"translated level {tau!r} falls outside (0, 1)")
    return tau


def acceptance_report(s: SeriesLike, tau: float) -> AcceptanceReport:
    """Empirical VaR/EVaR acceptance ratios for a signed position (gains positive).

    Zeros count neither as gains nor losses. A zero denominator gives an
    infinite ratio, which is always acceptable.
    """
    _check_level(tau)
    x = as_values(s)
    if x.size == 0:
        raise InputError("acceptance report of an empty sample")
    gains, losses = int((x > 0).sum()), int((x < 0).sum())
    prob_ratio = gains / losses if losses else math.inf
    exp_gain = float(np.maximum(x, 0.0).mean())
    exp_loss = float(np.maximum(-x, 0.0).mean())
    expect_ratio = exp_gain / exp_loss if exp_loss > 0 else math.inf
    threshold = (1.0 - tau) / tau
    # (1 - tau)/tau carries representation error (e.g. tau = 1/3 gives 2 + 4e-16).
    cut = threshold * (1.0 - 1e-12)
    return AcceptanceReport(prob_ratio, expect_ratio, threshold, prob_ratio >= cut, expect_ratio >= cut)
