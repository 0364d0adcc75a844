"""Confidence intervals for extreme estimates under weak serial dependence.

The asymptotic variance of the log of an extrapolated estimate is
w = gamma^2 * (1 + 2 * sum_t R_t(1, 1)). Under independence this reduces to
gamma^2 (IID intervals). For dependent series it is estimated from the
sample variance of tail-exceedance counts in non-overlapping big blocks
separated by small gaps (D intervals); D-ADJ intervals additionally shift
the exponent by an estimate of the bias of the tail index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import special, stats

from .exceptions import InputError
from .series import SeriesLike, as_values
from .tail import hill_from_sorted

__all__ = [
    "CI_METHODS",
    "BlockScheme",
    "VarianceEstimate",
    "BiasEstimate",
    "ConfidenceInterval",
    "default_block_scheme",
    "block_exceedance_counts",
    "asymptotic_variance",
    "dependence_variance",
    "bias_estimate",
    "bias_from_second_order",
    "normal_quantile",
    "confidence_interval",
    "tail_index_interval",
]

CI_METHODS = ("IID", "D", "D-ADJ")


@dataclass(frozen=True)
class BlockScheme:
    r: int
    l: int
    m: int
    n: int

    def __post_init__(self):
        if self.r < 1 or self.l < 0 or self.m < 2:
            raise InputError(f"invalid block scheme {self}: need r >= 1, l >= 0, m >= 2")
        if self.m * (self.r + self.l) > self.n + self.r + self.l:
            raise InputError(f"block scheme {self} does not fit in n={self.n} observations")

    @property
    def stride(self) -> int:
        return self.r + self.l

    def block_slices(self) -> list[slice]:
        """0-based index ranges of the big blocks."""
        return [slice(j * self.stride, j * self.stride + self.r) for j in range(self.m)]


@dataclass(frozen=True)
class VarianceEstimate:
    w_hat: float
    sigma2_blocks: float
    scheme: Optional[BlockScheme]


@dataclass(frozen=True)
class BiasEstimate:
    value: float
    source: str


@dataclass(frozen=True)
class ConfidenceInterval:
    lo: float
    hi: float
    level: float
    method: str
    bias_hat: float = 0.0

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise InputError(f"interval bounds out of order: {self.lo} > {self.hi}")
        if not 0.0 < self.level < 1.0:
            raise InputError(f"confidence level must lie in (0, 1), got {self.level}")

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi


def default_block_scheme(n: int) -> BlockScheme:
    """l = floor(log n), r = floor(log(n)**2), m = floor(n / (r + l))."""
    if n < 3:
        raise InputError(f"series too short for a block scheme (n={n})")
    logn = math.log(n)
    l, r = int(math.floor(logn)), int(math.floor(logn * logn))
    m = n // (r + l)
    if m < 2:
        raise InputError(f"series too short for a block scheme (n={n} gives m={m} blocks)")
    return BlockScheme(r=r, l=l, m=m, n=n)


def block_exceedance_counts(s: SeriesLike, tau_n: float, scheme: BlockScheme) -> np.ndarray:
    """Number of observations in each big block whose empirical cdf value is >= tau_n.

    F_n(Y_t) >= tau_n is evaluated as rank(Y_t) >= ceil(n * tau_n), with ties
    given their maximum rank.
    """
    values = as_values(s)
    n = values.size
    if scheme.n != n:
        raise InputError(f"block scheme built for n={scheme.n}, series has n={n}")
    ranks = stats.rankdata(values, method="max")
    nt = n * tau_n
    cut = round(nt) if abs(nt - round(nt)) < 1e-9 else math.ceil(nt)
    hits = (ranks >= cut).astype(np.int64)
    return np.array([hits[sl].sum() for sl in scheme.block_slices()], dtype=np.int64)


def asymptotic_variance(
    gamma_hat: float,
    counts: Sequence[int],
    scheme: BlockScheme,
    tau_n: float,
) -> VarianceEstimate:
    """w_hat = gamma_hat**2 * var(counts) / (r * (1 - tau_n)), var with divisor m - 1."""
    counts = np.asarray(counts, dtype=float)
    if counts.size != scheme.m or counts.size < 2:
        raise InputError(f"expected {scheme.m} block counts, got {counts.size}")
    if gamma_hat < 0:
        raise InputError("gamma_hat must be non-negative")
    sigma2 = float(np.var(counts, ddof=1))
    w_hat = gamma_hat**2 * sigma2 / (scheme.r * (1.0 - tau_n))
    return VarianceEstimate(w_hat, sigma2, scheme)


def dependence_variance(
    s: SeriesLike,
    k: int,
    gamma_hat: float,
    scheme: Optional[BlockScheme] = None,
) -> VarianceEstimate:
    """Block variance estimate at the intermediate level 1 - k/n."""
    n = as_values(s).size
    scheme = scheme or default_block_scheme(n)
    tau_n = 1.0 - k / n
    return asymptotic_variance(gamma_hat, block_exceedance_counts(s, tau_n, scheme), scheme, tau_n)


def bias_estimate(s: SeriesLike, k: int, override: Optional[float] = None) -> BiasEstimate:
    """Plug-in proxy for the bias of the Hill estimate at ``k``.

    Defaults to hill(k) - hill(floor(k/2)): if the Hill bias grows with k,
    the estimate at k/2 is closer to the truth and the difference has the
    sign of the bias. This is a heuristic; pass ``override`` (for example
    from :func:`bias_from_second_order`) when a better estimate is available.
    """
    if override is not None:
        return BiasEstimate(float(override), "user")
    if k < 4:
        raise InputError(f"bias estimate needs k >= 4, got {k}")
    ordered = np.sort(as_values(s))
    b = hill_from_sorted(ordered, k) - hill_from_sorted(ordered, k // 2)
    return BiasEstimate(float(b), "hill-difference")


def bias_from_second_order(lam: float, rho: float, k: int) -> float:
    """b_hat from external second-order parameters: lambda / ((1 - rho) * sqrt(k))."""
    if rho >= 0:
        raise InputError("second-order parameter rho must be negative")
    return lam / ((1.0 - rho) * math.sqrt(k))


def normal_quantile(p: float) -> float:
    if not 0.0 < p < 1.0:
        raise InputError(f"probability must lie in (0, 1), got {p}")
    return float(special.ndtri(p))


def _z(level: float) -> float:
    if not 0.0 < level < 1.0:
        raise InputError(f"confidence level must lie in (0, 1), got {level}")
    return normal_quantile(0.5 + level / 2.0)


def _check_method(method: str) -> None:
    if method not in CI_METHODS:
        raise InputError(f"unknown interval method {method!r}; expected one of {CI_METHODS}")


def confidence_interval(
    point: float,
    tau_n: float,
    tau_prime: float,
    gamma_hat: float,
    w_hat: float,
    b_hat: float,
    level: float,
    method: str,
    n: int,
) -> ConfidenceInterval:
    """Two-sided interval for an extrapolated estimate.

    bounds = point * d**(-b +/- z * sqrt(w / (n (1 - tau_n)))) with
    d = (1 - tau_n) / (1 - tau_prime); b = b_hat for D-ADJ and 0 otherwise,
    and w = gamma_hat**2 for IID.
    """
    _check_method(method)
    if not point > 0:
        raise InputError(f"interval is multiplicative and needs a positive point estimate, got {point!r}")
    if tau_prime < tau_n:
        raise InputError("tau_prime must not be below tau_n")
    if w_hat < 0:
        raise InputError("w_hat must be non-negative")
    w = gamma_hat**2 if method == "IID" else w_hat
    b = b_hat if method == "D-ADJ" else 0.0
    half = _z(level) * math.sqrt(w / (n * (1.0 - tau_n)))
    log_d = math.log((1.0 - tau_n) / (1.0 - tau_prime))
    e1, e2 = (-b - half) * log_d, (-b + half) * log_d
    lo, hi = sorted((point * math.exp(e1), point * math.exp(e2)))
    return ConfidenceInterval(lo, hi, level, method, b)


def tail_index_interval(
    gamma_hat: float,
    k: int,
    w_hat: float,
    b_hat: float,
    level: float,
    method: str,
) -> ConfidenceInterval:
    """Normal interval gamma_hat - b +/- z * sqrt(w / k) for the Hill estimate."""
    _check_method(method)
    w = gamma_hat**2 if method == "IID" else w_hat
    b = b_hat if method == "D-ADJ" else 0.0
    half = _z(level) * math.sqrt(w / k)
    return ConfidenceInterval(gamma_hat - b - half, gamma_hat - b + half, level, method, b)
