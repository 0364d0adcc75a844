"""Extreme Marginal Expected Shortfall of an asset against an aggregate index.

The estimator conditions on the index exceeding an intermediate threshold
(an empirical quantile, LAWS expectile or QB expectile of the index), takes
the mean positive loss of the asset on those dates and extrapolates to the
extreme level with the asset's tail index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .exceptions import InputError
from .expectile import laws_expectile, level_for_quantile, qb_expectile
from .quantile import empirical_quantile, extrapolation_factor, intermediate_level
from .series import ReturnSeries, SeriesLike, align, as_values
from .tail import hill
from .uncertainty import (
    BlockScheme,
    ConfidenceInterval,
    asymptotic_variance,
    bias_estimate,
    block_exceedance_counts,
    confidence_interval,
    default_block_scheme,
)

__all__ = [
    "THRESHOLD_KINDS",
    "MES_KINDS",
    "CRYPTO_INDEX_WEIGHTS",
    "IndexSpec",
    "MesEstimate",
    "read_index_spec",
    "build_index",
    "intermediate_threshold",
    "mes_star",
    "mes_confidence_interval",
    "mes_estimates",
]

THRESHOLD_KINDS = ("empirical-quantile", "LAWS-expectile", "QB-expectile")
MES_KINDS = {"QMES": "empirical-quantile", "XMES-LAWS": "LAWS-expectile", "XMES-QB": "QB-expectile"}

# market-capitalisation weights of the five-coin crypto index
CRYPTO_INDEX_WEIGHTS = {"bitcoin": 0.5, "ethereum": 0.2, "litecoin": 0.1, "monero": 0.1, "ripple": 0.1}


@dataclass(frozen=True)
class IndexSpec:
    components: tuple[tuple[str, float], ...]

    def __post_init__(self):
        comps = tuple((str(name), float(w)) for name, w in self.components)
        if not comps:
            raise InputError("index needs at least one component")
        names = [name for name, _ in comps]
        if len(set(names)) != len(names):
            raise InputError("duplicate index component names")
        if any(w < 0 for _, w in comps):
            raise InputError("index weights must be non-negative")
        total = math.fsum(w for _, w in comps)
        if abs(total - 1.0) > 1e-12:
            raise InputError(f"index weights must sum to 1 (got {total!r})")
        object.__setattr__(self, "components", comps)

    @classmethod
    def from_mapping(cls, weights: Mapping[str, float]) -> "IndexSpec":
        return cls(tuple(weights.items()))

    @property
    def names(self) -> list[str]:
        return [name for name, _ in self.components]


@dataclass(frozen=True)
class MesEstimate:
    value: float
    threshold_kind: str
    tau_n: float
    tau_prime: float
    gamma_x: float
    threshold: float = math.nan
    n_conditioning: int = 0
    ci: Optional[ConfidenceInterval] = None


def read_index_spec(path: Union[str, Path]) -> IndexSpec:
    """Parse ``name=weight`` lines (blank lines and ``#`` comments ignored)."""
    weights: dict[str, float] = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise InputError(f"cannot read weight file {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{lineno}: expected name=weight")
        name, value = (part.strip() for part in line.split("=", 1))
        try:
            weights[name] = float(value)
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: {exc}") from exc
    return IndexSpec.from_mapping(weights)


def build_index(components: Mapping[str, ReturnSeries], spec: IndexSpec, name: str = "index") -> ReturnSeries:
    """Weighted sum of component loss series on their common dates."""
    missing = set(spec.names) - set(components)
    extra = set(components) - set(spec.names)
    if missing or extra:
        raise InputError(
            f"index weights and series do not match (missing series: {sorted(missing)}, "
            f"unweighted series: {sorted(extra)})"
        )
    aligned = align([components[name] for name in spec.names])
    total = np.zeros(aligned[0].n)
    for s, (_, w) in zip(aligned, spec.components):
        total = total + w * s.values
    return ReturnSeries(total, aligned[0].dates, name)


def intermediate_threshold(y: SeriesLike, tau_n: float, kind: str, gamma_y: Optional[float] = None) -> float:
    """Threshold on the index at the intermediate level.

    ``gamma_y`` is needed by the QB expectile; the Hill estimate at
    k = floor(n (1 - tau_n)) is used when omitted.
    """
    if kind == "empirical-quantile":
        return empirical_quantile(y, tau_n)
    if kind == "LAWS-expectile":
        return laws_expectile(y, tau_n).value
    if kind == "QB-expectile":
        if gamma_y is None:
            n = as_values(y).size
            gamma_y = hill(y, max(1, int(round(n * (1.0 - tau_n))))).gamma_hat
        return qb_expectile(empirical_quantile(y, tau_n), gamma_y, tau_n).value
    raise InputError(f"unknown threshold kind {kind!r}; expected one of {THRESHOLD_KINDS}")


def mes_star(
    x: SeriesLike,
    y: SeriesLike,
    tau_n: float,
    tau_prime: float,
    gamma_x: float,
    threshold: float,
    threshold_kind: str = "empirical-quantile",
) -> MesEstimate:
    """Extrapolated MES of ``x`` given ``y`` above ``threshold``.

    value = ((1 - tau') / (1 - tau_n))**(-gamma_x)
            * sum x_t 1{x_t > 0, y_t > threshold} / sum 1{y_t > threshold}
    """
    xv, yv = as_values(x), as_values(y)
    if xv.shape != yv.shape:
        raise InputError("asset and index series must be aligned")
    if isinstance(x, ReturnSeries) and isinstance(y, ReturnSeries) and not np.array_equal(x.dates, y.dates):
        raise InputError("asset and index series have different dates; align them first")
    if tau_prime < tau_n:
        raise InputError(f"tau_prime={tau_prime} must not be below tau_n={tau_n}")
    if not gamma_x > 0:
        raise InputError("gamma_x must be positive")
    cond = yv > threshold
    count = int(cond.sum())
    if count == 0:
        raise InputError(f"no index observation exceeds the threshold {threshold:.6g}")
    sel = xv[cond]
    mean_pos = math.fsum(sel[sel > 0]) / count
    if tau_prime == tau_n:
        value = mean_pos
    else:
        value = extrapolation_factor(tau_n, tau_prime, gamma_x) * mean_pos
    return MesEstimate(value, _kind_label(threshold_kind), tau_n, tau_prime, float(gamma_x), float(threshold), count)


def _kind_label(threshold_kind: str) -> str:
    for label, kind in MES_KINDS.items():
        if kind == threshold_kind or label == threshold_kind:
            return label
    raise InputError(f"unknown threshold kind {threshold_kind!r}")


def mes_confidence_interval(
    est: MesEstimate,
    s_x: SeriesLike,
    scheme: Optional[BlockScheme] = None,
    level: float = 0.95,
    method: str = "D",
    b_hat: Optional[float] = None,
) -> ConfidenceInterval:
    """Interval for an extrapolated MES using exceedance blocks of the asset series.

    The block variance uses the rank threshold ``est.tau_n`` applied to X.
    For D-ADJ the Hill-difference bias proxy at k = n (1 - tau_n) is used
    unless ``b_hat`` is given.
    """
    xv = as_values(s_x)
    n = xv.size
    scheme = scheme or default_block_scheme(n)
    counts = block_exceedance_counts(xv, est.tau_n, scheme)
    var = asymptotic_variance(est.gamma_x, counts, scheme, est.tau_n)
    b = 0.0
    if method == "D-ADJ":
        k = int(round(n * (1.0 - est.tau_n)))
        b = bias_estimate(xv, k, override=b_hat).value
    return confidence_interval(est.value, est.tau_n, est.tau_prime, est.gamma_x, var.w_hat, b, level, method, n)


def mes_estimates(
    x: ReturnSeries,
    y: ReturnSeries,
    k: int,
    alpha: Optional[float] = None,
    gamma_x: Optional[float] = None,
    kinds: Sequence[str] = tuple(MES_KINDS),
) -> list[MesEstimate]:
    """QMES and XMES point estimates at the default levels.

    The intermediate level is tau_n = 1 - k/n. QMES is extrapolated to
    ``alpha`` (default 1 - 1/n); the XMES variants to the expectile level
    whose expectile matches the index quantile at ``alpha``. The tail index
    of X is the Hill estimate at ``k`` unless ``gamma_x`` is given.
    """
    x, y = align([x, y])
    n = x.n
    tau_n = intermediate_level(k, n)
    alpha = 1.0 - 1.0 / n if alpha is None else alpha
    gamma_y = hill(y, k).gamma_hat
    if gamma_x is None:
        gamma_x = hill(x, k).gamma_hat
    out = []
    for label in kinds:
        kind = MES_KINDS[label]
        tau_prime = alpha if label == "QMES" else level_for_quantile(alpha, gamma_y)
        thr = intermediate_threshold(y, tau_n, kind, gamma_y)
        out.append(mes_star(x, y, tau_n, tau_prime, gamma_x, thr, kind))
    return out


def with_ci(est: MesEstimate, ci: ConfidenceInterval) -> MesEstimate:
    return replace(est, ci=ci)
