"""Two-step dynamic extreme risk: GARCH(1,1) filter plus extreme residual risk.

For every evaluation date t a constant-mean GARCH(1,1) is fitted by Gaussian
quasi-maximum likelihood to the previous T observations. The extreme
expectile (LAWS or QB) or Weissman quantile of the standardized residuals
is then recomposed into a one-step-ahead conditional level

    level_t = mu + sigma_{t|t-1} * risk(residuals),

and realized losses above the level are counted as exceedances.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import optimize, signal
from scipy.special import expit, logit

from .exceptions import EstimationError, InputError
from .expectile import extrapolate_expectile, laws_expectile, level_for_quantile, qb_expectile
from .quantile import intermediate_level, weissman_quantile
from .series import ReturnSeries, SeriesLike, as_values
from .tail import SweepFailure, TailIndexEstimate, hill_from_sorted, hill_sweep

logger = logging.getLogger(__name__)

__all__ = [
    "DYNAMIC_KINDS",
    "GarchFit",
    "DynamicRiskSeries",
    "ResidualDiagnostics",
    "garch_loglik",
    "garch_fit",
    "one_step_sigma",
    "residual_risk_level",
    "dynamic_risk",
    "dynamic_risk_many",
    "residual_diagnostics",
]

DYNAMIC_KINDS = ("dyn-LAWS-expectile", "dyn-QB-expectile", "dyn-quantile")

MIN_WINDOW = 250
MAX_PERSISTENCE = 1.0 - 1e-6
RESTARTS = ((0.05, 0.90), (0.10, 0.80), (0.02, 0.95))
N_PARAMS = 4


@dataclass(frozen=True)
class GarchFit:
    mu: float
    omega: float
    a: float
    b: float
    sigma2_path: np.ndarray = field(repr=False)
    residuals: np.ndarray = field(repr=False)
    loglik: float = math.nan
    aic: float = math.nan
    bic: float = math.nan
    n: int = 0
    initial_logliks: tuple[float, ...] = ()

    @property
    def aic_per_obs(self) -> float:
        """AIC divided by the window length, the scale used by common GARCH software."""
        return self.aic / self.n

    @property
    def bic_per_obs(self) -> float:
        return self.bic / self.n

    @property
    def persistence(self) -> float:
        return self.a + self.b


def _sigma2(e: np.ndarray, omega: float, a: float, b: float, s2_first: float) -> np.ndarray:
    out = np.empty(e.size)
    out[0] = s2_first
    if e.size > 1:
        drive = omega + a * e[:-1] ** 2
        out[1:] = signal.lfilter([1.0], [1.0, -b], drive, zi=[b * s2_first])[0]
    return out


def garch_loglik(y: SeriesLike, mu: float, omega: float, a: float, b: float) -> float:
    """Gaussian quasi-log-likelihood with sigma2_1 = sample variance of ``y``."""
    y = as_values(y)
    e = y - mu
    s2 = _sigma2(e, omega, a, b, float(np.var(y, ddof=1)))
    if np.any(s2 <= 0):
        return -math.inf
    return float(-0.5 * np.sum(np.log(2.0 * np.pi) + np.log(s2) + e * e / s2))


def _unpack(theta: np.ndarray) -> tuple[float, float, float, float]:
    m, log_w, s, u = theta
    persistence = MAX_PERSISTENCE * expit(s)
    a = persistence * expit(u)
    return float(m), float(math.exp(log_w)), float(a), float(persistence - a)


def _neg_loglik_std(theta: np.ndarray, z: np.ndarray) -> float:
    m, omega, a, b = _unpack(theta)
    if not math.isfinite(omega) or omega <= 0:
        return 1e300
    e = z - m
    s2 = _sigma2(e, omega, a, b, 1.0)
    if not np.all(s2 > 0) or not np.all(np.isfinite(s2)):
        return 1e300
    return float(0.5 * np.sum(np.log(s2) + e * e / s2))


def garch_fit(window: SeriesLike) -> GarchFit:
    """Constant-mean GARCH(1,1) by Gaussian QML.

    The window is standardized before optimisation so the fit is scale
    equivariant. Nelder-Mead runs from three fixed (a, b) starting points
    in an unconstrained parametrisation (omega = exp, a + b below 1 - 1e-6
    through a logistic map); the best of the three is returned.

    Raises:
        InputError: short or constant window.
        EstimationError: no restart converged to a finite likelihood.
    """
    y = as_values(window)
    n = y.size
    if n < MIN_WINDOW:
        raise InputError(f"GARCH window needs at least {MIN_WINDOW} observations, got {n}")
    center, var = float(np.mean(y)), float(np.var(y, ddof=1))
    if not var > 0:
        raise InputError("GARCH window is constant")
    scale = math.sqrt(var)
    z = (y - center) / scale
    const = 0.5 * n * math.log(2.0 * math.pi) + n * math.log(scale)

    best, initial = None, []
    for a0, b0 in RESTARTS:
        p0 = (a0 + b0) / MAX_PERSISTENCE
        theta0 = np.array([0.0, math.log(1.0 - a0 - b0), logit(p0), logit(a0 / (a0 + b0))])
        initial.append(-(_neg_loglik_std(theta0, z) + const))
        res = optimize.minimize(
            _neg_loglik_std,
            theta0,
            args=(z,),
            method="Nelder-Mead",
            options={"maxiter": 4000, "maxfev": 8000, "xatol": 1e-7, "fatol": 1e-9},
        )
        if not res.success or not math.isfinite(res.fun) or res.fun >= 1e299:
            logger.debug("GARCH restart from (%s, %s) did not converge: %s", a0, b0, res.message)
            continue
        if best is None or res.fun < best.fun:
            best = res
    if best is None:
        raise EstimationError("GARCH(1,1) optimisation did not converge from any restart")

    mz, wz, a, b = _unpack(best.x)
    mu, omega = center + scale * mz, wz * var
    e = y - mu
    sigma2 = _sigma2(e, omega, a, b, var)
    loglik = -(best.fun + const)
    return GarchFit(
        mu=mu,
        omega=omega,
        a=a,
        b=b,
        sigma2_path=sigma2,
        residuals=e / np.sqrt(sigma2),
        loglik=loglik,
        aic=2.0 * N_PARAMS - 2.0 * loglik,
        bic=N_PARAMS * math.log(n) - 2.0 * loglik,
        n=n,
        initial_logliks=tuple(initial),
    )


def refilter(fit: GarchFit, window: SeriesLike) -> GarchFit:
    """Re-run the variance recursion of ``fit`` on a new window without refitting."""
    y = as_values(window)
    var = float(np.var(y, ddof=1))
    e = y - fit.mu
    sigma2 = _sigma2(e, fit.omega, fit.a, fit.b, var)
    loglik = garch_loglik(y, fit.mu, fit.omega, fit.a, fit.b)
    return GarchFit(
        fit.mu, fit.omega, fit.a, fit.b, sigma2, e / np.sqrt(sigma2), loglik,
        2.0 * N_PARAMS - 2.0 * loglik, N_PARAMS * math.log(y.size) - 2.0 * loglik, y.size,
    )


def one_step_sigma(fit: GarchFit, window: SeriesLike) -> float:
    """sigma_{T+1} = sqrt(omega + a (Y_T - mu)**2 + b sigma2_T)."""
    y = as_values(window)
    s2 = fit.omega + fit.a * (y[-1] - fit.mu) ** 2 + fit.b * fit.sigma2_path[-1]
    return math.sqrt(s2)


def residual_risk_level(
    residuals: np.ndarray,
    kind: str,
    k: int,
    alpha: Optional[float] = None,
    tau_prime: Optional[float] = None,
) -> tuple[float, float, float]:
    """Extreme risk level of standardized residuals.

    Exactly one of ``alpha`` (quantile-equivalent level) and ``tau_prime``
    (fixed level) is given. Returns ``(value, gamma_hat, level_used)``.
    """
    if (alpha is None) == (tau_prime is None):
        raise InputError("give exactly one of alpha and tau_prime")
    eps = np.asarray(residuals, dtype=float)
    n = eps.size
    ordered = np.sort(eps)
    gamma = hill_from_sorted(ordered, k)
    tau_n = intermediate_level(k, n)
    if kind == "dyn-quantile":
        level = alpha if tau_prime is None else tau_prime
        return weissman_quantile(eps, k, level, gamma).value, gamma, level
    level = level_for_quantile(alpha, gamma) if tau_prime is None else tau_prime
    if kind == "dyn-LAWS-expectile":
        inter = laws_expectile(eps, tau_n, k)
    elif kind == "dyn-QB-expectile":
        inter = qb_expectile(float(ordered[n - k - 1]), gamma, tau_n, k)
    else:
        raise InputError(f"unknown dynamic kind {kind!r}; expected one of {DYNAMIC_KINDS}")
    return extrapolate_expectile(inter, tau_n, level, gamma).value, gamma, level


@dataclass(frozen=True)
class DynamicRiskSeries:
    dates: np.ndarray
    level_value: np.ndarray
    level_kind: str
    tau_spec: dict
    exceeded: np.ndarray
    expected_exceedances: Optional[float]
    observed_exceedances: int
    realized: np.ndarray = field(repr=False, default=None)
    sigma: np.ndarray = field(repr=False, default=None)
    mu: np.ndarray = field(repr=False, default=None)
    gamma: np.ndarray = field(repr=False, default=None)
    level_used: np.ndarray = field(repr=False, default=None)
    failures: tuple[tuple[str, str], ...] = ()


def _evaluate_group(values, T, refit_at, indices, kinds, k, alpha, tau_prime):
    """Fit at ``refit_at`` and evaluate every date in ``indices`` with that fit."""
    out = []
    try:
        base = garch_fit(values[refit_at - T : refit_at])
    except (EstimationError, InputError) as exc:
        return [(i, {kind: str(exc) for kind in kinds}) for i in indices]
    for i in indices:
        window = values[i - T : i]
        fit = base if i == refit_at else refilter(base, window)
        sig = one_step_sigma(fit, window)
        row = {}
        for kind in kinds:
            try:
                value, gamma, level = residual_risk_level(fit.residuals, kind, k, alpha, tau_prime)
                row[kind] = (fit.mu + sig * value, sig, fit.mu, gamma, level)
            except (EstimationError, InputError) as exc:
                row[kind] = str(exc)
        out.append((i, row))
    return out


def dynamic_risk_many(
    series: ReturnSeries,
    T: int = 1000,
    kinds: Sequence[str] = DYNAMIC_KINDS,
    k: int = 125,
    alpha: Optional[float] = 0.999,
    tau_prime: Optional[float] = None,
    stride: int = 1,
    workers: int = 1,
) -> dict[str, DynamicRiskSeries]:
    """Rolling two-step estimates for several level kinds sharing the GARCH fits.

    Args:
        series: Loss series of length n > T.
        T: Rolling window length.
        kinds: Subset of DYNAMIC_KINDS.
        k: Top order statistics of the residuals used for tail estimation.
        alpha: Quantile-equivalent level. Expectile kinds use the translated
            expectile level; the quantile kind uses ``alpha`` directly.
        tau_prime: Fixed extreme level instead of ``alpha``.
        stride: Refit every ``stride`` dates, re-filtering with the last fit in between.
        workers: Process count; results do not depend on it.
    """
    if tau_prime is not None:
        alpha = None
    if alpha is None and tau_prime is None:
        raise InputError("give alpha or tau_prime")
    values = as_values(series)
    n = values.size
    if not n > T:
        raise InputError(f"series length {n} must exceed the window T={T}")
    if not 1 <= k < T:
        raise InputError(f"k must satisfy 1 <= k < T (k={k}, T={T})")
    if stride < 1:
        raise InputError("stride must be positive")
    for kind in kinds:
        if kind not in DYNAMIC_KINDS:
            raise InputError(f"unknown dynamic kind {kind!r}; expected one of {DYNAMIC_KINDS}")

    groups = [(s, list(range(s, min(s + stride, n)))) for s in range(T, n, stride)]
    args = [(values, T, s, idx, tuple(kinds), k, alpha, tau_prime) for s, idx in groups]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_evaluate_group, *zip(*args), chunksize=max(1, len(args) // (8 * workers))))
    else:
        results = [_evaluate_group(*a) for a in args]
    rows = [r for group in results for r in group]

    dates = series.dates if isinstance(series, ReturnSeries) else np.arange(n)
    out = {}
    for kind in kinds:
        ok = [(i, r[kind]) for i, r in rows if not isinstance(r[kind], str)]
        failed = tuple((str(dates[i]), r[kind]) for i, r in rows if isinstance(r[kind], str))
        idx = np.array([i for i, _ in ok], dtype=np.int64)
        vals = np.array([v for _, v in ok], dtype=float).reshape(-1, 5)
        levels = vals[:, 0]
        exceeded = values[idx] > levels
        if alpha is not None:
            expected = idx.size * (1.0 - alpha)
        elif kind == "dyn-quantile":
            expected = idx.size * (1.0 - tau_prime)
        else:
            expected = None
        out[kind] = DynamicRiskSeries(
            dates=dates[idx],
            level_value=levels,
            level_kind=kind,
            tau_spec={"alpha": alpha} if alpha is not None else {"tau_prime": tau_prime},
            exceeded=exceeded,
            expected_exceedances=expected,
            observed_exceedances=int(exceeded.sum()),
            realized=values[idx],
            sigma=vals[:, 1],
            mu=vals[:, 2],
            gamma=vals[:, 3],
            level_used=vals[:, 4],
            failures=failed,
        )
    return out


def dynamic_risk(
    series: ReturnSeries,
    T: int = 1000,
    alpha: Optional[float] = 0.999,
    kind: str = "dyn-LAWS-expectile",
    k: int = 125,
    tau_prime: Optional[float] = None,
    stride: int = 1,
    workers: int = 1,
) -> DynamicRiskSeries:
    """Rolling two-step estimate for a single level kind; see :func:`dynamic_risk_many`."""
    return dynamic_risk_many(series, T, (kind,), k, alpha, tau_prime, stride, workers)[kind]


@dataclass(frozen=True)
class ResidualDiagnostics:
    acf: np.ndarray
    band: float
    outside_band: int
    hill: list


def residual_diagnostics(fit: GarchFit, max_lag: int = 30, k_max: Optional[int] = None) -> ResidualDiagnostics:
    """Residual autocorrelations (lags 1..max_lag) with the +/-1.96/sqrt(n) band,
    and the Hill sweep over the positive residuals."""
    eps = np.asarray(fit.residuals, dtype=float)
    n = eps.size
    if n < 4 * max_lag:
        raise InputError(f"need at least {4 * max_lag} residuals for max_lag={max_lag}")
    d = eps - eps.mean()
    denom = float(d @ d)
    if denom == 0:
        raise InputError("autocorrelation undefined for constant residuals")
    acf = np.array([float(d[:-h] @ d[h:]) / denom for h in range(1, max_lag + 1)])
    band = 1.96 / math.sqrt(n)
    pos = eps[eps > 0]
    sweep: list[TailIndexEstimate | SweepFailure] = []
    if pos.size >= 3:
        top = pos.size - 1 if k_max is None else min(k_max, pos.size - 1)
        sweep = hill_sweep(pos, 2, top)
    return ResidualDiagnostics(acf, band, int(np.sum(np.abs(acf) > band)), sweep)
