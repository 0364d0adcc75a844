"""Synthetic series and brute-force oracles for verification.

Random streams come from numpy's PCG64 bit generator (PCG XSL RR 128/64)
seeded with the 64-bit ``seed``, so a SimSpec reproduces byte-identical
output across platforms. Replication ``i`` of an experiment uses
``seed = base_seed + i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .exceptions import InputError
from .series import ReturnSeries

__all__ = [
    "SIM_KINDS",
    "SimSpec",
    "rng",
    "simulate",
    "oracle_expectile",
    "pareto_true_expectile",
    "oracle_conditional_tail_mean",
]

SIM_KINDS = ("iid-pareto", "iid-student-t", "garch-t")

_GARCH_BURN_IN = 500


def rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class SimSpec:
    """Generator description.

    ``params`` by kind:
      * iid-pareto: ``gamma``
      * iid-student-t: ``nu``
      * garch-t: ``mu``, ``omega``, ``alpha``, ``beta``, ``nu``
    """

    kind: str
    params: Mapping[str, float] = field(default_factory=dict)
    n: int = 1000
    seed: int = 0

    def __post_init__(self):
        p = dict(self.params)
        if self.kind not in SIM_KINDS:
            raise InputError(f"unknown simulation kind {self.kind!r}; expected one of {SIM_KINDS}")
        if self.n < 1:
            raise InputError("n must be positive")
        if not 0 <= self.seed < 2**64:
            raise InputError("seed must be a 64-bit unsigned integer")
        if self.kind == "iid-pareto":
            if not p.get("gamma", 0) > 0:
                raise InputError("iid-pareto needs gamma > 0")
        elif self.kind == "iid-student-t":
            if not p.get("nu", 0) > 1:
                raise InputError("iid-student-t needs nu > 1")
        else:
            p.setdefault("mu", 0.0)
            missing = {"omega", "alpha", "beta", "nu"} - p.keys()
            if missing:
                raise InputError(f"garch-t needs parameters {sorted(missing)}")
            if not p["omega"] > 0 or p["alpha"] < 0 or p["beta"] < 0 or p["alpha"] + p["beta"] >= 1:
                raise InputError("garch-t needs omega > 0, alpha, beta >= 0 and alpha + beta < 1")
            # unit-variance scaling of the innovations needs a finite variance
            if not p["nu"] > 2:
                raise InputError("garch-t needs nu > 2")
        object.__setattr__(self, "params", p)


def simulate(spec: SimSpec) -> ReturnSeries:
    """Draw a series from ``spec``; identical specs give identical series.

    iid-pareto draws U**(-gamma) with U uniform on (0, 1). garch-t runs the
    GARCH(1,1) recursion with Student-t innovations scaled to unit variance,
    started at the stationary variance and discarding a burn-in of 500 steps.
    """
    g = rng(spec.seed)
    p = spec.params
    name = f"{spec.kind}-seed{spec.seed}"
    if spec.kind == "iid-pareto":
        u = 1.0 - g.random(spec.n)  # (0, 1]
        return ReturnSeries(u ** (-p["gamma"]), name=name)
    if spec.kind == "iid-student-t":
        return ReturnSeries(g.standard_t(p["nu"], spec.n), name=name)

    mu, omega, a, b, nu = p["mu"], p["omega"], p["alpha"], p["beta"], p["nu"]
    total = spec.n + _GARCH_BURN_IN
    eps = g.standard_t(nu, total) * math.sqrt((nu - 2.0) / nu)
    y = np.empty(total)
    s2 = omega / (1.0 - a - b)
    for t in range(total):
        if t:
            s2 = omega + a * (y[t - 1] - mu) ** 2 + b * s2
        y[t] = mu + math.sqrt(s2) * eps[t]
    return ReturnSeries(y[_GARCH_BURN_IN:], name=name)


def _loss_diff(y: np.ndarray, a: float, b: float, tau: float) -> float:
    """sum eta(y - a) - sum eta(y - b), computed termwise to limit cancellation."""
    wa = np.where(y - a <= 0, 1.0 - tau, tau)
    wb = np.where(y - b <= 0, 1.0 - tau, tau)
    same = wa == wb
    # for equal weights, (y-a)^2 - (y-b)^2 = (b - a) * (2y - a - b)
    d_same = wa[same] * (b - a) * (2.0 * y[same] - a - b)
    ys = y[~same]
    d_mixed = wa[~same] * (ys - a) ** 2 - wb[~same] * (ys - b) ** 2
    return math.fsum(d_same) + math.fsum(d_mixed)


def oracle_expectile(sample, tau: float, width: float = 1e-10) -> float:
    """Expectile by golden-section minimisation of the asymmetric squared loss.

    Works on the loss only (never the first-order condition) so it can be
    used to check the LAWS solver.
    """
    if not 0.0 < tau < 1.0:
        raise InputError("tau must lie in (0, 1)")
    y = np.asarray(sample, dtype=float)
    if y.size == 0:
        raise InputError("expectile of an empty sample")
    lo, hi = float(y.min()), float(y.max())
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    while hi - lo > width:
        if _loss_diff(y, c, d, tau) < 0:  # loss(c) < loss(d)
            hi, d = d, c
            c = hi - invphi * (hi - lo)
        else:
            lo, c = c, d
            d = lo + invphi * (hi - lo)
        if not lo < c < d < hi:
            break
    return 0.5 * (lo + hi)


def _pareto_upper_partial(theta: float, gamma: float) -> float:
    """E(Y - theta)_+ for Y = U**(-gamma)."""
    mean = 1.0 / (1.0 - gamma)
    if theta <= 1.0:
        return mean - theta
    return theta ** (1.0 - 1.0 / gamma) * gamma / (1.0 - gamma)


def pareto_true_expectile(gamma: float, tau: float) -> float:
    """Population expectile of the Pareto law P(Y > y) = y**(-1/gamma), y >= 1.

    Solves tau * E(Y - theta)_+ = (1 - tau) * E(theta - Y)_+ by bisection,
    using E(theta - Y)_+ = theta - E Y + E(Y - theta)_+.
    """
    if not 0.0 < gamma < 1.0:
        raise InputError("Pareto expectile needs 0 < gamma < 1")
    if not 0.0 < tau < 1.0:
        raise InputError("tau must lie in (0, 1)")
    mean = 1.0 / (1.0 - gamma)

    def psi(theta):
        up = _pareto_upper_partial(theta, gamma)
        return tau * up - (1.0 - tau) * (theta - mean + up)

    # psi(1) = tau * (mean - 1) > 0, so the root lies above the support minimum
    lo, hi = 1.0, max(2.0, mean)
    while psi(hi) > 0:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if psi(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    return 0.5 * (lo + hi)


def oracle_conditional_tail_mean(x, y, threshold: float) -> float:
    """Mean of x_t * 1{x_t > 0} over the dates with y_t > threshold, by enumeration."""
    x = list(map(float, x))
    y = list(map(float, y))
    if len(x) != len(y):
        raise InputError("x and y must have equal length")
    picked = [xi for xi, yi in zip(x, y) if yi > threshold]
    if not picked:
        raise InputError("no observation of y exceeds the threshold")
    return math.fsum(xi for xi in picked if xi > 0) / len(picked)
