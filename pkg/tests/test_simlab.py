import math

import numpy as np
import pytest
from scipy import integrate

from tailrisk.exceptions import InputError
from tailrisk.simlab import (
    SimSpec,
    oracle_conditional_tail_mean,
    oracle_expectile,
    pareto_true_expectile,
    simulate,
)


@pytest.mark.parametrize(
    "spec",
    [
        SimSpec("iid-pareto", {"gamma": 0.5}, 500, 42),
        SimSpec("iid-student-t", {"nu": 3}, 500, 42),
        SimSpec("garch-t", {"omega": 0.05, "alpha": 0.1, "beta": 0.85, "nu": 5}, 500, 42),
    ],
)
def test_simulate_deterministic(spec):
    a, b = simulate(spec), simulate(spec)
    assert a.values.tobytes() == b.values.tobytes()
    assert simulate(SimSpec(spec.kind, spec.params, spec.n, spec.seed + 1)).values.tobytes() != a.values.tobytes()


def test_pareto_support_and_tail():
    small = simulate(SimSpec("iid-pareto", {"gamma": 0.5}, 2000, 0)).values
    assert small.min() >= 1.0
    big = simulate(SimSpec("iid-pareto", {"gamma": 0.5}, 100_000, 1)).values
    y = np.quantile(big, 0.99)
    assert np.mean(big > y) * y ** (1 / 0.5) == pytest.approx(1.0, rel=0.15)


def test_garch_without_dynamics_is_scaled_t():
    x = simulate(SimSpec("garch-t", {"omega": 2.0, "alpha": 0.0, "beta": 0.0, "nu": 6}, 10_000, 3)).values
    assert np.var(x) == pytest.approx(2.0, rel=0.10)


def test_invalid_specs():
    with pytest.raises(InputError):
        SimSpec("iid-pareto", {"gamma": -1})
    with pytest.raises(InputError):
        SimSpec("garch-t", {"omega": 1, "alpha": 0.5, "beta": 0.5, "nu": 5})
    with pytest.raises(InputError):
        SimSpec("garch-t", {"omega": 1, "alpha": 0.1, "beta": 0.5, "nu": 2})
    with pytest.raises(InputError):
        SimSpec("gauss")


def test_oracle_expectile_examples(rng):
    x = rng.uniform(0, 1, 200)
    assert oracle_expectile(x, 0.5) == pytest.approx(x.mean(), abs=1e-8)
    assert oracle_expectile([0.0, 1.0], 0.8) == pytest.approx(0.8, abs=1e-9)
    with pytest.raises(InputError):
        oracle_expectile([], 0.5)


def test_pareto_true_expectile_examples():
    assert pareto_true_expectile(0.5, 0.5) == pytest.approx(2.0, rel=1e-14)
    # (theta - 1)^2 = 99 from 0.99 / theta = 0.01 (theta - 2 + 1/theta)
    assert pareto_true_expectile(0.5, 0.99) == pytest.approx(1 + math.sqrt(99), rel=1e-13)
    taus = np.linspace(0.05, 0.9999, 40)
    vals = [pareto_true_expectile(0.3, t) for t in taus]
    assert np.all(np.diff(vals) > 0)
    with pytest.raises(InputError):
        pareto_true_expectile(1.0, 0.9)


@pytest.mark.parametrize("gamma", [0.2, 0.45, 0.7])
def test_pareto_partial_moment_by_quadrature(gamma):
    # E(Y - theta)_+ = int_theta^inf y^(-1/gamma) dy, checked against the population FOC
    for tau in (0.9, 0.995):
        theta = pareto_true_expectile(gamma, tau)
        upper = integrate.quad(lambda y: y ** (-1 / gamma), theta, np.inf)[0]
        lower = integrate.quad(lambda y: 1 - y ** (-1 / gamma), 1, theta)[0]
        assert tau * upper == pytest.approx((1 - tau) * lower, rel=1e-7)


def test_conditional_tail_mean_examples():
    assert oracle_conditional_tail_mean([1, 2, 3, 4], [4, 3, 2, 1], 2) == 1.5
    y = [0.1, 0.5, 0.9, 0.3]
    assert oracle_conditional_tail_mean(y, y, 0.5) == 0.9
    assert oracle_conditional_tail_mean([-1, -2, 3], [5, 6, 0], 1) == 0.0
    with pytest.raises(InputError):
        oracle_conditional_tail_mean([1], [0], 1)
