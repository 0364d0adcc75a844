import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tailrisk.exceptions import InputError
from tailrisk.simlab import SimSpec, simulate
from tailrisk.tail import SweepFailure, TailIndexEstimate, hill, hill_sweep

GEOMETRIC = [1.0, 2.0, 4.0, 8.0, 16.0]


def test_hill_constant_top():
    assert hill([0.5, 3.0, 3.0, 3.0, 3.0], 3).gamma_hat == 0.0


def test_hill_hand_example():
    est = hill(GEOMETRIC, 4)
    assert est.gamma_hat == pytest.approx(2.5 * math.log(2), rel=1e-14)
    assert (est.k, est.n) == (4, 5)


def test_hill_rejects_nonpositive_threshold():
    with pytest.raises(InputError, match="log-spacings"):
        hill([-1.0, 0.0, 1.0, 2.0], 3)
    with pytest.raises(InputError):
        hill(GEOMETRIC, 5)
    with pytest.raises(InputError):
        hill(GEOMETRIC, 0)


def test_hill_allows_negative_bulk():
    est = hill([-5.0, -1.0, 1.0, 2.0, 4.0], 2)
    assert est.gamma_hat == pytest.approx(1.5 * math.log(2), rel=1e-14)


def test_sweep_single_entry():
    (est,) = hill_sweep(GEOMETRIC, 4, 4)
    assert est.gamma_hat == pytest.approx(1.7328679513998633, rel=1e-14)


def test_sweep_partial_failure():
    sweep = hill_sweep([-2.0, -1.0, 0.5, 1.0, 2.0, 4.0], 1, 5)
    kinds = [type(e) for e in sweep]
    assert kinds == [TailIndexEstimate] * 3 + [SweepFailure] * 2
    assert [e.k for e in sweep] == [1, 2, 3, 4, 5]


def test_sweep_on_pareto_centred_on_truth():
    s = simulate(SimSpec("iid-pareto", {"gamma": 0.5}, 5000, 7))
    sweep = hill_sweep(s, 50, 500)
    assert len(sweep) == 451
    assert abs(np.mean([e.gamma_hat for e in sweep]) - 0.5) < 0.05


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.floats(1e-3, 1e3), st.integers(1, 40))
def test_hill_scale_and_permutation_invariance(seed, c, k):
    x = simulate(SimSpec("iid-pareto", {"gamma": 0.4}, 60, seed)).values
    g = hill(x, k).gamma_hat
    assert hill(c * x, k).gamma_hat == pytest.approx(g, rel=1e-9, abs=1e-12)
    perm = np.random.default_rng(seed).permutation(x)
    assert hill(perm, k).gamma_hat == g
