import json

import numpy as np
import pytest

from tailrisk.cli import _num, main
from tailrisk.dynamic import DYNAMIC_KINDS
from tailrisk.expectile import extrapolate_expectile, laws_expectile, qb_expectile
from tailrisk.mes import mes_star
from tailrisk.quantile import empirical_quantile, weissman_quantile
from tailrisk.series import read_csv
from tailrisk.simlab import SimSpec, simulate
from tailrisk.tail import hill
from tailrisk.uncertainty import confidence_interval, default_block_scheme, dependence_variance


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def pareto_csv(tmp_path):
    path = tmp_path / "pareto.csv"
    assert run("simulate", "--kind", "iid-pareto", "--param", "gamma=0.4", "--n", 1500, "--seed", 7, "--output", path) == 0
    return path


def test_num_formatting():
    assert _num(1 / 3) == 0.333333
    assert _num(float("inf")) is None and _num(float("nan")) is None
    assert _num({"a": [np.float64(2.0) / 3, np.int64(4), True]}) == {"a": [0.666667, 4, True]}


def test_simulate_is_reproducible(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert run("simulate", "--kind", "garch-t", "--param", "omega=0.05", "--param", "alpha=0.1",
                   "--param", "beta=0.85", "--param", "nu=5", "--n", 300, "--seed", 3, "--output", path) == 0
    assert a.read_bytes() == b.read_bytes()
    spec = json.loads(capsys.readouterr().out.splitlines()[0])
    assert spec["seed"] == 3 and spec["kind"] == "garch-t"
    s = read_csv(a, "return")
    np.testing.assert_array_equal(s.values, simulate(SimSpec("garch-t", {"omega": 0.05, "alpha": 0.1, "beta": 0.85, "nu": 5}, 300, 3)).values)


def test_simulate_invalid_spec(tmp_path):
    assert run("simulate", "--kind", "iid-pareto", "--param", "gamma=-1", "--output", tmp_path / "x.csv") == 2
    assert run("simulate", "--kind", "garch-t", "--param", "omega=0.1", "--output", tmp_path / "x.csv") == 2


def test_static_matches_library_calls(pareto_csv, tmp_path):
    out = tmp_path / "r.json"
    assert run("static", "--input", pareto_csv, "--schema", "return", "--k", 100, "--output", out) == 0
    report = json.loads(out.read_text())
    s = read_csv(pareto_csv, "return")
    n, k = s.n, 100
    tau_n, tp = 1 - k / n, 1 - 1 / n
    gamma = hill(s, k).gamma_hat
    w = dependence_variance(s, k, gamma, default_block_scheme(n)).w_hat
    points = {
        "quantile": weissman_quantile(s, k, tp).value,
        "LAWS": extrapolate_expectile(laws_expectile(s, tau_n), tau_n, tp, gamma).value,
        "QB": extrapolate_expectile(qb_expectile(empirical_quantile(s, tau_n), gamma, tau_n), tau_n, tp, gamma).value,
    }
    for rec in report["records"]:
        if rec["method"] == "D-ADJ":
            continue
        assert rec["point"] == _num(points[rec["estimator"]])
        ci = confidence_interval(points[rec["estimator"]], tau_n, tp, gamma, w, 0.0, 0.95, rec["method"], n)
        assert (rec["lo"], rec["hi"]) == (_num(ci.lo), _num(ci.hi))
    assert {r["gamma_hat"] for r in report["tail_index"]} == {_num(gamma)}
    assert report["meta"]["config"]["k"] == 100 and report["meta"]["n"] == n


def test_static_row_count_and_determinism(pareto_csv, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    argv = ["static", "--input", pareto_csv, "--schema", "return", "--k-min", 50, "--k-max", 60, "--methods", "IID,D",
            "--output", a, "--csv", tmp_path / "a.csv"]
    assert run(*argv) == 0
    first = a.read_bytes()
    b.write_bytes(first)
    assert run(*argv) == 0
    assert a.read_bytes() == b.read_bytes()
    report = json.loads(a.read_text())
    assert len(report["records"]) == 11 * 3 * 2
    assert len((tmp_path / "a.csv").read_text().splitlines()) == 11 * 3 * 2 + 1


def test_static_pareto_hill_batch(tmp_path):
    gammas = []
    for seed in range(10):
        path = tmp_path / f"p{seed}.csv"
        run("simulate", "--kind", "iid-pareto", "--param", "gamma=0.5", "--n", 5000, "--seed", seed, "--output", path)
        out = tmp_path / f"p{seed}.json"
        assert run("static", "--input", path, "--schema", "return", "--k", 200, "--methods", "IID", "--output", out) == 0
        gammas.append(json.loads(out.read_text())["tail_index"][0]["gamma_hat"])
    assert all(abs(g - 0.5) <= 0.07 for g in gammas)


def test_static_exit_codes(tmp_path, pareto_csv):
    assert run("static", "--input", tmp_path / "missing.csv", "--output", tmp_path / "o.json") == 2
    assert run("static", "--input", pareto_csv, "--schema", "return", "--methods", "BOOT", "--output", tmp_path / "o.json") == 2
    # k must be below n: a configuration error
    assert run("static", "--input", pareto_csv, "--schema", "return", "--k", 5000, "--output", tmp_path / "o.json") == 2
    # a series of pure gains has no positive tail, so estimation fails at every k
    from tailrisk.series import ReturnSeries, write_csv

    gains = tmp_path / "gains.csv"
    write_csv(ReturnSeries(-simulate(SimSpec("iid-pareto", {"gamma": 0.3}, 400, 1)).values), gains)
    assert run("static", "--input", gains, "--schema", "return", "--k-min", 10, "--k-max", 12,
               "--output", tmp_path / "o.json") == 3
    report = json.loads((tmp_path / "o.json").read_text())
    assert all(r["error"] for r in report["records"])


def test_ingest_then_static(tmp_path, capsys):
    prices = tmp_path / "coin.csv"
    p = np.exp(np.cumsum(simulate(SimSpec("iid-student-t", {"nu": 3}, 800, 1)).values * 0.02)) * 100
    dates = np.datetime64("2018-01-01") + np.arange(801)
    prices.write_text("date,price\n" + "".join(f"{d},{float(v)!r}\n" for d, v in zip(dates, np.concatenate([[100.0], p]))))
    out = tmp_path / "coin_returns.csv"
    assert run("ingest", "--input", prices, "--output", out) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["n"] == 800 and info["series"] == "coin"
    from_prices = read_csv(prices, "price")
    np.testing.assert_array_equal(read_csv(out, "return").values, from_prices.values)
    assert run("static", "--input", prices, "--k", 50, "--output", tmp_path / "o.json") == 0


def test_dynamic_from_garch_fixture(tmp_path):
    path = tmp_path / "g.csv"
    run("simulate", "--kind", "garch-t", "--param", "omega=0.05", "--param", "alpha=0.1", "--param", "beta=0.85",
        "--param", "nu=5", "--n", 330, "--seed", 2, "--output", path)
    out = tmp_path / "d.json"
    assert run("dynamic", "--input", path, "--schema", "return", "--window", 300, "--k", 30, "--alpha", 0.99,
               "--stride", 10, "--output", out) == 0
    report = json.loads(out.read_text())
    assert [s["kind"] for s in report["summary"]] == list(DYNAMIC_KINDS)
    for s in report["summary"]:
        assert s["evaluated"] + len(s["failures"]) == 30
        assert s["expected_exceedances"] == pytest.approx(s["evaluated"] * 0.01, rel=1e-5)
        assert s["observed_exceedances"] == sum(
            r["exceeded"] for r in report["records"] if r["kind"] == s["kind"])
    assert run("dynamic", "--input", path, "--schema", "return", "--window", 400, "--output", out) == 2


def test_mes_single_asset_self_consistency(tmp_path):
    s = simulate(SimSpec("iid-student-t", {"nu": 3}, 600, 4))
    path = tmp_path / "solo.csv"
    from tailrisk.series import write_csv

    write_csv(s, path)
    weights = tmp_path / "w.txt"
    weights.write_text("solo=1\n")
    out = tmp_path / "m.json"
    assert run("mes", "--inputs", path, "--weights", weights, "--schema", "return", "--k", 60,
               "--methods", "IID", "--index-k-max", 50, "--output", out) == 0
    report = json.loads(out.read_text())
    qmes = next(r for r in report["records"] if r["kind"] == "QMES")
    x = read_csv(path, "return")
    thr = empirical_quantile(x, 1 - 60 / 600)
    est = mes_star(x, x, 1 - 60 / 600, 1 - 1 / 600, hill(x, 60).gamma_hat, thr)
    assert qmes["point"] == _num(est.value) and qmes["n_conditioning"] == 60
    assert len(report["index_tail"]) == 49


def test_mes_weight_mismatch(tmp_path):
    s = simulate(SimSpec("iid-student-t", {"nu": 3}, 300, 4))
    from tailrisk.series import write_csv

    write_csv(s, tmp_path / "a.csv")
    (tmp_path / "w.txt").write_text("a=0.5\nb=0.5\n")
    assert run("mes", "--inputs", tmp_path / "a.csv", "--weights", tmp_path / "w.txt", "--schema", "return",
               "--output", tmp_path / "o.json") == 2
    (tmp_path / "w.txt").write_text("a=0.7\n")
    assert run("mes", "--inputs", tmp_path / "a.csv", "--weights", tmp_path / "w.txt", "--schema", "return",
               "--output", tmp_path / "o.json") == 2
