"""Command-line interface.

Commands: ``ingest``, ``static``, ``dynamic``, ``mes``, ``simulate``. Every
run writes one JSON document with ``meta`` (config echo, versions) and a
flat ``records`` array; ``--csv`` adds a CSV projection of the records.
Exit codes: 0 success, 2 input error, 3 computation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np
import scipy

from . import __version__
from .dynamic import DYNAMIC_KINDS, dynamic_risk_many
from .exceptions import EstimationError, InputError, TailRiskError
from .expectile import extrapolate_expectile, laws_expectile, level_for_quantile, qb_expectile
from .mes import MES_KINDS, build_index, mes_confidence_interval, mes_estimates, read_index_spec
from .quantile import default_extreme_level, empirical_quantile, intermediate_level, weissman_quantile
from .series import ReturnSeries, align, read_csv, write_csv
from .simlab import SIM_KINDS, SimSpec, simulate
from .tail import SweepFailure, hill, hill_sweep
from .uncertainty import (
    CI_METHODS,
    bias_estimate,
    confidence_interval,
    default_block_scheme,
    dependence_variance,
    tail_index_interval,
)

EXIT_OK, EXIT_INPUT, EXIT_COMPUTE = 0, 2, 3

STATIC_ESTIMATORS = ("quantile", "LAWS", "QB")


def _num(x: Any) -> Any:
    """Round floats to 6 significant digits; non-finite values become null."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return None
        return float(f"{x:.6g}")
    if isinstance(x, dict):
        return {k: _num(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_num(v) for v in x]
    return x


def _meta(command: str, args: argparse.Namespace, **extra) -> dict:
    config = {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(args).items()) if k != "func"}
    meta = {
        "command": command,
        "config": config,
        "versions": {"tailrisk": __version__, "numpy": np.__version__, "scipy": scipy.__version__},
    }
    meta.update(extra)
    return meta


def _emit(report: dict, args: argparse.Namespace) -> None:
    text = json.dumps(_num(report), indent=2, allow_nan=False) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    if getattr(args, "csv", None):
        records = report.get("records", [])
        fields: list[str] = []
        for rec in records:
            fields.extend(f for f in rec if f not in fields)
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for rec in records:
            writer.writerow({k: ("" if v is None else v) for k, v in _num(rec).items()})
        Path(args.csv).write_text(buf.getvalue())


def _k_values(args: argparse.Namespace, default: int) -> list[int]:
    if args.k_min is not None or args.k_max is not None:
        lo = args.k_min if args.k_min is not None else args.k_max
        hi = args.k_max if args.k_max is not None else args.k_min
        if lo > hi:
            raise InputError(f"empty k range [{lo}, {hi}]")
        return list(range(lo, hi + 1))
    return [args.k if args.k is not None else default]


def _methods(text: str) -> list[str]:
    methods = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in methods if m not in CI_METHODS]
    if bad or not methods:
        raise InputError(f"unknown interval method(s) {bad}; choose from {','.join(CI_METHODS)}")
    return methods


# --------------------------------------------------------------------------- static


def static_records(
    s: ReturnSeries,
    ks: Iterable[int],
    methods: Sequence[str] = CI_METHODS,
    level: float = 0.95,
    tau_prime: Optional[float] = None,
    alpha: Optional[float] = None,
    bias: Optional[float] = None,
) -> tuple[list[dict], list[dict]]:
    """Per-k Hill, Weissman quantile and LAWS/QB extreme expectiles with intervals.

    Returns ``(records, tail_index)``: one record per (k, estimator, method)
    and one tail-index row per (k, method).
    """
    n = s.n
    scheme = default_block_scheme(n)
    if alpha is None and tau_prime is None:
        tau_prime = default_extreme_level(n)
    records, tail_rows = [], []
    for k in ks:
        tau_n = intermediate_level(k, n)
        base = {"k": k, "tau_n": tau_n}
        try:
            gamma = hill(s, k).gamma_hat
            w_hat = dependence_variance(s, k, gamma, scheme).w_hat
            b_hat = bias_estimate(s, k, bias).value if (bias is not None or k >= 4) else math.nan
        except TailRiskError as exc:
            for est in STATIC_ESTIMATORS:
                for method in methods:
                    records.append({**base, "estimator": est, "method": method, "error": str(exc)})
            for method in methods:
                tail_rows.append({**base, "method": method, "error": str(exc)})
            continue
        for method in methods:
            row = {**base, "method": method, "gamma_hat": gamma}
            try:
                ci = tail_index_interval(gamma, k, w_hat, b_hat, level, method)
                row.update(lo=ci.lo, hi=ci.hi, bias_hat=ci.bias_hat, w_hat=w_hat, error=None)
            except TailRiskError as exc:
                row["error"] = str(exc)
            tail_rows.append(row)
        for est in STATIC_ESTIMATORS:
            try:
                if est == "quantile":
                    tp = alpha if alpha is not None else tau_prime
                    point = weissman_quantile(s, k, tp, gamma).value
                else:
                    tp = level_for_quantile(alpha, gamma) if alpha is not None else tau_prime
                    if est == "LAWS":
                        inter = laws_expectile(s, tau_n, k)
                    else:
                        inter = qb_expectile(empirical_quantile(s, tau_n), gamma, tau_n, k)
                    point = extrapolate_expectile(inter, tau_n, tp, gamma).value
            except TailRiskError as exc:
                for method in methods:
                    records.append({**base, "estimator": est, "method": method, "error": str(exc)})
                continue
            for method in methods:
                rec = {**base, "estimator": est, "method": method, "tau_prime": tp, "gamma_hat": gamma, "point": point}
                try:
                    ci = confidence_interval(point, tau_n, tp, gamma, w_hat, b_hat, level, method, n)
                    rec.update(lo=ci.lo, hi=ci.hi, level=level, bias_hat=ci.bias_hat, w_hat=w_hat, error=None)
                except TailRiskError as exc:
                    rec["error"] = str(exc)
                records.append(rec)
    return records, tail_rows


def cmd_static(args: argparse.Namespace) -> int:
    s = read_csv(args.input, args.schema)
    ks = _k_values(args, 125)
    methods = _methods(args.methods)
    records, tail_rows = static_records(s, ks, methods, args.confidence, args.tau_prime, args.alpha, args.bias)
    scheme = default_block_scheme(s.n)
    report = {
        "meta": _meta(
            "static", args, n=s.n, series=s.name,
            block_scheme={"r": scheme.r, "l": scheme.l, "m": scheme.m},
            bias_note="D-ADJ uses the heuristic hill(k) - hill(k/2) bias proxy unless --bias is given",
        ),
        "records": records,
        "tail_index": tail_rows,
    }
    _emit(report, args)
    if records and all(r.get("error") for r in records):
        return EXIT_COMPUTE
    return EXIT_OK


# -------------------------------------------------------------------------- dynamic


def cmd_dynamic(args: argparse.Namespace) -> int:
    s = read_csv(args.input, args.schema)
    kinds = [k.strip() for k in args.kinds.split(",") if k.strip()]
    alpha = None if args.tau_prime is not None else args.alpha
    results = dynamic_risk_many(s, args.window, kinds, args.k, alpha, args.tau_prime, args.stride, args.workers)
    records, summary = [], []
    for kind in kinds:
        r = results[kind]
        for i in range(r.dates.size):
            records.append({
                "date": str(r.dates[i]),
                "kind": kind,
                "level": r.level_value[i],
                "realized": r.realized[i],
                "exceeded": bool(r.exceeded[i]),
                "mu": r.mu[i],
                "sigma": r.sigma[i],
                "gamma_hat": r.gamma[i],
                "tau_prime": r.level_used[i],
            })
        summary.append({
            "kind": kind,
            "evaluated": int(r.dates.size),
            "expected_exceedances": r.expected_exceedances,
            "observed_exceedances": r.observed_exceedances,
            "failures": [{"date": d, "reason": why} for d, why in r.failures],
        })
    report = {"meta": _meta("dynamic", args, n=s.n, series=s.name), "summary": summary, "records": records}
    _emit(report, args)
    if all(item["evaluated"] == 0 for item in summary):
        return EXIT_COMPUTE
    return EXIT_OK


# ------------------------------------------------------------------------------ mes


def mes_records(
    assets: dict[str, ReturnSeries],
    index: ReturnSeries,
    ks: Iterable[int],
    methods: Sequence[str] = CI_METHODS,
    level: float = 0.95,
    alpha: Optional[float] = None,
    bias: Optional[float] = None,
) -> list[dict]:
    records = []
    for name, x in assets.items():
        xa, ya = align([x, index])
        scheme = default_block_scheme(xa.n)
        for k in ks:
            try:
                estimates = mes_estimates(xa, ya, k, alpha)
            except TailRiskError as exc:
                for kind in MES_KINDS:
                    for method in methods:
                        records.append({"asset": name, "k": k, "kind": kind, "method": method, "error": str(exc)})
                continue
            for est in estimates:
                for method in methods:
                    rec = {
                        "asset": name, "k": k, "kind": est.threshold_kind, "method": method,
                        "tau_n": est.tau_n, "tau_prime": est.tau_prime, "gamma_x": est.gamma_x,
                        "threshold": est.threshold, "n_conditioning": est.n_conditioning, "point": est.value,
                    }
                    try:
                        ci = mes_confidence_interval(est, xa, scheme, level, method, bias)
                        rec.update(lo=ci.lo, hi=ci.hi, level=level, bias_hat=ci.bias_hat, error=None)
                    except TailRiskError as exc:
                        rec["error"] = str(exc)
                    records.append(rec)
    return records


def cmd_mes(args: argparse.Namespace) -> int:
    spec = read_index_spec(args.weights)
    series = {}
    for path in args.inputs:
        s = read_csv(path, args.schema)
        series[s.name] = s
    index = build_index(series, spec)
    assets = args.assets.split(",") if args.assets else [n for n, w in spec.components if w > 0]
    missing = [a for a in assets if a not in series]
    if missing:
        raise InputError(f"unknown assets {missing}")
    ks = _k_values(args, 100)
    methods = _methods(args.methods)
    records = mes_records({a: series[a] for a in assets}, index, ks, methods, args.confidence, args.alpha, args.bias)
    k_hi = min(args.index_k_max, index.n - 1)
    index_tail = [
        {"k": e.k, "gamma_hat": None if isinstance(e, SweepFailure) else e.gamma_hat,
         "error": e.reason if isinstance(e, SweepFailure) else None}
        for e in hill_sweep(index, 2, k_hi)
    ]
    report = {
        "meta": _meta("mes", args, n_index=index.n, weights=dict(spec.components)),
        "records": records,
        "index_tail": index_tail,
    }
    _emit(report, args)
    if records and all(r.get("error") for r in records):
        return EXIT_COMPUTE
    return EXIT_OK


# ------------------------------------------------------------------- ingest/simulate


def cmd_ingest(args: argparse.Namespace) -> int:
    s = read_csv(args.input, "price", args.name)
    write_csv(s, args.output)
    info = {"series": s.name, "n": s.n, "first": str(s.dates[0]), "last": str(s.dates[-1])}
    sys.stdout.write(json.dumps(_num(info)) + "\n")
    return EXIT_OK


def _params(items: Sequence[str]) -> dict[str, float]:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise InputError(f"expected key=value, got {item!r}")
        key, value = item.split("=", 1)
        try:
            out[key.strip()] = float(value)
        except ValueError as exc:
            raise InputError(f"bad parameter value in {item!r}") from exc
    return out


def cmd_simulate(args: argparse.Namespace) -> int:
    spec = SimSpec(args.kind, _params(args.param), args.n, args.seed)
    s = simulate(spec)
    write_csv(s, args.output)
    sys.stdout.write(json.dumps({"kind": spec.kind, "params": spec.params, "n": spec.n, "seed": spec.seed}, sort_keys=True) + "\n")
    return EXIT_OK


# ------------------------------------------------------------------------- parser


def _add_common(p: argparse.ArgumentParser, k_default: int) -> None:
    p.add_argument("--schema", choices=("price", "return"), default="price", help="CSV schema of the inputs")
    p.add_argument("--k", type=int, default=None, help=f"top order statistics (default {k_default})")
    p.add_argument("--k-min", type=int, default=None)
    p.add_argument("--k-max", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None, help="quantile-equivalent extreme level")
    p.add_argument("--methods", default=",".join(CI_METHODS), help="comma-separated interval methods")
    p.add_argument("--confidence", type=float, default=0.95)
    p.add_argument("--bias", type=float, default=None, help="user bias estimate for D-ADJ intervals")
    p.add_argument("--output", default=None, help="JSON report path (default stdout)")
    p.add_argument("--csv", default=None, help="also write the records as CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tailrisk", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="convert a date,price CSV into date,return (negative log-returns)")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--name", default=None)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("static", help="Hill, Weissman quantile and extreme expectiles over k")
    p.add_argument("--input", required=True)
    _add_common(p, 125)
    p.add_argument("--tau-prime", type=float, default=None, help="extreme level (default 1 - 1/n)")
    p.set_defaults(func=cmd_static)

    p = sub.add_parser("dynamic", help="rolling GARCH(1,1) two-step risk levels and exceedance backtest")
    p.add_argument("--input", required=True)
    p.add_argument("--schema", choices=("price", "return"), default="price")
    p.add_argument("--window", type=int, default=1000)
    p.add_argument("--alpha", type=float, default=0.999)
    p.add_argument("--tau-prime", type=float, default=None)
    p.add_argument("--kinds", default=",".join(DYNAMIC_KINDS))
    p.add_argument("--k", type=int, default=125)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--output", default=None)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_dynamic)

    p = sub.add_parser("mes", help="extreme QMES/XMES of assets against a weighted index")
    p.add_argument("--inputs", nargs="+", required=True, help="component CSVs; file stems name the series")
    p.add_argument("--weights", required=True, help="name=weight lines")
    p.add_argument("--assets", default=None, help="comma-separated assets to report (default: all weighted)")
    p.add_argument("--index-k-max", type=int, default=300)
    _add_common(p, 100)
    p.set_defaults(func=cmd_mes)

    p = sub.add_parser("simulate", help="write a synthetic series fixture")
    p.add_argument("--kind", choices=SIM_KINDS, required=True)
    p.add_argument("--param", action="append", default=[], help="generator parameter key=value (repeatable)")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except EstimationError as exc:
        sys.stderr.write(f"computation failed: {exc}\n")
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
