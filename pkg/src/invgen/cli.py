"""Command-line surface: reproducible runs, JSONL records, CSV summaries.

Exit codes: 0 success, 2 usage error, 3 capacity/budget error, 4 I/O error.
Option precedence is command-line flag > config-file key > built-in
default; the config file is flat key=value with keys identical to the long
flags, found via --config or the INVGEN_CONFIG environment variable.
"""
from __future__ import annotations

import argparse
import math
import os
import secrets
import sys
import time
from fractions import Fraction

from . import exact, experiments, fourier
from .constants import (
    BETA,
    DEFAULT_SEED,
    DELTA_FIX,
    fourgen_exponent,
    mainlemma_constants_check,
    mainlemma_margins,
)
from .errors import CapacityError
from .records import ExperimentRecord, new_run_id, summarize, write_record

DEFAULT_OUT = "invgen_records.jsonl"


def load_config(path: str | None) -> dict:
    if path is None:
        path = os.environ.get("INVGEN_CONFIG")
    if path is None or not os.path.exists(path):
        return {}
    out = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#") or "=" not in line:
                continue
            key, _, val = line.partition("=")
            out[key.strip()] = val.strip()
    return out


def _parse_seed(text: str) -> int:
    if text == "entropy":
        return secrets.randbits(63)
    return int(text, 0)


class _Resolver:
    """flag > config > default, with per-option casts."""

    def __init__(self, args: argparse.Namespace, config: dict):
        self.args = args
        self.config = config

    def get(self, name: str, cast, default):
        val = getattr(self.args, name.replace("-", "_"), None)
        if val is not None:
            return val
        if name in self.config:
            return cast(self.config[name])
        return default


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=_parse_seed, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--budget-cells", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="invgen",
        description="Fixed-set-size intersection experiments for random permutations.",
    )
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exact", help="exact probabilities via partition enumeration")
    ex = p.add_subparsers(dest="subcommand", required=True)
    q = ex.add_parser("common-size")
    q.add_argument("--n", type=int, default=None)
    q.add_argument("--r", type=int, default=None)
    q.add_argument("--limit", type=int, default=None)
    _add_common(q)
    q = ex.add_parser("small-cycle-dist")
    q.add_argument("--n", type=int, default=None)
    q.add_argument("--k", type=int, default=None)
    _add_common(q)

    p = sub.add_parser("mc", help="Monte Carlo estimates")
    mc = p.add_subparsers(dest="subcommand", required=True)
    q = mc.add_parser("common-size")
    q.add_argument("--n", type=int, default=None)
    q.add_argument("--r", type=int, default=None)
    q.add_argument("--trials", type=int, default=None)
    _add_common(q)
    q = mc.add_parser("quenched-fix")
    q.add_argument("--n", type=int, default=None)
    q.add_argument("--k", type=int, default=None)
    q.add_argument("--eps", type=float, default=None)
    q.add_argument("--trials", type=int, default=None)
    _add_common(q)
    q = mc.add_parser("dyadic-scan")
    q.add_argument("--n", type=int, default=None)
    q.add_argument("--trials", type=int, default=None)
    _add_common(q)
    q = mc.add_parser("sbig")
    q.add_argument("--k", type=int, default=None)
    q.add_argument("--c", type=float, default=None)
    q.add_argument("--trials", type=int, default=None)
    q.add_argument("--beta", type=float, default=None)
    _add_common(q)
    q = mc.add_parser("integral-decay")
    q.add_argument("--k-list", default=None)
    q.add_argument("--samples", type=int, default=None)
    q.add_argument("--eps", type=float, default=None)
    q.add_argument("--beta", type=float, default=None)
    _add_common(q)

    p = sub.add_parser("fourier", help="torus-side checks")
    fo = p.add_subparsers(dest="subcommand", required=True)
    q = fo.add_parser("trigsum")
    q.add_argument("--m", type=int, default=None)
    q.add_argument("--theta", default=None)
    _add_common(q)
    q = fo.add_parser("parseval")
    q.add_argument("--k", type=int, default=None)
    q.add_argument("--trials", type=int, default=None)
    q.add_argument("--beta", type=float, default=None)
    _add_common(q)

    q = sub.add_parser("verify-bounds", help="theorem-level inequality sweeps")
    q.add_argument("--nmax", type=int, default=None)
    _add_common(q)

    p = sub.add_parser("calibrate", help="fit the unquantified constants")
    ca = p.add_subparsers(dest="subcommand", required=True)
    q = ca.add_parser("event-c")
    q.add_argument("--eps", type=float, default=None)
    q.add_argument("--k", type=int, default=None)
    q.add_argument("--samples", type=int, default=None)
    _add_common(q)
    q = ca.add_parser("sbig-c")
    q.add_argument("--k", type=int, default=None)
    q.add_argument("--trials", type=int, default=None)
    q.add_argument("--beta", type=float, default=None)
    _add_common(q)

    q = sub.add_parser("summarize", help="flatten record stores to CSV")
    q.add_argument("--store", action="append", default=None)
    q.add_argument("--filter", action="append", default=None)
    q.add_argument("--group-by", default=None)
    _add_common(q)

    return top


def _emit(res: _Resolver, experiment: str, params: dict, seed: int, t0: float,
          estimate=None, ci=None, trials=None, payload=None) -> None:
    out = res.get("out", str, DEFAULT_OUT)
    rec = ExperimentRecord(
        run_id=new_run_id(),
        experiment=experiment,
        params=params,
        seed=seed,
        estimate=estimate,
        ci=ci,
        trials=trials,
        payload=payload,
        wall_time_ms=int((time.monotonic() - t0) * 1000),
    )
    try:
        write_record(rec, out)
    except OSError as exc:
        print(f"error: cannot write record: {exc}", file=sys.stderr)
        raise


def _cmd_exact(args, res: _Resolver) -> int:
    t0 = time.monotonic()
    seed = res.get("seed", _parse_seed, DEFAULT_SEED)
    if args.subcommand == "common-size":
        n = res.get("n", int, 4)
        r = res.get("r", int, 3)
        limit = res.get("limit", int, None)
        prob = exact.exact_common_size_prob(n, r, limit=limit)
        print(
            f"exact common-size n={n} r={r}: {prob.numerator}/{prob.denominator}"
            f" = {float(prob):.12g}"
        )
        _emit(res, "exact_common_size", {"n": n, "r": r}, seed, t0,
              estimate=float(prob),
              payload={"numerator": prob.numerator, "denominator": prob.denominator})
        return 0
    n = res.get("n", int, 10)
    k = res.get("k", int, 2)
    dist = exact.exact_small_cycle_count_dist(n, k)
    print("n,k,l,exact_value_numerator,exact_value_denominator,float_value,bound")
    rows = []
    for l, prob in dist.items():
        bound = exact.single_set_bound(k, l)
        print(
            f"{n},{k},{l},{prob.numerator},{prob.denominator},"
            f"{float(prob):.17g},{bound:.17g}"
        )
        rows.append({"l": l, "num": prob.numerator, "den": prob.denominator,
                     "bound": bound})
    _emit(res, "exact_small_cycle_dist", {"n": n, "k": k}, seed, t0, payload=rows)
    return 0


def _cmd_mc(args, res: _Resolver) -> int:
    t0 = time.monotonic()
    seed = res.get("seed", _parse_seed, DEFAULT_SEED)
    workers = res.get("workers", int, 1)
    if args.subcommand == "common-size":
        n = res.get("n", int, 4)
        r = res.get("r", int, 3)
        trials = res.get("trials", int, 100000)
        ests = experiments.mc_common_size(n, r, trials, seed, workers=workers)
        est = ests[-1]
        print(
            f"mc common-size n={n} r={r} trials={trials} seed={seed}: "
            f"p={est.p_hat:.6g} ci=[{est.ci_low:.6g},{est.ci_high:.6g}]"
        )
        _emit(res, "mc_common_size", {"n": n, "r": r, "workers": workers}, seed, t0,
              estimate=est.p_hat, ci=(est.ci_low, est.ci_high), trials=trials,
              payload=[{"r": i + 1, "p_hat": e.p_hat} for i, e in enumerate(ests)])
        return 0
    if args.subcommand == "quenched-fix":
        n = res.get("n", int, 20)
        k = res.get("k", int, 5)
        eps = res.get("eps", float, 0.5)
        trials = res.get("trials", int, 100000)
        est, shape = experiments.mc_quenched_fix(n, k, eps, trials, seed, workers)
        print(
            f"mc quenched-fix n={n} k={k} eps={eps}: p={est.p_hat:.6g} "
            f"shape=k^(log2-1+2eps)={shape:.6g}"
        )
        _emit(res, "mc_quenched_fix", {"n": n, "k": k, "eps": eps}, seed, t0,
              estimate=est.p_hat, ci=(est.ci_low, est.ci_high), trials=trials,
              payload={"bound_shape": shape})
        return 0
    if args.subcommand == "dyadic-scan":
        n = res.get("n", int, 100)
        trials = res.get("trials", int, 20000)
        ests, slope = experiments.mc_dyadic_scan(n, trials, seed, workers)
        for k, e in ests:
            print(f"k={k}: p={e.p_hat:.6g} ci=[{e.ci_low:.6g},{e.ci_high:.6g}]")
        print(f"log-log slope: {slope}")
        _emit(res, "mc_dyadic_scan", {"n": n}, seed, t0, trials=trials,
              payload={"slope": slope,
                       "points": [{"k": k, "p_hat": e.p_hat} for k, e in ests]})
        return 0
    if args.subcommand == "sbig":
        k = res.get("k", int, 50)
        c = res.get("c", float, 0.5)
        trials = res.get("trials", int, 200)
        beta = res.get("beta", float, BETA)
        joint, contain = experiments.mc_sbig(k, trials, seed, c, beta)
        print(
            f"mc sbig k={k} c={c}: joint p={joint.p_hat:.6g} "
            f"containment p={contain.p_hat:.6g}"
        )
        _emit(res, "mc_sbig", {"k": k, "c": c, "beta": beta}, seed, t0,
              estimate=joint.p_hat, ci=(joint.ci_low, joint.ci_high), trials=trials,
              payload={"containment": contain.p_hat})
        return 0
    # integral-decay
    raw = res.get("k_list", str, "16,32,64")
    k_list = [int(x) for x in str(raw).split(",") if x]
    samples = res.get("samples", int, 200)
    eps = res.get("eps", float, 0.01)
    beta = res.get("beta", float, BETA)
    rows = experiments.mc_integral_decay(k_list, samples, eps, seed, beta)
    for row in rows:
        print(
            f"k={row['k']}: median={row['median']:.6g} mean={row['mean']:.6g} "
            f"gated={row['gated_fraction']:.3f} C={row['C']:.4g}"
        )
    _emit(res, "mc_integral_decay",
          {"k_list": ",".join(map(str, k_list)), "eps": eps, "beta": beta},
          seed, t0, trials=samples, payload=rows)
    return 0


def _cmd_fourier(args, res: _Resolver) -> int:
    t0 = time.monotonic()
    seed = res.get("seed", _parse_seed, DEFAULT_SEED)
    if args.subcommand == "trigsum":
        m = res.get("m", int, 1000)
        raw = res.get("theta", str, "1/2")
        theta = Fraction(raw) if "/" in str(raw) else float(raw)
        val = fourier.trigsum(m, theta)
        norm = fourier.tnorm(theta)
        ref = math.log(min(1.0 / norm, m)) if norm > 0 else math.log(m)
        print(f"trigsum m={m} theta={raw}: {val:.10g} (log min(1/||t||, m) = {ref:.10g})")
        _emit(res, "fourier_trigsum", {"m": m, "theta": str(raw)}, seed, t0,
              estimate=val, payload={"reference": ref})
        return 0
    # parseval sweep
    import numpy as np

    k = res.get("k", int, 30)
    trials = res.get("trials", int, 100)
    beta = res.get("beta", float, BETA)
    rng = np.random.default_rng([seed, 0])
    violations = 0
    for _ in range(trials):
        inst = fourier.sample_riesz_instance(k, rng, beta)
        size, bound = fourier.parseval_lower_bound_check(inst)
        if size < bound - 1e-9:
            violations += 1
    print(f"parseval sweep k={k} trials={trials}: violations={violations}")
    _emit(res, "fourier_parseval", {"k": k, "beta": beta}, seed, t0,
          trials=trials, payload={"violations": violations})
    return violations and 1 or 0


def _cmd_verify_bounds(args, res: _Resolver) -> int:
    t0 = time.monotonic()
    seed = res.get("seed", _parse_seed, DEFAULT_SEED)
    nmax = res.get("nmax", int, 12)
    violations = 0
    checked = 0
    for n in range(1, nmax + 1):
        for k in range(1, n + 1):
            dist = exact.exact_small_cycle_count_dist(n, k)
            for l in range(0, n + 1):
                checked += 1
                prob = float(dist.get(l, 0))
                if prob > exact.single_set_bound(k, l):
                    violations += 1
    ok = mainlemma_constants_check()
    c = fourgen_exponent(1.0 / 40.0)
    m1, m2 = mainlemma_margins()
    print(
        f"small-cycle bound: {checked} cells checked, {violations} violations; "
        f"main-lemma constants ok={ok} (margins {m1:.4g}, {m2:.4g}); "
        f"c(1/40)={c:.6g}; beta={BETA:.12g}; delta={DELTA_FIX:.12g}"
    )
    _emit(res, "verify_bounds", {"nmax": nmax}, seed, t0,
          payload={"checked": checked, "violations": violations,
                   "constants_ok": ok, "c_fourgen": c})
    return 0 if violations == 0 and ok and c > 0 else 1


def _cmd_calibrate(args, res: _Resolver) -> int:
    t0 = time.monotonic()
    seed = res.get("seed", _parse_seed, DEFAULT_SEED)
    if args.subcommand == "event-c":
        eps = res.get("eps", float, 0.01)
        k = res.get("k", int, 1000)
        samples = res.get("samples", int, 2000)
        C = experiments.calibrate_event_C(eps, k, samples, seed)
        print(f"calibrated C(eps={eps}) at k={k}: {C:.6g}")
        _emit(res, "calibrate_event_c", {"eps": eps, "k": k}, seed, t0,
              estimate=C, trials=samples)
        return 0
    k = res.get("k", int, 50)
    trials = res.get("trials", int, 200)
    beta = res.get("beta", float, BETA)
    c = experiments.calibrate_sbig_c(k, trials, seed, beta)
    print(f"calibrated c* at k={k}: {c}")
    _emit(res, "calibrate_sbig_c", {"k": k, "beta": beta}, seed, t0,
          estimate=c, trials=trials)
    return 0


def _cmd_summarize(args, res: _Resolver) -> int:
    stores = args.store or [res.get("store", str, DEFAULT_OUT)]
    filters = []
    for f in args.filter or []:
        key, _, val = f.partition("=")
        filters.append((key, val))
    group_raw = res.get("group_by", str, None)
    group_by = [g for g in str(group_raw).split(",") if g] if group_raw else None
    sys.stdout.write(summarize(stores, filters, group_by))
    return 0


def dispatch(argv: list[str]) -> int:
    """Run one subcommand; returns the process exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    config = load_config(args.config)
    res = _Resolver(args, config)
    try:
        if args.command == "exact":
            return _cmd_exact(args, res)
        if args.command == "mc":
            return _cmd_mc(args, res)
        if args.command == "fourier":
            return _cmd_fourier(args, res)
        if args.command == "verify-bounds":
            return _cmd_verify_bounds(args, res)
        if args.command == "calibrate":
            return _cmd_calibrate(args, res)
        if args.command == "summarize":
            return _cmd_summarize(args, res)
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2  # pragma: no cover


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
