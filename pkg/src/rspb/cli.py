"""Command-line surface for bounds, sweeps, and verification suites.

Every numeric quantity is in nats. Single evaluations print one JSON object;
rate sweeps print CSV with a fixed column order. All floating output is
rounded to 9 significant digits and all randomness is seeded, so identical
invocations produce byte-identical output. Exit codes: 0 success, 1
unreadable input file, 2 precondition violation, 3 non-convergence or
non-certification (a partial report is still printed).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, fields, is_dataclass

import numpy as np

from . import verify as verify_mod
from .augustin import (
    augustin_capacity,
    augustin_fixed_point,
    augustin_info_derivative,
    haroutunian_rate,
    read_constraint,
)
from .errors import ComputationError, PreconditionError, SpbError
from .gaussian import AwgnParams, awgn_capacity, awgn_parametric, awgn_rho_star, shannon_cone, theta_of_rho
from .htbe import ht_params, htbe_achievability, htbe_converse, threshold_gamma, threshold_test
from .measures import (
    FiniteDist,
    bec,
    bern,
    bsc,
    identity_residuals,
    read_channel,
    read_distribution,
    renyi_divergence,
    tilted_log_moments,
    tilted_measure,
    uniform_dist,
    zchannel,
)
from .refined import (
    rspb_awgn_equality,
    rspb_awgn_inequality,
    rspb_constant_composition,
    rspb_symmetric,
)
from .spe import spe_grid_sup, spe_parametric
from .symmetric import check_renyi_symmetry, parametric_symmetric

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_PRECONDITION = 2
EXIT_UNCERTIFIED = 3

SWEEP_COLUMNS = (
    "rate",
    "rho_star",
    "exponent",
    "slope",
    "log_prefactor",
    "bound_log",
    "applicable",
    "status",
)


def _fmt_float(x: float):
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(f"{x:.9g}")


def _jsonable(obj):
    if isinstance(obj, FiniteDist):
        return _jsonable(obj.masses)
    if is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable({f.name: getattr(obj, f.name) for f in fields(obj)})
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    return obj


def _emit(report: dict):
    print(json.dumps(_jsonable(report), indent=2, sort_keys=True))


def _csv_cell(value):
    if value is None:
        return "nan"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        v = _fmt_float(value)
        return v if isinstance(v, str) else f"{v:.9g}"
    return str(value)


def _emit_csv(rows):
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        writer.writerow([_csv_cell(row.get(col)) for col in SWEEP_COLUMNS])


def _worker_count() -> int:
    raw = os.environ.get("SPB_THREADS")
    if raw is None:
        return 1
    value = int(raw)
    return os.cpu_count() or 1 if value == 0 else max(1, value)


def _map_rows(fn, grid):
    workers = _worker_count()
    if workers <= 1:
        return [fn(x) for x in grid]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, grid))


def _parse_grid(spec: str):
    parts = spec.split(":")
    if len(parts) != 3:
        raise PreconditionError(f"grid spec must be start:stop:count, got {spec!r}")
    start, stop = float(parts[0]), float(parts[1])
    count = int(parts[2])
    if count < 2 or not start < stop:
        raise PreconditionError("grid needs count >= 2 and start < stop")
    return np.linspace(start, stop, count)


# ---------------------------------------------------------------------------
# shared argument groups


def _add_channel_args(sp):
    sp.add_argument("--channel", help="channel file (JSON rows)")
    sp.add_argument("--bsc", type=float, help="binary symmetric channel, crossover p")
    sp.add_argument("--bec", type=float, help="binary erasure channel, erasure e")
    sp.add_argument("--zchannel", type=float, help="Z channel, flip probability p")


def _get_channel(args):
    picks = [
        ("channel", args.channel),
        ("bsc", args.bsc),
        ("bec", args.bec),
        ("zchannel", args.zchannel),
    ]
    given = [(k, v) for k, v in picks if v is not None]
    if len(given) != 1:
        raise PreconditionError("give exactly one of --channel/--bsc/--bec/--zchannel")
    kind, value = given[0]
    if kind == "channel":
        return read_channel(value)
    return {"bsc": bsc, "bec": bec, "zchannel": zchannel}[kind](value)


def _get_dist(spec: str, size: int) -> FiniteDist:
    if spec == "uniform":
        return uniform_dist(size)
    return read_distribution(spec)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_divergence(args):
    w = read_distribution(args.w)
    q = read_distribution(args.q)
    report = {
        "order": args.order,
        "divergence": renyi_divergence(args.order, w, q),
    }
    if math.isfinite(report["divergence"]):
        mean, a2, a3 = tilted_log_moments(args.order, w, q)
        report["tilted"] = tilted_measure(args.order, w, q)
        report["tilted_log_moments"] = {"mean": mean, "a2": a2, "a3": a3}
        if 0 < args.order < 1:
            report["identity_residual"] = identity_residuals(args.order, w, q)
    _emit(report)
    return EXIT_OK


def _cmd_augustin(args):
    channel = _get_channel(args)
    p = _get_dist(args.input_dist, channel.input_size)
    sol = augustin_fixed_point(args.order, p, channel, tol=args.tol, max_iter=args.max_iter)
    report = {
        "order": args.order,
        "mean": sol.mean,
        "information": sol.information,
        "iterations": sol.iterations,
        "residual": sol.residual,
        "identity_residual": sol.alt_identity_residual,
        "haroutunian_rate": haroutunian_rate(args.order, p, channel),
        "info_derivative": augustin_info_derivative(args.order, p, channel),
        "tolerance": args.tol,
        "max_iter": args.max_iter,
    }
    _emit(report)
    return EXIT_OK


def _cmd_capacity(args):
    channel = _get_channel(args)
    constraint = read_constraint(args.constraint) if args.constraint else None
    res = augustin_capacity(args.order, channel, constraint, tol=args.tol)
    _emit(
        {
            "order": args.order,
            "capacity": res.capacity,
            "center": res.center,
            "optimizer": res.optimizer,
            "certificate_gap": res.certificate_gap,
            "certified": res.certified,
        }
    )
    return EXIT_OK if res.certified else EXIT_UNCERTIFIED


def _spe_row(channel, comp, n, rate):
    row = dict.fromkeys(SWEEP_COLUMNS)
    row["rate"] = rate
    row["status"] = "ok"
    try:
        if n is not None:
            rep = rspb_constant_composition(channel, comp, n, rate * n)
            row.update(
                rho_star=rep.rho_star,
                exponent=rep.exponent_total / n,
                slope=rep.slope,
                log_prefactor=rep.log_prefactor,
                bound_log=rep.bound_log,
                applicable=rep.applicable,
            )
        else:
            pt = spe_parametric(comp, channel, rate)
            row.update(
                rho_star=pt.rho_star, exponent=pt.exponent, slope=pt.slope
            )
    except SpbError as exc:
        row["status"] = type(exc).__name__
    return row


def _cmd_spe(args):
    channel = _get_channel(args)
    comp = _get_dist(args.composition, channel.input_size)
    if ":" in args.rate:
        grid = _parse_grid(args.rate)
        rows = _map_rows(lambda r: _spe_row(channel, comp, args.n, float(r)), grid)
        _emit_csv(rows)
        return EXIT_OK
    rate = float(args.rate)
    point = spe_parametric(comp, channel, rate)
    report = {
        "rate": rate,
        "rho_star": point.rho_star,
        "exponent": point.exponent,
        "slope": point.slope,
    }
    if args.grid_size:
        report["grid_sup"] = spe_grid_sup(comp, channel, rate, args.grid_size)
    if args.output == "csv":
        _emit_csv([_spe_row(channel, comp, args.n, rate)])
    else:
        _emit(report)
    return EXIT_OK


def _cmd_symmetric(args):
    channel = _get_channel(args)
    report = check_renyi_symmetry(channel, tol=args.tol)
    out = {
        "is_symmetric": report.is_symmetric,
        "checked_orders": list(report.checked_orders),
        "max_divergence_spread": report.max_divergence_spread,
        "max_profile_distance": report.max_profile_distance,
        "max_center_fixed_point_tv": report.max_center_fixed_point_tv,
        "center_per_order": {f"{k:g}": v for k, v in report.center_per_order.items()},
    }
    if args.rate is not None:
        point = parametric_symmetric(channel, args.rate, tol=args.tol)
        out["parametric"] = {
            "rate": point.rate,
            "rho_star": point.rho_star,
            "exponent": point.exponent,
            "slope": point.slope,
            "slope_certified": point.slope_certified,
        }
    _emit(out)
    return EXIT_OK


def _awgn_row(params, n, rate):
    row = dict.fromkeys(SWEEP_COLUMNS)
    row["rate"] = rate
    row["status"] = "ok"
    try:
        if n is not None:
            rep = rspb_awgn_equality(n, rate * n, params)
            row.update(
                rho_star=rep.rho_star,
                exponent=rep.exponent_total / n,
                slope=rep.slope,
                log_prefactor=rep.log_prefactor,
                bound_log=rep.bound_log,
                applicable=rep.applicable,
            )
        else:
            rho = awgn_rho_star(rate, params)
            pt = awgn_parametric(rho, params)
            row.update(rho_star=rho, exponent=pt.esp, slope=pt.slope)
    except SpbError as exc:
        row["status"] = type(exc).__name__
    return row


def _cmd_awgn(args):
    params = AwgnParams(sigma2=args.sigma2, cost=args.cost)
    if args.order is None and args.rate is None:
        raise PreconditionError("give --order or --rate")
    if args.rate is not None and ":" in args.rate:
        grid = _parse_grid(args.rate)
        rows = _map_rows(lambda r: _awgn_row(params, args.n, float(r)), grid)
        _emit_csv(rows)
        return EXIT_OK
    if args.rate is not None:
        rate = float(args.rate)
        rho = awgn_rho_star(rate, params)
    else:
        rho = args.order
    report = {
        "sigma2": args.sigma2,
        "cost": args.cost,
        "order": rho,
        "theta": theta_of_rho(rho, params),
        "capacity": awgn_capacity(rho, params),
        "capacity_order_one": params.capacity_order_one(),
    }
    if 0 < rho < 1:
        point = awgn_parametric(rho, params)
        report.update(
            rate=point.rate,
            esp=point.esp,
            slope=point.slope,
            a2=point.a2,
            a3_bound=point.a3_bound,
            log_delta_hat=point.log_delta_hat,
        )
        cone = shannon_cone(point.rate, params)
        report.update(
            sgex=cone.sgex,
            theta_c=cone.theta_c,
            theta_cr=cone.theta_cr,
            cone_gain=cone.G_of_xi,
        )
        if args.rate is not None:
            report["rho_star"] = rho
    if args.output == "csv":
        _emit_csv([_awgn_row(params, args.n, report.get("rate", math.nan))])
    else:
        _emit(report)
    return EXIT_OK


def _report_dict(rep):
    out = asdict(rep)
    out["slope"] = rep.slope
    return out


def _cmd_rspb(args):
    if args.log_m_over_l is None and args.rate is None:
        raise PreconditionError("give --log-m-over-l or --rate")
    log_ml = args.log_m_over_l if args.log_m_over_l is not None else args.rate * args.n
    if args.mode == "cc":
        channel = _get_channel(args)
        comp = _get_dist(args.composition, channel.input_size)
        rep = rspb_constant_composition(channel, comp, args.n, log_ml)
    elif args.mode == "symmetric":
        channel = _get_channel(args)
        rep = rspb_symmetric([channel] * args.n, log_ml)
    else:
        params = AwgnParams(sigma2=args.sigma2, cost=args.cost)
        if args.mode == "awgn":
            rep = rspb_awgn_equality(args.n, log_ml, params)
        else:
            extension = "shannon" if args.mode == "awgn-shannon" else "vazquez_vilar"
            rep = rspb_awgn_inequality(args.n, log_ml, params, extension)
    _emit({"mode": args.mode, **_report_dict(rep)})
    return EXIT_OK


def _cmd_htbe(args):
    if args.w_bern is not None:
        w = bern(args.w_bern)
    elif args.w:
        w = read_distribution(args.w)
    else:
        raise PreconditionError("give --w FILE or --w-bern P")
    if args.q_bern is not None:
        q = bern(args.q_bern)
    elif args.q:
        q = read_distribution(args.q)
    else:
        raise PreconditionError("give --q FILE or --q-bern P")
    n = args.n
    params = ht_params(args.order, [w], [q])
    tilt = tilted_measure(args.order, w, q)
    d1_tq = n * renyi_divergence(1.0, tilt, q)
    d1_tw = n * renyi_divergence(1.0, tilt, w)
    conv = htbe_converse(args.order, n, args.beta, params, d1_tq, d1_tw)
    ach = htbe_achievability(args.order, n, args.beta, params, d1_tq, d1_tw)
    gamma = threshold_gamma(args.order, n, args.beta, params)
    test = threshold_test(gamma, [w] * n, [q] * n, args.order, budget=args.budget)
    _emit(
        {
            "order": args.order,
            "n": n,
            "beta": args.beta,
            "a2": params.a2,
            "a3": params.a3,
            "log_delta_hat": params.log_delta_hat,
            "d1_tilt_q_total": d1_tq,
            "d1_tilt_w_total": d1_tw,
            "converse": conv,
            "achievability": ach,
            "threshold_test": test,
        }
    )
    return EXIT_OK


def _cmd_verify(args):
    kwargs = {}
    if args.suite == "htbe":
        if args.n is not None:
            kwargs["ns"] = (args.n,)
        kwargs["betas_per_n"] = args.betas
        kwargs["seed"] = args.seed
    elif args.suite == "identities":
        kwargs["pairs"] = args.pairs
        kwargs["seed"] = args.seed
    elif args.suite == "spe":
        kwargs["instances"] = args.instances
        kwargs["grid_size"] = args.grid_size or 4096
        kwargs["seed"] = args.seed
    elif args.suite == "thirdmoment":
        kwargs["count"] = args.count
        kwargs["seed"] = args.seed
    report = verify_mod.run_suite(args.suite, **kwargs)
    _emit(report)
    return EXIT_OK if report["all_pass"] else EXIT_UNCERTIFIED


# ---------------------------------------------------------------------------
# parser


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rspb",
        description=(
            "Refined sphere-packing bounds, Augustin information, and "
            "hypothesis-testing trade-offs. All quantities are in nats."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--output", choices=("object", "csv"), default="object")
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("divergence", help="Renyi divergence and tilt (nats)")
    sp.add_argument("--order", type=float, required=True)
    sp.add_argument("--w", required=True, help="distribution file")
    sp.add_argument("--q", required=True, help="distribution file")
    common(sp)
    sp.set_defaults(func=_cmd_divergence)

    sp = sub.add_parser("augustin", help="Augustin mean and information (nats)")
    sp.add_argument("--order", type=float, required=True)
    _add_channel_args(sp)
    sp.add_argument("--input-dist", default="uniform", help="'uniform' or a file")
    sp.add_argument("--tol", type=float, default=1e-12)
    sp.add_argument("--max-iter", type=int, default=20000)
    common(sp)
    sp.set_defaults(func=_cmd_augustin)

    sp = sub.add_parser("capacity", help="Augustin capacity with certificate (nats)")
    sp.add_argument("--order", type=float, required=True)
    _add_channel_args(sp)
    sp.add_argument("--constraint", help="constraint file; default all inputs")
    sp.add_argument("--tol", type=float, default=1e-8)
    common(sp)
    sp.set_defaults(func=_cmd_capacity)

    sp = sub.add_parser("spe", help="sphere-packing exponent (nats); rate sweeps emit CSV")
    _add_channel_args(sp)
    sp.add_argument("--composition", default="uniform", help="'uniform' or a file")
    sp.add_argument("--rate", required=True, help="rate in nats, or start:stop:count")
    sp.add_argument("--n", type=int, help="blocklength for prefactor columns")
    sp.add_argument("--grid-size", type=int, help="also report the grid supremum")
    common(sp)
    sp.set_defaults(func=_cmd_spe)

    sp = sub.add_parser("symmetric", help="Renyi-symmetry certificate and parametric point (nats)")
    _add_channel_args(sp)
    sp.add_argument("--rate", type=float, help="rate in nats for the parametric point")
    sp.add_argument("--tol", type=float, default=1e-9)
    common(sp)
    sp.set_defaults(func=_cmd_symmetric)

    sp = sub.add_parser("awgn", help="Gaussian closed forms (nats); rate sweeps emit CSV")
    sp.add_argument("--sigma2", type=float, required=True)
    sp.add_argument("--cost", type=float, required=True)
    sp.add_argument("--order", type=float)
    sp.add_argument("--rate", help="rate in nats, or start:stop:count")
    sp.add_argument("--n", type=int, help="blocklength for prefactor columns")
    common(sp)
    sp.set_defaults(func=_cmd_awgn)

    sp = sub.add_parser("rspb", help="refined sphere-packing lower bound (log domain, nats)")
    sp.add_argument("--mode", choices=("cc", "symmetric", "awgn", "awgn-shannon", "awgn-vv"),
                    required=True)
    _add_channel_args(sp)
    sp.add_argument("--composition", default="uniform", help="'uniform' or a file")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--log-m-over-l", type=float, help="ln M - ln L")
    sp.add_argument("--rate", type=float, help="rate in nats; log-m-over-l = rate * n")
    sp.add_argument("--sigma2", type=float)
    sp.add_argument("--cost", type=float)
    common(sp)
    sp.set_defaults(func=_cmd_rspb)

    sp = sub.add_parser("htbe", help="hypothesis-testing bounds for a product pair (nats)")
    sp.add_argument("--order", type=float, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--beta", type=float, required=True)
    sp.add_argument("--w", help="distribution file")
    sp.add_argument("--q", help="distribution file")
    sp.add_argument("--w-bern", type=float, help="Bernoulli shorthand for --w")
    sp.add_argument("--q-bern", type=float, help="Bernoulli shorthand for --q")
    sp.add_argument("--budget", type=int, default=2_000_000)
    common(sp)
    sp.set_defaults(func=_cmd_htbe)

    sp = sub.add_parser("verify", help="run a verification suite and report pass/fail")
    sp.add_argument("suite", choices=("htbe", "identities", "spe", "thirdmoment", "all"))
    sp.add_argument("--n", type=int)
    sp.add_argument("--betas", type=int, default=10)
    sp.add_argument("--pairs", type=int, default=200)
    sp.add_argument("--instances", type=int, default=6)
    sp.add_argument("--count", type=int, default=1000)
    sp.add_argument("--grid-size", type=int)
    common(sp)
    sp.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PreconditionError as exc:
        print(f"error: precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except ComputationError as exc:
        _emit({"partial": True, "error": type(exc).__name__, "detail": str(exc)})
        print(f"error: not certified: {exc}", file=sys.stderr)
        return EXIT_UNCERTIFIED


if __name__ == "__main__":
    sys.exit(main())
