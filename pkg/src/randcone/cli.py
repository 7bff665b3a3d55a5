"""Command-line front end.

Exit codes: 0 success, 2 domain or flag error, 3 numeric solve failure,
4 resource cap exceeded.
"""
from __future__ import annotations

import argparse
import contextlib
import os
import sys
from fractions import Fraction
from typing import Sequence, TextIO

from randcone import asymptotics as asy
from randcone import bigcomb as bc
from randcone import conegeom as cg
from randcone import experiments as ex

EXIT_OK, EXIT_DOMAIN, EXIT_NUMERIC, EXIT_CAP = 0, 2, 3, 4


def _dec(x: float) -> str:
    return format(float(x), ".17g")


def _emit(out: TextIO, **items) -> None:
    for key, value in items.items():
        out.write(f"{key}={value}\n")


def _exact_report(out: TextIO, value: Fraction) -> None:
    _emit(out, fraction=f"{value.numerator}/{value.denominator}", decimal=_dec(value))


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"{text} is not an unsigned 64-bit integer")
    return value


# ---------------------------------------------------------------------------
# subcommands

def cmd_exact(args: argparse.Namespace, out: TextIO) -> int:
    q = args.query
    if q == "wendel":
        _exact_report(out, bc.wendel_probability(args.d, args.N))
    elif q == "bound":
        _exact_report(out, bc.ce_upper_bound(args.d, args.k))
    else:
        idx = bc.ConeIndex(args.d, args.N, args.k)
        fn = {"quotient": lambda: bc._quotient(idx, args.model),
              "expected": lambda: bc.expected_faces(idx, args.model),
              "difference": lambda: bc.difference(idx, args.model)}[q]
        _exact_report(out, fn())
    return EXIT_OK


def cmd_asymptotic(args: argparse.Namespace, out: TextIO) -> int:
    q = args.query
    if q == "rho-weak":
        _emit(out, value=_dec(asy.rho_weak(args.delta)))
    elif q == "rho-strong":
        root = asy.rho_strong(args.delta, args.tol)
        _emit(out, value=_dec(root), residual=_dec(asy.g_exponent(args.delta, root)))
    elif q == "g":
        _emit(out, value=_dec(asy.g_exponent(args.delta, args.rho)))
    elif q == "window-limit":
        if args.kind == "ce":
            value = asy.window_limit_ce(args.rho, args.c)
        elif args.kind == "wendel":
            value = asy.window_limit_wendel(args.c)
        else:
            value = asy.window_limit_ratio(args.c, args.b)
        _emit(out, value=_dec(value))
    elif q == "bounds":
        d, N = args.d, args.N
        p = bc.wendel_probability(d, N)
        items = {"lower_tail_exact": _dec(p), "upper_tail_exact": _dec(1 - p)}
        applicable = False
        with contextlib.suppress(ValueError):
            items["lower_tail_bound"] = _dec(asy.okamoto_lower_tail_bound(d, N))
            applicable = True
        with contextlib.suppress(ValueError):
            items["upper_tail_bound"] = _dec(asy.okamoto_upper_tail_bound(d, N))
            applicable = True
        if not applicable:
            raise ValueError(f"neither tail bound applies at d={d}, N={N} (needs 2d != N, N >= 2)")
        _emit(out, **items)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace, out: TextIO) -> int:
    k = args.k if args.query == "faces" else None
    cfg = cg.SimulationConfig(args.d, args.N, args.trials, seed=args.seed, k=k,
                              threads=args.threads)
    if args.query == "wendel":
        est = cg.estimate_wendel(cfg)
        exact = bc.wendel_probability(args.d, args.N)
    else:
        idx = cfg.index
        exact = bc.expected_faces(idx, args.model)
        try:
            est = cg.estimate_faces(cfg, args.model)
        except cg.LowAcceptanceError as exc:
            print(f"warning: {exc}", file=sys.stderr)
            est = exc.estimate
    _emit(out, estimate=_dec(est.mean), stderr=_dec(est.stderr), trials=est.trials,
          rejected=est.rejected, degenerate=est.degenerate,
          exact=f"{exact.numerator}/{exact.denominator}", exact_decimal=_dec(exact),
          zscore=_dec(est.zscore(float(exact))) if est.trials else "nan")
    return EXIT_OK


def _sequence_spec(args: argparse.Namespace) -> ex.SequenceSpec:
    regime = args.regime
    if regime == "fixed-ratio":
        return ex.SequenceSpec(regime, args.delta, rho=_need(args, "rho"))
    if regime == "fixed-k":
        return ex.SequenceSpec(regime, args.delta, k_fixed=_need(args, "k"))
    if regime == "sqrt-window":
        return ex.SequenceSpec(regime, args.delta, window=asy.WindowSpec(_need(args, "c")))
    if regime == "power-window":
        window = asy.WindowSpec(_need(args, "c"), _need(args, "alpha"), _need(args, "mode"))
        return ex.SequenceSpec(regime, args.delta, window=window)
    return ex.SequenceSpec(regime, args.delta)


def _need(args: argparse.Namespace, name: str):
    value = getattr(args, name)
    if value is None:
        raise ValueError(f"--{name} is required for regime {args.regime}")
    return value


def cmd_sweep(args: argparse.Namespace, out: TextIO) -> int:
    spec = _sequence_spec(args)
    if args.d_step < 1 or args.d_to < args.d_from:
        raise ValueError("need --d-step >= 1 and --d-to >= --d-from")
    ds = range(args.d_from, args.d_to + 1, args.d_step)
    kind = args.kind or ("difference" if spec.regime == "oscillating" else "quotient")
    if kind == "quotient":
        rows = ex.run_quotient_sweep(spec, ds, threads=args.threads)
        ys = ["quotient_dt", "quotient_ce"]
    else:
        rows = ex.run_difference_sweep(spec, ds, threads=args.threads)
        ys = ["diff_log_dt", "diff_log_ce"]
    ex.emit_csv(rows, out)
    if args.svg:
        ex.emit_svg_lineplot(rows, "d", ys, args.svg)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="randcone", description=__doc__.splitlines()[0],
                                     allow_abbrev=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(p_sub, name: str, help_: str) -> argparse.ArgumentParser:
        p = p_sub.add_parser(name, help=help_, allow_abbrev=False)
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
        return p

    exact = sub.add_parser("exact", help="exact rational quantities")
    eq = exact.add_subparsers(dest="query", required=True)
    p = add(eq, "wendel", "Wendel probability P(d, N)")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    for name in ("quotient", "expected", "difference"):
        p = add(eq, name, f"{name} for a cone model")
        p.add_argument("--model", choices=bc.MODELS, required=True)
        p.add_argument("--d", type=int, required=True)
        p.add_argument("--N", type=int, required=True)
        p.add_argument("--k", type=int, required=True)
    p = add(eq, "bound", "upper bound (2^d - 2^k)/(2^d - 1) on the CE quotient")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int, required=True)

    asym = sub.add_parser("asymptotic", help="thresholds and limits")
    aq = asym.add_subparsers(dest="query", required=True)
    p = add(aq, "rho-weak", "weak threshold")
    p.add_argument("--delta", type=float, required=True)
    p = add(aq, "rho-strong", "strong threshold (zero of G)")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-13)
    p = add(aq, "g", "exponent G(delta, rho)")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--rho", type=float, required=True)
    p = add(aq, "window-limit", "Gaussian critical-window limits")
    p.add_argument("--kind", choices=("ce", "wendel", "ratio"), required=True)
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--b", type=float, default=0.0)
    p = add(aq, "bounds", "exponential tail bounds next to exact tails")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--N", type=int, required=True)

    sim = sub.add_parser("simulate", help="Monte Carlo estimates")
    sq = sim.add_subparsers(dest="query", required=True)
    for name in ("wendel", "faces"):
        p = add(sq, name, f"estimate {name}")
        if name == "faces":
            p.add_argument("--model", choices=bc.MODELS, required=True)
            p.add_argument("--k", type=int, required=True)
        p.add_argument("--d", type=int, required=True)
        p.add_argument("--N", type=int, required=True)
        p.add_argument("--trials", type=int, default=10000)
        p.add_argument("--seed", type=_u64, default=0)

    p = add(sub, "sweep", "exact sweep over dimensions, CSV output")
    p.add_argument("--regime", choices=ex.REGIMES, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--rho", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--c", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--mode", choices=("upper-power", "two-sided-power", "lower-power"))
    p.add_argument("--kind", choices=("quotient", "difference"))
    p.add_argument("--d-from", type=int, required=True)
    p.add_argument("--d-to", type=int, required=True)
    p.add_argument("--d-step", type=int, default=1)
    p.add_argument("--svg", default=None)
    p.add_argument("--seed", type=_u64, default=0)
    return parser


COMMANDS = {"exact": cmd_exact, "asymptotic": cmd_asymptotic,
            "simulate": cmd_simulate, "sweep": cmd_sweep}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_DOMAIN
    handler = COMMANDS[args.command]
    try:
        if args.out is None:
            return handler(args, sys.stdout)
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            return handler(args, fh)
    except cg.SubsetCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (asy.RootFindingError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
