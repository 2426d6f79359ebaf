"""Command-line front end: ``hyperconv {eval,oracle,sweep,verify,acceptance}``.

Exit codes: 0 success, 1 a check failed, 2 bad arguments.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .closedform import closed_form_bound, closed_form_value
from .errors import DomainError, HyperconvError, StructureError
from .forms import Family, FormSpec, classify, make_form
from .harness import (
    DEFAULT_W_GRID,
    check_reduction_chain,
    load_presets,
    preset_spec,
    run_sweep,
    to_jsonable,
    write_report,
)
from .oracle import RngStream, estimate

FAMILY_ALIASES = {
    "theta": Family.THETA_ALPHA,
    "theta-lambda": Family.THETA_ALPHA_LAMBDA,
    "lambda-n": Family.LAMBDA_N,
    "lambda-n-alpha": Family.LAMBDA_N_ALPHA,
    "lambda-alpha-lambda": Family.LAMBDA_ALPHA_LAMBDA,
    "delta-n": Family.DELTA_N,
    "kernel-h": Family.KERNEL_H,
    "kernel-k": Family.KERNEL_K,
    "kernel-k-alpha": Family.KERNEL_K_ALPHA,
    "kernel-j": Family.KERNEL_J,
}


class UsageError(Exception):
    """Bad command-line input; reported with exit code 2."""


def _family(text: str) -> Family:
    key = text.strip()
    if key.lower() in FAMILY_ALIASES:
        return FAMILY_ALIASES[key.lower()]
    try:
        return Family(key)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"unknown family {text!r}; choose from {', '.join(FAMILY_ALIASES)}"
        ) from None


def _budget(text: str) -> int:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"budget must be a number, got {text!r}") from None
    if value <= 0 or value != int(value):
        raise argparse.ArgumentTypeError(f"budget must be a positive integer, got {text!r}")
    return int(value)


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _default_seed() -> int:
    env = os.environ.get("HYPERCONV_SEED")
    if env is None:
        return 42
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"HYPERCONV_SEED must be an integer, got {env!r}") from None


def _add_common(p: argparse.ArgumentParser, budget: bool = True):
    if budget:
        p.add_argument("--budget", type=_budget, default=None, help="samples per estimate (default 1e5)")
    p.add_argument("--seed", type=int, default=None, help="RNG seed (default $HYPERCONV_SEED or 42)")
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1, help="parallel sample streams")
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")


def _add_form(p: argparse.ArgumentParser, need_n: bool = True):
    p.add_argument("--family", type=_family, required=True, help=f"one of {', '.join(FAMILY_ALIASES)}")
    p.add_argument("--n", type=int, required=need_n, help="dimension")
    p.add_argument("--alpha", type=_floats, default=(), help="alpha, or comma list for lambda-alpha-lambda")
    p.add_argument("--lambda", dest="lam", type=float, default=None, help="exponent of the last factor")
    p.add_argument("--tau", type=float, default=1.0)
    w = p.add_mutually_exclusive_group()
    w.add_argument("--w-norm", type=float, default=None, help="|w| (canonical axis vector)")
    w.add_argument("--w", type=_floats, default=None, help="w as comma-separated components")
    p.add_argument("--v", type=_floats, default=None, help="second point for kernel families")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hyperconv", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="closed-form value and bound")
    _add_form(p)
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")

    p = sub.add_parser("oracle", help="Monte-Carlo estimate")
    _add_form(p)
    _add_common(p)
    p.add_argument("--proposal", choices=("hyperplane", "radial"), default="hyperplane")

    p = sub.add_parser("sweep", help="grid sweep with checks; writes CSV, JSON and a manifest")
    _add_form(p)
    _add_common(p)
    p.add_argument("--preset", default="default", help="named grid bundle from presets.json")
    p.add_argument("--out", type=Path, default=Path("hyperconv-report"))

    p = sub.add_parser("verify", help="dimension-reduction chain on grid sups")
    p.add_argument("--n", type=int, required=True, choices=(3, 4, 5))
    p.add_argument("--preset", default="default")
    _add_common(p)

    p = sub.add_parser("acceptance", help="run the acceptance criteria")
    p.add_argument("--only", type=_floats, default=None, help="comma list of criterion numbers")
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("--format", choices=("text", "json"), default="text")
    return parser


def _form(args) -> FormSpec:
    if args.w is None and args.w_norm is None:
        raise UsageError("one of --w-norm or --w is required")
    if args.w is not None and len(args.w) != args.n:
        raise UsageError(f"--w has {len(args.w)} components but --n is {args.n}")
    if args.family.is_kernel and args.v is None:
        raise UsageError(f"--v is required for kernel family {args.family.value}")
    alphas = args.alpha
    if args.family is Family.THETA_ALPHA and args.lam is not None:
        raise UsageError("--lambda is not used by theta; use theta-lambda")
    return make_form(args.family, args.n, alphas, args.lam, args.tau, args.w_norm, args.w, args.v)


def _num(x: float | None) -> str:
    if x is None:
        return "n/a"
    if math.isinf(x):
        return "diverges (PositiveInfinity)"
    return f"{x:.12g}"


def _emit(fmt: str, record: dict, text: str, out=None):
    out = sys.stdout if out is None else out
    if fmt == "json":
        out.write(json.dumps(to_jsonable(record), sort_keys=True) + "\n")
    elif fmt == "csv":
        flat = {k: v for k, v in to_jsonable(record).items() if not isinstance(v, (dict, list))}
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(flat), lineterminator="\n")
        w.writeheader()
        w.writerow(flat)
        out.write(buf.getvalue())
    else:
        out.write(text + "\n")


def cmd_eval(args) -> int:
    spec = _form(args)
    adm = classify(spec)
    value = closed_form_value(spec)
    rep = closed_form_bound(spec)
    bound = None if rep is None else rep.upper_bound
    record = {
        "form": spec.to_dict(),
        "status": adm.status.value,
        "reason": adm.reason,
        "value": value,
        "bound": bound,
        "bound_holds": None if rep is None else rep.holds,
    }
    if value is None:
        text = f"{spec.family.value} n={spec.n}: no closed form; estimate it with `hyperconv oracle`"
    else:
        text = f"{spec.family.value} n={spec.n} |w|={spec.w_norm:g}: value {_num(value)}"
        if bound is not None:
            text += f", bound {_num(bound)}"
    text += f" [{adm.status.value}{': ' + adm.reason if adm.reason else ''}]"
    _emit(args.format, record, text)
    return 0


def cmd_oracle(args) -> int:
    spec = _form(args)
    seed = args.seed if args.seed is not None else _default_seed()
    e = estimate(spec, args.budget or 100_000, RngStream(seed), args.workers, proposal=args.proposal)
    record = {"form": spec.to_dict(), "seed": seed, "workers": args.workers, **e.to_dict()}
    text = (
        f"{spec.family.value} n={spec.n} |w|={spec.w_norm:g}: {_num(e.value)} +- {e.stderr:.3g} "
        f"({e.n_samples} samples, {e.n_live} live, tail share {e.tail_share:.3g}"
        f"{', DIVERGENCE SUSPECTED' if e.divergence_suspected else ''})"
    )
    _emit(args.format, record, text)
    return 0


def cmd_sweep(args) -> int:
    if args.family.is_kernel:
        raise UsageError("kernel families cannot be swept; use `oracle` or quadratic_form_probe")
    seed = args.seed if args.seed is not None else _default_seed()
    lam = args.lam
    spec = preset_spec(args.preset, args.family, args.n, args.alpha, lam, seed, args.workers, args.budget)
    report = run_sweep(spec)
    paths = write_report(report, args.out)
    summary = report.summary()
    record = {"summary": summary, "files": {k: str(v) for k, v in paths.items()}, "passed": report.passed}
    lines = [f"{c.check}: {'pass' if c.passed else 'FAIL'} ({c.note})" for c in report.sweep_checks]
    lines.append(f"{summary['sup_label']}: {_num(summary['sup'])} at |w|={summary['sup_w_norm']}")
    lines.append(f"failed checks: {summary['failed_checks']}; wrote {', '.join(str(p) for p in paths.values())}")
    if args.format == "csv":
        sys.stdout.write(paths["csv"].read_text())
    else:
        _emit(args.format, record, "\n".join(lines))
    return 0 if report.passed else 1


def cmd_verify(args) -> int:
    presets = load_presets()
    if args.preset not in presets:
        raise UsageError(f"unknown preset {args.preset!r}; known: {sorted(presets)}")
    p = presets[args.preset]
    grid = DEFAULT_W_GRID if p.get("w_norms", "default") == "default" else tuple(p["w_norms"])
    seed = args.seed if args.seed is not None else _default_seed()
    rows = check_reduction_chain(args.n, grid, args.budget or int(p["budget"]), seed, args.workers)
    ok = all(r.passed for r in rows)
    if args.format == "csv":
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(["label", "lhs", "lhs_stderr", "rhs", "rhs_stderr", "constant", "pass", "slack"])
        for r in rows:
            w.writerow([r.label, r.lhs, r.lhs_stderr, r.rhs, r.rhs_stderr, r.constant, r.passed, r.slack])
    elif args.format == "json":
        sys.stdout.write(json.dumps(to_jsonable({"rows": [r.__dict__ for r in rows], "passed": ok}), sort_keys=True) + "\n")
    else:
        for r in rows:
            print(f"[{'pass' if r.passed else 'FAIL'}] {r.label}: {r.lhs:.6g} vs {r.rhs:.6g} "
                  f"(slack {r.slack:.4g}){' ' + r.note if r.note else ''}")
    return 0 if ok else 1


def cmd_acceptance(args) -> int:
    from .acceptance import format_line, run_all

    only = None
    if args.only:
        only = {int(x) for x in args.only}
        if not only <= set(range(1, 13)):
            raise UsageError(f"--only takes criterion numbers 1..12, got {sorted(only)}")
    echo = print if args.format == "text" else None
    results = run_all(args.workers, only, echo)
    if args.format == "json":
        print(json.dumps([r.__dict__ for r in results], sort_keys=True))
    else:
        print(f"{sum(r.passed for r in results)}/{len(results)} criteria passed")
    return 0 if all(r.passed for r in results) else 1


COMMANDS = {"eval": cmd_eval, "oracle": cmd_oracle, "sweep": cmd_sweep, "verify": cmd_verify,
            "acceptance": cmd_acceptance}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed the message
        return int(exc.code or 0)
    if getattr(args, "workers", 1) < 1:
        print("hyperconv: error: --workers must be >= 1", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](args)
    except (UsageError, StructureError, DomainError) as exc:
        print(f"hyperconv: error: {exc}", file=sys.stderr)
        return 2
    except HyperconvError as exc:  # numerical failure, not a usage problem
        print(f"hyperconv: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
