"""Command-line entry point: ``toplink classify|bosonise|simulate|verify|limit``.

Exit codes: 0 success, 1 check failure, 2 input error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import jsonio
from .algebra import to_spin
from .bosonisation import Elliptic, Rational, Trigonometric, bosonise, case_form
from .canonical import reduce
from .checks import run_suite
from .dynamics import IntegratorConfig, integrate_cm, integrate_top, trajectory_csv, trajectory_summary
from .equivalence import DEFAULT_K_LADDER, degeneration_limit
from .errors import AmbiguousClassificationError, DomainError, EvaluationError, PoleError, ToplinkError
from .jsonio import InputError

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3

log = logging.getLogger("toplink")


def _complex_arg(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from exc


def _k_ladder(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated reals, got {text!r}") from exc


def _add_case(p: argparse.ArgumentParser, required: bool = True):
    p.add_argument("--case", choices=("rational", "trigonometric", "trig", "elliptic"), required=required)
    p.add_argument("--beta", type=_complex_arg, help="rational case parameter")
    p.add_argument("--gamma", type=_complex_arg, help="trigonometric case parameter")
    p.add_argument("--k", type=_complex_arg, help="elliptic modulus")
    p.add_argument("--nu", type=_complex_arg, default=1.0, help="orbit level (Casimir = nu^2)")


def _add_point(p: argparse.ArgumentParser):
    p.add_argument("--p", type=_complex_arg, default=0.0)
    p.add_argument("--q", type=_complex_arg, default=None)


def _add_integrator(p: argparse.ArgumentParser):
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--t-end", type=float, default=1.0)
    p.add_argument("--method", choices=("rk4", "rk45"), default="rk4")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="toplink", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="canonical class of a quadratic form (JSON in, JSON out)")
    p.add_argument("--form", default="-", help="JSON file with a 3x3 matrix ('-' reads stdin)")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--out")

    p = sub.add_parser("bosonise", help="orbit state at a phase point")
    _add_case(p)
    _add_point(p)
    p.add_argument("--basis", choices=("both", "chevalley", "spin"), default="both")
    p.add_argument("--out")

    p = sub.add_parser("simulate", help="integrate the top or the two-body flow")
    p.add_argument("side", choices=("top", "cm"))
    _add_case(p, required=False)
    _add_point(p)
    p.add_argument("--form", help="top: JSON quadratic form (default: the case's form)")
    p.add_argument("--s0", help="top: JSON initial spin state (default: bosonised (p, q))")
    _add_integrator(p)
    p.add_argument("--out", help="CSV path; the JSON summary goes next to it")

    p = sub.add_parser("verify", help="run the property suite")
    p.add_argument("--suite", default="all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the JSON report here")

    p = sub.add_parser("limit", help="k -> 0 sweep of the regularised elliptic map")
    p.add_argument("--nu", type=_complex_arg, default=1.0)
    _add_point(p)
    p.add_argument("--k-ladder", type=_k_ladder, default=list(DEFAULT_K_LADDER),
                   help="decreasing comma-separated k values")
    p.add_argument("--out", help="CSV path; the JSON summary goes next to it")
    return parser


def make_case(args):
    nu = args.nu
    if args.case == "rational":
        given = {"beta": args.beta}
        case = Rational(beta=1.0 if args.beta is None else args.beta, nu=nu)
    elif args.case in ("trigonometric", "trig"):
        given = {"gamma": args.gamma}
        case = Trigonometric(gamma=1.0 if args.gamma is None else args.gamma, nu=nu)
    else:
        given = {"k": args.k}
        case = Elliptic(k=0.5 if args.k is None else args.k, nu=nu)
    stray = [n for n in ("beta", "gamma", "k") if n not in given and getattr(args, n) is not None]
    if stray:
        raise InputError(f"--{stray[0]} does not belong to the {args.case} case")
    return case


def _read_json(path: str):
    if path == "-":
        return jsonio.loads(sys.stdin.read(), "<stdin>")
    fp = Path(path)
    if not fp.exists():
        raise InputError(f"no such file: {path}")
    return jsonio.loads(fp.read_text(), path)


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _summary_path(out: str) -> Path:
    return Path(out).with_suffix(".json")


def cmd_classify(args) -> int:
    J = jsonio.parse_matrix(_read_json(args.form))
    res = reduce(J, tol=args.tol)
    payload = {
        "class": res.cls.name,
        "params": list(res.cls.params),
        "transform": res.transform,
        "casimir_shift": res.casimir_shift,
        "residual": res.residual,
        "hamiltonian_scale": res.hamiltonian_scale,
        "reason": res.reason,
    }
    _emit(jsonio.dumps(payload), args.out)
    return EXIT_OK


def _point(args):
    if args.q is None:
        raise InputError("--q is required")
    return (args.p, args.q)


def cmd_bosonise(args) -> int:
    case = make_case(args)
    chev = bosonise(case, _point(args))
    payload = {}
    if args.basis in ("both", "chevalley"):
        payload.update(chev._asdict())
    if args.basis in ("both", "spin"):
        payload.update(to_spin(chev, axis="S3")._asdict())
    _emit(jsonio.dumps(payload), args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = IntegratorConfig(dt=args.dt, t_end=args.t_end, method=args.method)
    if args.side == "cm":
        if args.case is None:
            raise InputError("simulate cm needs --case")
        traj = integrate_cm(make_case(args), _point(args), cfg)
    else:
        case = make_case(args) if args.case else None
        if args.form:
            J = jsonio.parse_matrix(_read_json(args.form), args.form)
        elif case is not None:
            J = case_form(case)
        else:
            raise InputError("simulate top needs --form or --case")
        if args.s0:
            S0 = jsonio.parse_vector(_read_json(args.s0), args.s0)
        elif case is not None and args.q is not None:
            S0 = np.array(bosonise(case, _point(args), basis="spin"))
        else:
            raise InputError("simulate top needs --s0, or --case with --p/--q")
        traj = integrate_top(J, S0, cfg)
    summary = trajectory_summary(traj)
    summary.update({"dt": cfg.dt, "t_end": cfg.t_end, "method": cfg.method})
    text = trajectory_csv(traj)
    if args.out:
        Path(args.out).write_text(text)
        _summary_path(args.out).write_text(jsonio.dumps(summary) + "\n")
        sys.stdout.write(jsonio.dumps(summary) + "\n")
    else:
        sys.stdout.write(text)
        sys.stderr.write(jsonio.dumps(summary) + "\n")
    return EXIT_OK if traj.completed else EXIT_NUMERIC


def cmd_verify(args) -> int:
    report = run_suite(args.suite, seed=args.seed)
    for r in report["checks"]:
        sys.stderr.write(r.line() + "\n")
    _emit(jsonio.dumps(report), args.out)
    return EXIT_OK if report["passed"] else EXIT_CHECK


def cmd_limit(args) -> int:
    rep = degeneration_limit(args.nu, _point(args), args.k_ladder)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "S1_re", "S1_im", "S2_re", "S2_im", "S3_re", "S3_im", "casimir_residual", "det_residual"])
    for k, S, c, d in zip(rep.ks, rep.states, rep.casimir_residuals, rep.det_residuals):
        row = [format(k, ".17g")]
        for z in S:
            row += [format(z.real + 0.0, ".17g"), format(z.imag + 0.0, ".17g")]
        w.writerow(row + [format(c, ".17g"), format(d, ".17g")])
    summary = {
        "nu": rep.nu,
        "p": rep.pt[0],
        "q": rep.pt[1],
        "order": rep.order,
        "limit": rep.limit,
        "closed_form": rep.closed_form,
        "extrapolation_error": rep.extrapolation_error,
        "limit_casimir_residual": rep.limit_casimir_residual,
        "limit_bracket_residual": rep.limit_bracket_residual,
        "bounded_s1_error": rep.bounded_s1_error,
        "raw_growth": rep.raw_growth,
        "unregularised_growth": rep.literal_growth,
        "gamma_fit": rep.gamma_fit,
        "printed_comparison": rep.printed_comparison,
        "diverged": rep.diverged,
        "message": rep.message,
    }
    if args.out:
        Path(args.out).write_text(buf.getvalue())
        _summary_path(args.out).write_text(jsonio.dumps(summary) + "\n")
        sys.stdout.write(jsonio.dumps(summary) + "\n")
    else:
        sys.stdout.write(buf.getvalue())
        sys.stderr.write(jsonio.dumps(summary) + "\n")
    return EXIT_CHECK if rep.diverged else EXIT_OK


COMMANDS = {
    "classify": cmd_classify,
    "bosonise": cmd_bosonise,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "limit": cmd_limit,
}


def _configure_logging():
    level = os.environ.get("TOPLINK_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses exit status 2 for usage errors already
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (PoleError, EvaluationError) as exc:
        sys.stderr.write(f"numeric failure: {exc}\n")
        return EXIT_NUMERIC
    except AmbiguousClassificationError as exc:
        sys.stderr.write(f"ambiguous classification (candidates {', '.join(exc.candidates)}): {exc}\n")
        return EXIT_NUMERIC
    except (InputError, DomainError, ValueError) as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EXIT_INPUT
    except ToplinkError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
