"""Command-line front end: constants, density, charsum, verify, bias.

Exit codes: 0 success, 2 domain or admissibility error, 3 resource cap,
1 numerical failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from fractions import Fraction

from . import __version__
from . import charsums as cs
from . import constants as C
from . import density as D
from . import verify as V
from .errors import DomainError, NumericError, ResourceError
from .families import family_by_name, scale, validate_and_residues

EXIT_OK, EXIT_NUMERIC, EXIT_DOMAIN, EXIT_RESOURCE, EXIT_USAGE = 0, 1, 2, 3, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _clean(obj):
    """Floats to 15 significant digits, Fractions to "num/den", keys kept in order."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return str(obj)
        return float(f"{obj:.15g}")
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalar
        return _clean(obj.item())
    return str(obj)


def render_json(config: dict, results, diagnostics: dict) -> str:
    doc = {"config": config, "results": results, "diagnostics": diagnostics}
    return json.dumps(_clean(doc), indent=2, ensure_ascii=False) + "\n"


def render_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\r\n")
        writer.writeheader()
        for r in rows:
            writer.writerow(_clean(r))
    return buf.getvalue()


def _trunc(args) -> C.TruncationParams:
    return C.TruncationParams(P=args.P, P_Q=args.PQ, L_max=args.Lmax, T=args.T, quad_tol=args.quad_tol)


def _grid(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from None


def _real(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ecdensity", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, family=True, congruence=True, trunc=False):
        if family:
            p.add_argument("--family", choices=["f1", "f2"], default="f1")
        if congruence:
            p.add_argument("--q", type=int, default=1)
            p.add_argument("--a0", type=int, default=1)
            p.add_argument("--b0", type=int, default=1)
        if trunc:
            d = C.TruncationParams()
            p.add_argument("--P", type=int, default=d.P, help="prime cutoff for c1, c3, c4, c6")
            p.add_argument("--PQ", type=int, default=d.P_Q, help="prime cutoff for c5")
            p.add_argument("--Lmax", type=int, default=d.L_max, help="l cutoff in the Q-series cross-check")
            p.add_argument("--T", type=int, default=d.T, help="theta cutoff for the R-integral")
            p.add_argument("--quad-tol", type=float, default=d.quad_tol)
        p.add_argument("--format", choices=["json", "csv"], default="json")
        p.add_argument("--out", default="-", help="output path, - for stdout")
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1)

    p = sub.add_parser("constants", help="all c, d, e constants")
    common(p, trunc=True)
    p.add_argument("--cross-check", action="store_true", help="also run the c5 Q-series comparison")

    p = sub.add_parser("density", help="empirical vs predicted 1-level density")
    common(p, trunc=True)
    p.add_argument("--X", type=_real, default=1e6)
    p.add_argument("--grid", type=_grid, default=None, help="comma-separated X values (CSV rows)")
    p.add_argument("--rho", type=float, default=0.2)
    p.add_argument("--kind", choices=sorted(D.KINDS), default="fejer")

    p = sub.add_parser("charsum", help="exact complete character sums mod p")
    common(p, congruence=False)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--nu", type=int, default=None)

    p = sub.add_parser("verify", help="family size, divisibility, conductor checks")
    common(p)
    p.add_argument("--check", choices=["size", "divisibility", "conductor", "radical"], default="size")
    p.add_argument("--grid", type=_grid, default=list(V.DEFAULT_GRID))
    p.add_argument("--X", type=_real, default=1e8)
    p.add_argument("--p", type=int, default=3)

    p = sub.add_parser("bias", help="biased congruence family")
    common(p, congruence=False)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--sign", choices=["plus", "minus", "+", "-"], required=True)
    return parser


def _config(args) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "threads")}
    return cfg


def _cmd_constants(args):
    fam = family_by_name(args.family.upper())
    rep = C.constants_report(fam, args.q, args.a0, args.b0, trunc=_trunc(args), threads=args.threads)
    diag = dict(rep.diagnostics)
    if args.cross_check:
        diag["c5_cross_check"] = C.c5_cross_check(fam, min(args.PQ, 500), args.Lmax)
    return rep.as_dict(), diag, None


def _cmd_density(args):
    fam = family_by_name(args.family.upper())
    params = validate_and_residues(fam, args.q, args.a0, args.b0)
    test = D.make_test_function(args.kind, args.rho, fam)
    grid = args.grid or [args.X]
    reports = [D.compare_report(scale(params, X), test, _trunc(args)) for X in grid]
    rows = [
        {"X": r.scaled["X"], "empirical": r.empirical, "predicted": r.predicted, "residual": r.residual,
         "residual_scaled": r.residual_scaled, "W_X": r.W_X}
        for r in reports
    ]
    results = [r.as_dict() for r in reports] if args.grid else reports[0].as_dict()
    diag = {"gamma_term": {str(X): D.gamma_term(X, test) for X in grid}}
    return results, diag, rows


def _cmd_charsum(args):
    fam = family_by_name(args.family.upper())
    p = args.p
    if args.nu is not None:
        m = cs.Q_exact(fam, p, args.nu)
        results = {"p": p, "nu": args.nu, "Q": str(m), "value": float(m)}
    else:
        results = {
            "p": p,
            "second_moment": cs.second_moment(fam, p),
            "good_pairs": cs.good_pair_count(fam, p),
            "local_factor_sum": cs.local_factor_sum(fam, p),
        }
    hist = [{"a_p": a, "bad": bad, "count": n} for a, bad, n in cs.ap_histogram(fam, p)]
    return results, {"ap_histogram": hist}, None


def _cmd_verify(args):
    fam = family_by_name(args.family.upper())
    params = validate_and_residues(fam, args.q, args.a0, args.b0)
    if args.check == "size":
        rows = V.family_size_check(params, None, args.grid)
    elif args.check == "conductor":
        rows = V.avg_log_conductor_check(params, None, args.grid)
    elif args.check == "divisibility":
        rows = [V.p_divides_density_check(params, None, args.X, args.p)]
    else:
        rows = [V.log_radical_check(params, None, args.X)]
    dicts = [r.as_dict() for r in rows]
    diag = {"decays_within_noise": V.decays([r.residual_scaled for r in rows])} if len(rows) > 1 else {}
    return dicts, diag, dicts


def _cmd_bias(args):
    fam = family_by_name(args.family.upper())
    bias = D.bias_builder(fam, args.n, "+" if args.sign in ("plus", "+") else "-")
    return bias.as_dict(), {}, None


COMMANDS = {
    "constants": _cmd_constants,
    "density": _cmd_density,
    "charsum": _cmd_charsum,
    "verify": _cmd_verify,
    "bias": _cmd_bias,
}


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(str(exc), file=stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        if args.threads < 1:
            raise DomainError("--threads must be >= 1")
        results, diagnostics, rows = COMMANDS[args.command](args)
    except ResourceError as exc:
        print(f"resource error: {exc}", file=stderr)
        return EXIT_RESOURCE
    except DomainError as exc:
        print(f"domain error: {exc}", file=stderr)
        return EXIT_DOMAIN
    except NumericError as exc:
        print(f"numeric error: {exc}", file=stderr)
        return EXIT_NUMERIC
    if args.format == "csv":
        if rows is None:
            print("usage error: csv output is only available for grid-valued results", file=stderr)
            return EXIT_USAGE
        text = render_csv(rows)
    else:
        text = render_json(_config(args), results, diagnostics)
    if args.out == "-":
        stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
