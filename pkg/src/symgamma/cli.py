"""Command-line front end.

Every subcommand writes ``<output-dir>/<command>.json``.  Exit status is 0
when all requested checks pass, 1 when a check fails (the report is still
written) and 2 for usage errors.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import asymptotics, gamma, operators, relations
from .errors import (
    ExtensionIllDefined,
    InvalidDimension,
    InvalidPartition,
    InvalidSpec,
    InvalidTuple,
    NoFundamentalOperator,
    NotApplicable,
    NumericalFailure,
    SlowConvergence,
    WindowTooSmall,
)
from .partitions import Side, enumerate_window
from .symbols import SymbolExpansion, load_symbol

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
DEFAULT_TOL = 1e-10
TOL_ENV = "SYMGAMMA_TOL"


class UsageError(Exception):
    pass


def _default_tol() -> float:
    raw = os.environ.get(TOL_ENV)
    if raw is None:
        return DEFAULT_TOL
    try:
        return float(raw)
    except ValueError:
        raise UsageError(f"{TOL_ENV}={raw!r} is not a number") from None


# --- helpers -------------------------------------------------------------------------

def _symbol(args, attr: str = "symbol") -> SymbolExpansion:
    path = getattr(args, attr)
    if path is None:
        raise UsageError(f"--{attr.replace('_', '-')} is required")
    try:
        phi = load_symbol(path, args.n)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read symbol file {path}: {exc}") from exc
    if args.n is None:
        args.n = phi.n
    return phi


def _matrix(args) -> operators.TruncatedOperator:
    try:
        op = operators.load_operator(args.matrix)
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot read matrix {args.matrix}: {exc}") from exc
    args.n, args.D = op.domain.n, op.domain.D
    return op


def _tuple(args) -> gamma.OperatorTuple:
    if args.tuple is None:
        raise UsageError("--tuple is required")
    try:
        return gamma.load_tuple(args.tuple)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read tuple {args.tuple}: {exc}") from exc


def _require_window(args):
    if args.n is None or args.D is None:
        raise UsageError("--n and --D are required")
    if args.n < 2:
        raise UsageError("--n must be at least 2")
    if args.D < args.n - 1:
        raise UsageError("--D must be at least n-1")


def _matrix_json(A) -> list:
    return gamma._matrix_to_json(np.asarray(A))


def _out(args, name: str) -> Path:
    return Path(args.output_dir) / name


# --- subcommands ----------------------------------------------------------------------

def cmd_basis(args):
    _require_window(args)
    window = enumerate_window(args.n, args.D, args.side)
    return True, {"window": window.to_dict(), "size": len(window)}


def cmd_toeplitz(args):
    phi = _symbol(args)
    if args.D is None:
        raise UsageError("--D is required")
    _require_window(args)
    if args.kind == "toeplitz":
        op = operators.toeplitz(phi, args.D)
    elif args.kind == "laurent":
        op = operators.assemble_laurent(phi, enumerate_window(phi.n, args.D, Side.LAURENT))
    elif args.kind == "hankel":
        op = operators.hankel(phi, args.D)
    else:
        op = operators.dual_toeplitz(phi, args.D)
    csv_path = _out(args, f"{args.kind}_matrix.csv")
    operators.export_operator(op, csv_path, _out(args, f"{args.kind}_matrix.json"))
    return True, {"matrix": csv_path.name, "metadata": operators.operator_metadata(op)}


def cmd_shift(args):
    _require_window(args)
    if not 1 <= args.j <= args.n - 1:
        raise UsageError("--j must satisfy 1 <= j <= n-1")
    op = operators.y_shift(args.j, args.n, args.D)
    csv_path = _out(args, f"Y{args.j}.csv")
    operators.export_operator(op, csv_path, _out(args, f"Y{args.j}.json"))
    return True, {"matrix": csv_path.name, "metadata": operators.operator_metadata(op)}


def cmd_check_bh(args):
    if args.matrix is not None:
        X = _matrix(args)
        if X.domain.side is not Side.ANALYTIC:
            raise UsageError("the matrix must act on an analytic window")
    else:
        phi = _symbol(args)
        _require_window(args)
        X = operators.toeplitz(phi, args.D)
    _require_window(args)
    report = relations.check_brown_halmos(X, operators.coordinate_tuple(args.n, args.D), args.tol)
    return report.passed, report.to_dict()


def cmd_check_analytic(args):
    phi = _symbol(args)
    _require_window(args)
    report = relations.check_analytic_characterization(phi, args.D, args.tol)
    return report.passed, report.to_dict()


def cmd_check_products(args):
    phi = _symbol(args)
    psi = _symbol(args, "symbol2")
    if phi.n != psi.n:
        raise UsageError("the two symbols have different dimensions")
    _require_window(args)
    report = relations.check_product_identities(phi, psi, args.D, args.tol)
    return report.passed, report.to_dict()


def cmd_compact_diag(args):
    if args.matrix is not None:
        T = _matrix(args)
    else:
        phi = _symbol(args)
        _require_window(args)
        T = operators.toeplitz(phi, args.D)
    n, D = args.n, args.D
    ls = range(1, args.l_max + 1)
    eta = asymptotics.eta_sequence(T, ls, args.tol)
    eta.to_csv(_out(args, "eta.csv"))
    ranks, passed = [], True
    for l in ls:
        entry = {"l": l}
        try:
            E = asymptotics.coefspace_projection_El(n, l, D)
            entry["rank_E"] = asymptotics.numerical_rank(E.matrix)
            entry["expected_rank_E"] = l ** (n - 1)
            F = asymptotics.finite_rank_Fl(n, l, D)
            entry["rank_F"] = asymptotics.numerical_rank(F.matrix)
            entry["expected_rank_F"] = l ** n
            entry["F_expansion_residual"] = asymptotics.fl_expansion_residual(n, l, D)
            passed &= entry["rank_E"] == entry["expected_rank_E"] and entry["rank_F"] == entry["expected_rank_F"]
        except WindowTooSmall as exc:
            entry["skipped"] = str(exc)
        ranks.append(entry)
    result = {"eta": eta.to_dict(), "projections": ranks}
    try:
        diag = asymptotics.asymptotic_toeplitz_diagnose(T, args.l_max, max(args.tol, 1e-12))
        result["diagnosis"] = diag.to_dict()
    except WindowTooSmall as exc:
        result["diagnosis"] = {"skipped": str(exc)}
    return passed, result


def cmd_gamma_q(args):
    t = _tuple(args)
    Q = gamma.compute_Q(t.P)
    member = gamma.q_membership_check(t, max(args.tol, 1e-8), Q=Q)
    decay = gamma.decay_check(t, args.j_max, max(args.tol, 1e-8))
    result = {
        "Q": _matrix_json(Q),
        "nonempty": gamma.nonemptiness_check(t, Q=Q),
        "q_membership": member.to_dict(),
        "decay": decay.to_dict(),
    }
    return member.passed and decay.decays, result


def cmd_gamma_extend(args):
    t = _tuple(args)
    triple = gamma.extend_via_Q(t, max(args.tol, 1e-8))
    result = {
        "K_dim": triple.K_dim,
        "residuals": triple.residuals,
        "gamma_unitary": triple.report.to_dict(),
        "R": [_matrix_json(r) for r in triple.R],
        "U": _matrix_json(triple.U),
        "V": _matrix_json(triple.V),
    }
    return triple.report.passed, result


def cmd_gamma2_pi(args):
    t = _tuple(args)
    if t.n != 2:
        raise UsageError("gamma2-pi needs a tuple with n = 2")
    report = gamma.gamma2_pi_embedding(t, args.N, max(args.tol, 1e-8))
    return report.passed, report.to_dict()


def cmd_certify_unitary(args):
    t = _tuple(args)
    report = relations.check_gamma_unitary(list(t.ops), max(args.tol, 1e-8))
    return report.passed, report.to_dict()


def cmd_check_contraction(args):
    t = _tuple(args)
    report = gamma.check_gamma_contraction_sampled(t, args.trials, args.max_deg, seed=args.seed,
                                                   tol=max(args.tol, 1e-8))
    return report.passed, report.to_dict()


def cmd_generate_tuple(args):
    if args.n is None or args.n < 2:
        raise UsageError("--n must be at least 2")
    rng = np.random.default_rng(args.seed)
    t = gamma.random_symmetrized_tuple(args.n, args.dim, rng, max_modulus=args.max_modulus)
    path = _out(args, "tuple.json")
    gamma.save_tuple(t, path)
    return True, {"tuple": path.name, "dim": t.dim, "n": t.n}


COMMANDS = {
    "basis": (cmd_basis, "list the partitions of a basis window"),
    "toeplitz": (cmd_toeplitz, "assemble an operator from a symbol and export it as CSV"),
    "shift": (cmd_shift, "export the shift Y_j"),
    "check-bh": (cmd_check_bh, "check the Brown-Halmos relations"),
    "check-analytic": (cmd_check_analytic, "check the analytic Toeplitz characterization"),
    "check-products": (cmd_check_products, "check the Toeplitz product identities"),
    "compact-diag": (cmd_compact_diag, "eta sequences, E_l/F_l ranks and asymptotic diagnosis"),
    "gamma-q": (cmd_gamma_q, "compute Q and its checks for an operator tuple"),
    "gamma-extend": (cmd_gamma_extend, "build the unitary extension on ran Q"),
    "gamma2-pi": (cmd_gamma2_pi, "the Pi embedding of a Gamma_2-contraction"),
    "certify-unitary": (cmd_certify_unitary, "certify a Gamma_n-unitary tuple"),
    "check-contraction": (cmd_check_contraction, "sampled spectral-set inequality"),
    "generate-tuple": (cmd_generate_tuple, "write a random symmetrized tuple"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="symgamma", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--n", type=int)
        p.add_argument("--D", type=int)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--symbol")
        p.add_argument("--symbol2")
        p.add_argument("--matrix", help="CSV written by 'toeplitz' or 'shift' (JSON sidecar alongside)")
        p.add_argument("--tuple", help="operator tuple JSON")
        p.add_argument("--output-dir", default=".")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--l-max", type=int, default=3)
        if name == "basis":
            p.add_argument("--side", choices=[s.value for s in Side], default="analytic")
        if name == "toeplitz":
            p.add_argument("--kind", choices=["toeplitz", "laurent", "hankel", "dual"], default="toeplitz")
        if name == "shift":
            p.add_argument("--j", type=int, default=1)
        if name == "gamma-q":
            p.add_argument("--j-max", type=int, default=200)
        if name == "gamma2-pi":
            p.add_argument("--N", type=int, default=60)
        if name == "check-contraction":
            p.add_argument("--trials", type=int, default=20)
            p.add_argument("--max-deg", type=int, default=3)
        if name == "generate-tuple":
            p.add_argument("--dim", type=int, default=8)
            p.add_argument("--max-modulus", type=float, default=0.9)
    return parser


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items())}


def _write_report(args, passed, result, error=None) -> Path:
    report = {
        "command": args.command,
        "config": _config(args),
        "passed": bool(passed),
        "result": relations._jsonable(result),
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }
    if error is not None:
        report["error"] = error
    path = _out(args, f"{args.command}.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        if args.tol is None:
            args.tol = _default_tol()
        if not (args.tol > 0 and math.isfinite(args.tol)):
            raise UsageError("tolerance must be positive")
        Path(args.output_dir).mkdir(parents=True, exist_ok=True)
        handler = COMMANDS[args.command][0]
        try:
            passed, result = handler(args)
        except (SlowConvergence, ExtensionIllDefined, NoFundamentalOperator, NotApplicable,
                NumericalFailure) as exc:
            path = _write_report(args, False, {}, f"{type(exc).__name__}: {exc}")
            print(f"FAIL {args.command}: {exc} (report: {path})", file=sys.stderr)
            return EXIT_FAIL
    except (UsageError, InvalidDimension, InvalidPartition, InvalidSpec, InvalidTuple,
            WindowTooSmall) as exc:
        print(f"symgamma {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    path = _write_report(args, passed, result)
    print(f"{'PASS' if passed else 'FAIL'} {args.command} (report: {path})")
    return EXIT_PASS if passed else EXIT_FAIL


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
