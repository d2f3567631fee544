"""Command-line front end: ``quasispec <solve-ode|eig|pseudospectra|example> ...``.

Tables go to ``--output`` (or stdout) as CSV with 17 significant digits;
the run summary and timings go to stderr so the CSV is reproducible.
Exit codes: 0 success, 2 parse error, 3 solver failure, 4 no eigenpair.
"""

from __future__ import annotations

import argparse
import inspect
import io
import sys
import time
from typing import Sequence

import numpy as np

from .errors import NoEigenpairError, ProblemFileError, QuasispecError
from .experiments import EXAMPLES, Report, run_example
from .lssolvers.operators import apply_operator
from .lssolvers.problem_file import load_problem
from .lssolvers.solvers import lseig, lseig_bc, lsode
from .pseudospectra import format_float, grid_eval, write_grid_csv

EXIT_OK, EXIT_PARSE, EXIT_SOLVER, EXIT_NOPAIR = 0, 2, 3, 4


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_float(float(v) + 0.0)  # no negative zero
    return str(v)


def table_csv(columns: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for r in rows:
        buf.write(",".join(_cell(v) for v in r) + "\n")
    return buf.getvalue()


def _emit(text: str, output: str | None):
    if output:
        with open(output, "w", encoding="ascii", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _note(msg: str):
    print(msg, file=sys.stderr)


def _summary_text(rep: Report) -> str:
    lines = [f"# {rep.name}"]
    for k, v in rep.config.items():
        lines.append(f"#   {k} = {v}")
    for k, v in rep.summary.items():
        if isinstance(v, np.ndarray):
            v = np.array2string(v, precision=6, suppress_small=True)
        lines.append(f"# {k}: {v}")
    lines.append(f"# elapsed: {rep.elapsed:.3f} s")
    return "\n".join(lines)


# --------------------------------------------------------------------------

def _config_overrides(args) -> dict:
    out = {}
    for key in ("tol", "alpha", "beta", "bc_mode"):
        v = getattr(args, key, None)
        if v is not None:
            out[key] = v
    if getattr(args, "balance", False):
        out["balance"] = True
    if getattr(args, "no_scale_columns", False):
        out["scale_columns"] = False
    return out


def cmd_solve_ode(args) -> int:
    sizes = args.n or [None]
    rows, u = [], None
    for n in sizes:
        spec = load_problem(args.problem, n)
        if spec.operatorA is None or spec.rhs is None:
            raise ProblemFileError(f"{args.problem}: solve-ode needs 'operator' and 'rhs'")
        cfg = spec.config
        over = _config_overrides(args)
        over.pop("tol", None)
        if over:
            from dataclasses import replace

            cfg = replace(cfg, **over)
        t0 = time.perf_counter()
        u, res = lsode(spec.operatorA, spec.rhs, spec.basis, spec.bcs, cfg)
        rows.append((spec.basis.n, res))
        _note(f"# n = {spec.basis.n}: residual {res:.3e} ({time.perf_counter() - t0:.3f} s)")
    _emit(table_csv(["n", "residual"], rows), None)
    if args.output:
        x = np.linspace(*spec.domain, args.samples)
        v = u(x)
        _emit(table_csv(["x", "re", "im"], [(a, b.real, b.imag) for a, b in zip(x, v)]), args.output)
    return EXIT_OK


def cmd_eig(args) -> int:
    spec = load_problem(args.problem, args.n)
    over = _config_overrides(args)
    problem = spec.eig_problem(**over)
    solver = lseig_bc if problem.config.bc_mode == "exact" and problem.d > 0 else lseig
    t0 = time.perf_counter()
    res = solver(problem)
    _note(f"# {solver.__name__} on {spec.source}: n = {problem.n}, d = {problem.d}, "
          f"{len(res)} pairs with relres <= {problem.config.tol:g} ({time.perf_counter() - t0:.3f} s)")
    _emit(table_csv(["re", "im", "relres"], [(r.value.real, r.value.imag, r.relres) for r in res]), args.output)
    if not res:
        raise NoEigenpairError("no eigenpair passed the residual filter")
    return EXIT_OK


def cmd_pseudospectra(args) -> int:
    if args.problem:
        spec = load_problem(args.problem, args.n)
        if spec.operatorA is None:
            raise ProblemFileError(f"{args.problem}: needs 'operatorA'")
        A = apply_operator(spec.operatorA, spec.basis)
        B = apply_operator(spec.operatorB, spec.basis)
    else:
        from .lssolvers.problems import cheb_legendre_pencil

        A, B = cheb_legendre_pencil()
    t0 = time.perf_counter()
    grid = grid_eval(A, B, args.re, args.im, args.nx, args.ny)
    _note(f"# pseudospectra grid {args.nx} x {args.ny} ({time.perf_counter() - t0:.3f} s); "
          f"min value {grid.values.min():.3e}")
    _emit(write_grid_csv(grid), args.output)
    return EXIT_OK


_EXAMPLE_FLAGS = ("n", "tol", "method", "R", "h", "eps", "m", "nmax", "d")


def cmd_example(args) -> int:
    fn = EXAMPLES[args.name]
    params = inspect.signature(fn).parameters
    kwargs = {}
    for key in _EXAMPLE_FLAGS:
        v = getattr(args, key, None)
        if v is None:
            continue
        if key not in params:
            raise ProblemFileError(f"example {args.name!r} does not take --{key}")
        kwargs[key] = v
    if any(p.kind is p.VAR_KEYWORD for p in params.values()):
        over = _config_overrides(args)
        over.pop("tol", None)
        over.pop("bc_mode", None)
        kwargs.update(over)
    rep = run_example(args.name, **kwargs)
    _note(_summary_text(rep))
    _emit(table_csv(rep.columns, rep.rows), args.output)
    if rep.name in ("orr-sommerfeld", "sturm-liouville", "lambda-bc") and not rep.rows:
        raise NoEigenpairError("no eigenpair passed the residual filter")
    return EXIT_OK


# --------------------------------------------------------------------------

def _add_config_flags(p, tol=True):
    if tol:
        p.add_argument("--tol", type=float, help="residual filter in (0, 1]")
    p.add_argument("--alpha", type=float, help="weight of the function rows")
    p.add_argument("--beta", type=float, help="weight of the boundary rows")
    p.add_argument("--balance", action="store_true", help="divide A by ||A||_F/||B||_F before solving")
    p.add_argument("--no-scale-columns", action="store_true", help="skip column equilibration")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="quasispec", description="Least-squares spectral solvers for ODEs")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve-ode", help="solve L u = f from a problem file")
    p.add_argument("problem")
    p.add_argument("--n", type=int, nargs="+", help="basis size(s); several values give a convergence table")
    p.add_argument("--bc-mode", choices=["leastsquares", "exact"])
    p.add_argument("--samples", type=int, default=201, help="points in the solution CSV")
    p.add_argument("--output", help="solution samples CSV")
    _add_config_flags(p, tol=False)
    p.set_defaults(func=cmd_solve_ode)

    p = sub.add_parser("eig", help="eigenpairs of a problem file")
    p.add_argument("problem")
    p.add_argument("--n", type=int)
    p.add_argument("--bc-mode", choices=["leastsquares", "exact"])
    p.add_argument("--output")
    _add_config_flags(p)
    p.set_defaults(func=cmd_eig)

    p = sub.add_parser("pseudospectra", help="sigma_min(zB - A)/sqrt(1+|z|^2) on a grid")
    p.add_argument("problem", nargs="?", help="problem file; default is the Chebyshev/Legendre pencil")
    p.add_argument("--n", type=int)
    p.add_argument("--re", type=float, nargs=2, default=[0.8, 2.2], metavar=("MIN", "MAX"))
    p.add_argument("--im", type=float, nargs=2, default=[-0.5, 0.5], metavar=("MIN", "MAX"))
    p.add_argument("--nx", type=int, default=71)
    p.add_argument("--ny", type=int, default=51)
    p.add_argument("--output")
    p.set_defaults(func=cmd_pseudospectra)

    p = sub.add_parser("example", help="run a built-in experiment")
    p.add_argument("name", choices=sorted(EXAMPLES), metavar="name", help=", ".join(EXAMPLES))
    p.add_argument("--n", type=int)
    p.add_argument("--method", help="solver or formulation, depending on the example")
    p.add_argument("--R", type=float, help="Reynolds number (orr-sommerfeld)")
    p.add_argument("--h", type=float, help="semiclassical parameter (schrodinger)")
    p.add_argument("--eps", type=float, help="diffusion coefficient (airy)")
    p.add_argument("--m", type=int, help="Krylov dimension (airy)")
    p.add_argument("--nmax", type=int, help="largest basis size (pilot-krylov)")
    p.add_argument("--d", type=float, help="boundary parameter (lambda-bc)")
    p.add_argument("--output")
    _add_config_flags(p)
    p.set_defaults(func=cmd_example)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ProblemFileError as exc:
        _note(f"error: {exc}")
        return EXIT_PARSE
    except NoEigenpairError as exc:
        _note(f"error: {exc}")
        return EXIT_NOPAIR
    except (QuasispecError, ValueError, np.linalg.LinAlgError) as exc:
        _note(f"error: {exc}")
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
