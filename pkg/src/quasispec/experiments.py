"""Runners for the named examples; each returns a :class:`Report` table."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .funcore import from_callable, norm_l2
from .lssolvers import problems as pb
from .lssolvers.krylov import AdaptiveLsodeSolver, chebyshev_basis, krylov_subspace
from .lssolvers.operators import BasisGroup, EigProblem, EigResult, SolverConfig, assemble
from .lssolvers.solvers import lseig, lseig_bc, lsode, pencil_coords
from .quasimatrix import Quasimatrix
from .rectgep import itomurota_block

__all__ = ["EXAMPLES", "Report", "run_example", "smallest_residual_pair", "subspace_residual_history"]


@dataclass
class Report:
    """A table plus scalar summary values; ``elapsed`` is wall time in seconds."""

    name: str
    columns: list[str]
    rows: list[tuple]
    summary: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    elapsed: float = 0.0


def _solver(method: str) -> Callable[[EigProblem], list[EigResult]]:
    try:
        return {"lseig": lseig, "lseig_bc": lseig_bc}[method]
    except KeyError:
        raise ValueError(f"unknown solver {method!r}; use lseig or lseig_bc") from None


def _eig_rows(results: list[EigResult]) -> list[tuple]:
    return [(r.value.real, r.value.imag, r.relres) for r in results]


# --------------------------------------------------------------------------

def cheb_legendre() -> Report:
    A, B = pb.cheb_legendre_pencil()
    out = itomurota_block(A, B)
    lam = np.sort_complex(out.lambdas)
    exact = np.array(sorted(pb.CHEB_LEGENDRE_EIGENVALUES))
    k3 = int(np.argmin(np.abs(out.lambdas - 4 / 3)))
    return Report(
        "cheb-legendre",
        ["re", "im"],
        [(z.real, z.imag) for z in lam],
        {
            "max_abs_error": float(np.max(np.abs(lam - exact))),
            "eigvec_4_3": out.X[:, k3],
            "pert_norm": out.pert_norm,
        },
    )


def pilot_krylov(nmax: int = 15) -> Report:
    """Residual on ``u'' + |x| u' + u = e^x`` with Krylov vs polynomial bases of size n."""
    s1, s2, f = pb.pilot_setup()
    inner = AdaptiveLsodeSolver(s1.op, s1.domain, s1.bcs)
    Q = krylov_subspace(inner, f, nmax, start="inverse")
    rows = []
    for n in range(2, Q.n + 1):
        _, rk = lsode(s2.op, f, Q[list(range(n))], s2.bcs)
        _, rp = lsode(s2.op, f, chebyshev_basis(n, s2.domain), s2.bcs)
        rows.append((n, rk, rp))
    return Report("pilot-krylov", ["n", "residual_krylov", "residual_poly"], rows, {"krylov_dim": Q.n})


def subspace_residual_history(problem_for: Callable[[int], EigProblem], dims, select=None) -> list[tuple]:
    """For each dimension solve with lseig and keep the pair of smallest absolute residual.

    The residual is the augmented one, ``||(A - lambda B) c|| / ||u||``
    with the boundary rows included and ``u`` the eigenfunction.
    """
    rows = []
    for m in dims:
        P = problem_for(m)
        res = lseig(P)
        if not res:
            continue
        A, B = assemble(P)
        _, (MA, MB) = pencil_coords(A, B)
        G = P.solution_basis().gram()
        best = smallest_residual_pair(res, MA, MB, G) if select is None else select(res)
        r, pair = best
        rows.append((m, pair.value.real, pair.value.imag, r, pair.relres))
    return rows


def smallest_residual_pair(results, MA, MB, G):
    best = None
    for p in results:
        c = p.coeffs
        un = math.sqrt(max(float(np.real(np.vdot(c, G @ c))), 0.0))
        r = float(np.linalg.norm(MA @ c - p.value * (MB @ c))) / un if un > 0 else math.inf
        if best is None or r < best[0]:
            best = (r, p)
    return best


def airy(eps: float = 1e-8, m: int = 20) -> Report:
    """LSeig over nested inverse-iteration Krylov subspaces of dimension 2..m."""
    setup, u0, inner = pb.airy_setup(eps)
    Q = krylov_subspace(inner, u0, m)

    def problem_for(k):
        return EigProblem([BasisGroup(Q[list(range(k))], setup.op)], list(setup.bcs), SolverConfig(tol=1.0))

    d = len(setup.bcs)
    rows = subspace_residual_history(problem_for, range(max(d, 1), Q.n + 1))
    A, _ = assemble(problem_for(Q.n))
    _, (MA,) = pencil_coords(A)
    return Report(
        "airy",
        ["dim", "re", "im", "residual", "relres"],
        rows,
        {"krylov_dim": Q.n, "final_residual": rows[-1][3], "norm_A": float(np.linalg.norm(MA, 2))},
        {"eps": eps, "m": m},
    )


def schrodinger(h: float = 0.1, n: int = 40) -> Report:
    """Smallest eigenpair (least real part among all pairs) for the piecewise and global bases."""
    rows, rel = [], {}
    for basis in ("piecewise", "global"):
        res = lseig(pb.schrodinger_problem(h, n, basis))
        p = min(res, key=lambda r: r.value.real)
        rel[basis] = p.relres
        rows.append((basis, p.value.real, p.value.imag, p.relres))
    return Report(
        "schrodinger",
        ["basis", "re", "im", "relres"],
        rows,
        {"ratio": rel["global"] / rel["piecewise"], "exact": pb.schrodinger_ground_state(h)},
        {"h": h, "n": n},
    )


def weighted_gram_deviation(results: list[EigResult], weight_sqrt) -> float:
    """``max |G - I|`` for eigenfunctions normalized in the weighted L2 norm."""
    cols = []
    for r in results:
        g = r.eigenfunction * weight_sqrt
        cols.append(g / norm_l2(g))
    if not cols:
        return math.nan
    G = Quasimatrix(cols).gram()
    return float(np.max(np.abs(G - np.eye(len(cols)))))


def sturm_liouville(n: int = 100, tol: float = 1e-10, method: str = "lseig_bc", **config) -> Report:
    P = pb.sturm_liouville_problem(n, tol, **config)
    res = sorted(_solver(method)(P), key=lambda r: r.value.real)
    rows = []
    for r in res:
        k = max(1, round(math.sqrt(max(r.value.real - 0.25, 0.0)) / math.pi))
        ex = float(pb.sturm_liouville_exact(k))
        rows.append((k, r.value.real, r.value.imag, ex, abs(r.value - ex) / ex, r.relres))
    e15 = from_callable(lambda x: np.exp(1.5 * x), P.domain)
    return Report(
        "sturm-liouville",
        ["k", "re", "im", "exact", "relerr", "relres"],
        rows,
        {
            "accepted": len(res),
            "max_relerr": max((r[4] for r in rows), default=math.nan),
            "gram_deviation": weighted_gram_deviation(res, e15),
            "distinct_k": len({r[0] for r in rows}),
        },
        {"n": n, "tol": tol, "method": method, **config},
    )


def lambda_bc(n: int = 100, tol: float = 1e-9, method: str = "lseig", d: float = -4 * math.pi**2, **config) -> Report:
    res = _solver(method)(pb.lambda_bc_problem(n, d, tol, **config))
    real = sorted(r.value.real for r in res if abs(r.value.imag) <= 1e-8 * max(abs(r.value), 1.0))
    rows = []
    for lam, ex in zip(real[:3], pb.LAMBDA_BC_EXACT):
        rows.append((lam, ex, abs(lam - ex) / ex))
    return Report(
        "lambda-bc",
        ["lambda", "exact", "relerr"],
        rows,
        {"accepted": len(res), "real": len(real)},
        {"n": n, "tol": tol, "method": method, **config},
    )


OS_METHODS = {"integral": "lseig_bc", "recombined": "lseig", "direct": "lseig_bc"}


def orr_sommerfeld(R: float = 5772.0, n: int = 100, method: str = "integral", tol: float = 1e-2, **config) -> Report:
    if method not in OS_METHODS:
        raise ValueError(f"unknown method {method!r}; use one of {sorted(OS_METHODS)}")
    P = pb.orr_sommerfeld_problems(R, n, tol, **config)[method]
    res = _solver(OS_METHODS[method])(P)
    top = res[0] if res else None
    return Report(
        "orr-sommerfeld",
        ["re", "im", "relres"],
        _eig_rows(res),
        {
            "accepted": len(res),
            "rightmost": top.value if top else complex("nan"),
            "top6_relres": [r.relres for r in res[:6]],
        },
        {"R": R, "n": n, "method": method, "tol": tol, **config},
    )


def advdiff_integral(n: int = 40, tol: float = 1e-8, method: str = "lseig_bc", domain=(-1.0, 1.0), **config) -> Report:
    res = _solver(method)(pb.integral_reform_advdiff(domain, n, tol, **config))
    res = sorted(res, key=lambda r: -r.value.real)
    rows = []
    for k, r in enumerate(res[:10], start=1):
        ex = float(pb.advdiff_exact(k, domain))
        rows.append((k, r.value.real, r.value.imag, ex, abs(r.value - ex) / abs(ex), r.relres))
    return Report(
        "advdiff-integral",
        ["k", "re", "im", "exact", "relerr", "relres"],
        rows,
        {"accepted": len(res), "max_relerr": max((r[4] for r in rows), default=math.nan)},
        {"n": n, "tol": tol, "method": method, "domain": list(domain), **config},
    )


EXAMPLES: dict[str, Callable[..., Report]] = {
    "cheb-legendre": cheb_legendre,
    "pilot-krylov": pilot_krylov,
    "airy": airy,
    "schrodinger": schrodinger,
    "sturm-liouville": sturm_liouville,
    "orr-sommerfeld": orr_sommerfeld,
    "lambda-bc": lambda_bc,
    "advdiff-integral": advdiff_integral,
}


def run_example(name: str, **kwargs) -> Report:
    if name not in EXAMPLES:
        raise KeyError(f"unknown example {name!r}; available: {', '.join(EXAMPLES)}")
    t0 = time.perf_counter()
    rep = EXAMPLES[name](**kwargs)
    rep.elapsed = time.perf_counter() - t0
    return rep
