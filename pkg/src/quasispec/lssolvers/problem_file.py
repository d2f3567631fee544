"""JSON problem descriptions.

A file looks like::

    {
      "domain": [0, 1],
      "operatorA": [{"action": "d2", "coeff": -1}],
      "operatorB": [{"action": "id"}],
      "bcs": [{"point": 0, "terms": [{"order": 0, "weight": 1}]},
              {"point": 1, "terms": [{"order": 0, "weight": 1}], "lambda_terms": []}],
      "basis": {"type": "chebyshev", "n": 40},
      "config": {"tol": 1e-8}
    }

``operator`` (alias of ``operatorA``) and ``rhs`` describe an ODE ``L u = f``
for ``solve-ode``.  Coefficients are a number, ``[re, im]``, a polynomial
``{"type": "poly", "coeffs": [c0, c1, ...]}`` in ascending powers of x, or a
named function ``{"type": "named", "name": "exp3x"}``; either form accepts
an optional ``"scale"``.
"""

from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

import numpy as np

from ..errors import ProblemFileError
from ..funcore import ChebFun, chebpoly, from_callable, from_coeffs, identity
from ..quasimatrix import Quasimatrix
from .krylov import chebyshev_basis, piecewise_chebyshev_basis
from .operators import (
    BasisGroup,
    BCTerm,
    BoundaryFunctional,
    EigProblem,
    OperatorExpr,
    SolverConfig,
    Term,
    continuity_rows,
)

__all__ = ["ProblemFileError", "ProblemSpec", "load_problem", "parse_problem"]


NAMED = {
    "one": lambda x: np.ones_like(x),
    "x": lambda x: x,
    "abs_x": np.abs,
    "exp_x": np.exp,
    "exp3x": lambda x: np.exp(3 * x),
    "one_minus_x2": lambda x: 1 - x * x,
    "sin_pi_x": lambda x: np.sin(np.pi * x),
}

_ACTION = re.compile(r"^(id|d(\d+)|cumsum(\d+))$")
_CONFIG_KEYS = {"tol", "alpha", "beta", "balance", "bc_mode", "scale_columns"}


@dataclass
class ProblemSpec:
    """A parsed problem file."""

    domain: tuple[float, float]
    operatorA: OperatorExpr | None
    operatorB: OperatorExpr
    bcs: list[BoundaryFunctional]
    basis: Quasimatrix
    config: SolverConfig
    rhs: ChebFun | None = None
    source: str = ""

    def eig_problem(self, **config_overrides) -> EigProblem:
        if self.operatorA is None:
            raise ProblemFileError("an eigenproblem needs 'operatorA'")
        cfg = self.config
        if config_overrides:
            cfg = replace(cfg, **config_overrides)
        return EigProblem([BasisGroup(self.basis, self.operatorA, self.operatorB)], self.bcs, cfg, name=self.source)


class _Parser:
    def __init__(self, text: str, base: Path | None):
        self.text = text
        self.base = base

    def line_of(self, key: str) -> int | None:
        """First line mentioning ``"key"``, for diagnostics."""
        m = re.search(r'"%s"\s*:' % re.escape(key), self.text)
        return self.text.count("\n", 0, m.start()) + 1 if m else None

    def fail(self, key: str, message: str):
        raise ProblemFileError(f"{key}: {message}", self.line_of(key))

    # -- scalar helpers ---------------------------------------------------
    def scalar(self, v, key: str) -> complex:
        if isinstance(v, bool):
            self.fail(key, "expected a number, got a boolean")
        if isinstance(v, (int, float)):
            return complex(v)
        if isinstance(v, list) and len(v) == 2 and all(isinstance(t, (int, float)) for t in v):
            return complex(v[0], v[1])
        self.fail(key, f"expected a number or [re, im], got {v!r}")

    def real(self, v, key: str) -> float:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            self.fail(key, f"expected a finite real number, got {v!r}")
        return float(v)

    # -- pieces -----------------------------------------------------------
    def domain(self, v) -> tuple[float, float]:
        if not (isinstance(v, list) and len(v) == 2):
            self.fail("domain", "expected [a, b]")
        a, b = self.real(v[0], "domain"), self.real(v[1], "domain")
        if not a < b:
            self.fail("domain", f"need a < b, got [{a}, {b}]")
        return a, b

    def function(self, v, key: str, dom) -> ChebFun | complex:
        if not isinstance(v, dict):
            return self.scalar(v, key)
        kind = v.get("type")
        scale = self.scalar(v.get("scale", 1.0), key)
        if kind == "poly":
            cs = v.get("coeffs")
            if not isinstance(cs, list) or not cs:
                self.fail(key, "poly needs a non-empty 'coeffs' list")
            x = identity(dom)
            f = from_coeffs([0.0], dom)
            for c in reversed([self.scalar(c, key) for c in cs]):  # Horner in x
                f = f * x + from_coeffs([c], dom)
            return f.scale(scale)
        if kind == "named":
            name = v.get("name")
            if name not in NAMED:
                self.fail(key, f"unknown named function {name!r}; known: {', '.join(sorted(NAMED))}")
            if name == "abs_x" and dom[0] < 0 < dom[1]:
                from .problems import abs_x

                f = abs_x(dom)
            else:
                f = from_callable(NAMED[name], dom)
            return f.scale(scale)
        self.fail(key, f"unknown coefficient type {kind!r}; use 'poly' or 'named'")

    def operator(self, v, key: str, dom) -> OperatorExpr:
        if not isinstance(v, list) or not v:
            self.fail(key, "expected a non-empty list of terms")
        terms = []
        for t in v:
            if not isinstance(t, dict) or "action" not in t:
                self.fail(key, "each term needs an 'action'")
            m = _ACTION.match(str(t["action"]))
            if not m:
                self.fail(key, f"unknown action {t['action']!r}; use id, dK or cumsumK")
            coeff = self.function(t.get("coeff", 1.0), key, dom)
            if m.group(2) is not None:
                terms.append(Term("d", int(m.group(2)), coeff))
            elif m.group(3) is not None:
                terms.append(Term("cumsum", int(m.group(3)), coeff))
            else:
                terms.append(Term("id", 0, coeff))
        return OperatorExpr(terms)

    def bc_terms(self, v, key: str) -> list[BCTerm]:
        if not isinstance(v, list):
            self.fail(key, "expected a list of {order, weight}")
        out = []
        for t in v:
            if not isinstance(t, dict):
                self.fail(key, "each term must be an object")
            order = t.get("order", 0)
            if isinstance(order, bool) or not isinstance(order, int) or order < 0:
                self.fail(key, f"order must be a nonnegative integer, got {order!r}")
            point = self.real(t["point"], key) if "point" in t else None
            side = t.get("side", "right")
            if side not in ("left", "right"):
                self.fail(key, "side must be 'left' or 'right'")
            out.append((point, order, self.scalar(t.get("weight", 1.0), key), side))
        return out

    def bcs(self, v, dom) -> list[BoundaryFunctional]:
        if not isinstance(v, list):
            self.fail("bcs", "expected a list")
        out = []
        for bc in v:
            if not isinstance(bc, dict) or "point" not in bc:
                self.fail("bcs", "each condition needs a 'point'")
            x = self.real(bc["point"], "point")
            if not dom[0] <= x <= dom[1]:
                self.fail("point", f"{x} lies outside the domain [{dom[0]}, {dom[1]}]")

            def mk(items):
                return [BCTerm(x if p is None else p, o, w, s) for p, o, w, s in items]

            terms = mk(self.bc_terms(bc.get("terms", []), "terms"))
            lam = mk(self.bc_terms(bc.get("lambda_terms", []), "lambda_terms"))
            if not terms and not lam:
                self.fail("terms", "a boundary condition needs at least one term")
            out.append(BoundaryFunctional(terms, lam, self.scalar(bc.get("value", 0.0), "value")))
        return out

    def basis(self, v, dom, op_order: int, n_override: int | None = None):
        if not isinstance(v, dict):
            self.fail("basis", "expected an object")
        kind = v.get("type", "chebyshev")
        n = v.get("n") if n_override is None else n_override
        params = v.get("params", {}) or {}
        if kind != "file" and (not isinstance(n, int) or isinstance(n, bool) or n < 1):
            self.fail("basis", f"'n' must be a positive integer, got {n!r}")
        if kind == "chebyshev":
            return chebyshev_basis(n, dom), []
        if kind == "recombined":
            factor = self.function(params.get("factor", {"type": "named", "name": "one_minus_x2"}), "params", dom)
            power = params.get("power", 2)
            if not isinstance(factor, ChebFun):
                self.fail("params", "recombination factor must be a function")
            g = from_coeffs([1.0], dom)
            for _ in range(int(power)):
                g = g * factor
            return Quasimatrix([g * chebpoly(k, dom) for k in range(n)]), []
        if kind == "piecewise":
            bps = params.get("breakpoints")
            if not isinstance(bps, list) or not bps:
                self.fail("params", "piecewise basis needs 'breakpoints'")
            bps = [self.real(b, "breakpoints") for b in bps]
            npieces = len(bps) + 1
            if n % npieces:
                self.fail("basis", f"n = {n} is not divisible by the {npieces} pieces")
            orders = params.get("continuity", list(range(max(op_order, 1))))
            rows = [r for b in bps for r in continuity_rows(b, orders)]
            return piecewise_chebyshev_basis(dom, bps, n // npieces), rows
        if kind == "file":
            path = params.get("path")
            if not isinstance(path, str):
                self.fail("params", "file basis needs a 'path'")
            p = Path(path)
            if not p.is_absolute() and self.base is not None:
                p = self.base / p
            try:
                with open(p, newline="") as fh:
                    rows = [[float(t) for t in r if t.strip()] for r in csv.reader(fh) if r]
            except (OSError, ValueError) as exc:
                self.fail("path", f"cannot read basis file: {exc}")
            cols = [from_coeffs(r, dom) for r in rows]
            if isinstance(n, int) and not isinstance(n, bool):
                cols = cols[:n]
            if not cols:
                self.fail("path", "basis file has no rows")
            return Quasimatrix(cols), []
        self.fail("basis", f"unknown basis type {kind!r}; use chebyshev, recombined, piecewise or file")

    def config(self, v) -> SolverConfig:
        if not isinstance(v, dict):
            self.fail("config", "expected an object")
        unknown = set(v) - _CONFIG_KEYS
        if unknown:
            self.fail("config", f"unknown keys {sorted(unknown)}")
        try:
            return SolverConfig(**v)
        except (TypeError, ValueError) as exc:
            self.fail("config", str(exc))


def parse_problem(
    text: str, source: str = "<string>", base: Path | None = None, n: int | None = None
) -> ProblemSpec:
    """Parse a problem description; ``n`` overrides the basis size."""
    try:
        data: Any = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"{source}: invalid JSON: {exc.msg} (column {exc.colno})", exc.lineno) from None
    if not isinstance(data, dict):
        raise ProblemFileError(f"{source}: top level must be an object", 1)
    P = _Parser(text, base)
    if "domain" not in data:
        raise ProblemFileError(f"{source}: missing 'domain'", 1)
    dom = P.domain(data["domain"])
    keyA = "operatorA" if "operatorA" in data else ("operator" if "operator" in data else None)
    opA = P.operator(data[keyA], keyA, dom) if keyA else None
    opB = P.operator(data["operatorB"], "operatorB", dom) if "operatorB" in data else OperatorExpr.identity()
    bcs = P.bcs(data.get("bcs", []), dom)
    order = opA.max_derivative if opA is not None else 0
    basis, extra_rows = P.basis(data.get("basis", {"type": "chebyshev", "n": 32}), dom, order, n)
    cfg = P.config(data.get("config", {}))
    rhs = P.function(data["rhs"], "rhs", dom) if "rhs" in data else None
    if rhs is not None and not isinstance(rhs, ChebFun):
        rhs = from_coeffs([rhs], dom)
    return ProblemSpec(dom, opA, opB, bcs + extra_rows, basis, cfg, rhs, source)


def load_problem(path, n: int | None = None) -> ProblemSpec:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ProblemFileError(f"cannot read {p}: {exc}") from None
    return parse_problem(text, str(p), p.parent, n)
