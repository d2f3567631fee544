"""Hot inner loops, with a numba path and a pure-numpy path.

The numba kernels are used when numba imports and the environment variable
``QUASISPEC_NUMBA`` is not set to ``0``/``false``/``off``.  Both
implementations are always importable (``NUMPY_KERNELS``/``NUMBA_KERNELS``)
so tests and the benchmark can compare them directly.
"""

from __future__ import annotations

import os

import numpy as np
from numpy.polynomial import chebyshev as _cheb

__all__ = [
    "BACKEND",
    "NUMPY_KERNELS",
    "NUMBA_KERNELS",
    "clenshaw",
    "chebder",
    "chebint",
    "mgs2",
]


# --------------------------------------------------------------------------
# numpy implementations
# --------------------------------------------------------------------------

def _clenshaw_np(c: np.ndarray, x: np.ndarray) -> np.ndarray:
    return _cheb.chebval(x, c)


def _chebder_np(c: np.ndarray) -> np.ndarray:
    if c.shape[0] == 1:
        return np.zeros(1, dtype=c.dtype)
    return _cheb.chebder(c)


def _chebint_np(c: np.ndarray) -> np.ndarray:
    # antiderivative vanishing at t = -1
    return _cheb.chebint(c, lbnd=-1.0)


def _mgs2_np(V: np.ndarray, rtol: float):
    m, n = V.shape
    Q = np.zeros((m, n), dtype=np.complex128)
    R = np.zeros((n, n), dtype=np.complex128)
    deficient = np.zeros(n, dtype=np.bool_)
    for j in range(n):
        v = V[:, j].copy()
        nrm0 = np.linalg.norm(v)
        active = np.nonzero(~deficient[:j])[0]
        for _ in range(2):
            for i in active:
                r = np.vdot(Q[:, i], v)
                R[i, j] += r
                v -= r * Q[:, i]
        nrm = np.linalg.norm(v)
        if nrm0 == 0.0 or nrm <= rtol * nrm0:
            deficient[j] = True
        else:
            R[j, j] = nrm
            Q[:, j] = v / nrm
    return Q, R, deficient


# --------------------------------------------------------------------------
# numba implementations
# --------------------------------------------------------------------------

def _build_numba_kernels():
    from numba import njit

    @njit(cache=True)
    def clenshaw_nb(c, x):
        n = c.shape[0]
        out = np.empty(x.shape[0], dtype=np.complex128)
        for j in range(x.shape[0]):
            t = x[j]
            b1 = 0.0 + 0.0j
            b2 = 0.0 + 0.0j
            for k in range(n - 1, 0, -1):
                b0 = c[k] + 2.0 * t * b1 - b2
                b2 = b1
                b1 = b0
            out[j] = c[0] + t * b1 - b2
        return out

    @njit(cache=True)
    def chebder_nb(c):
        n = c.shape[0]
        if n == 1:
            return np.zeros(1, dtype=np.complex128)
        d = np.zeros(n - 1, dtype=np.complex128)
        # d_{k-1} = d_{k+1} + 2 k c_k, then halve d_0
        nxt = 0.0 + 0.0j
        cur = 0.0 + 0.0j
        for k in range(n - 1, 0, -1):
            val = nxt + 2.0 * k * c[k]
            d[k - 1] = val
            nxt = cur
            cur = val
        d[0] *= 0.5
        return d

    @njit(cache=True)
    def chebint_nb(c):
        n = c.shape[0]
        out = np.zeros(n + 1, dtype=np.complex128)
        ext = np.zeros(n + 2, dtype=np.complex128)
        ext[:n] = c
        out[1] = ext[0] - 0.5 * ext[2]
        for k in range(2, n + 1):
            out[k] = (ext[k - 1] - ext[k + 1]) / (2.0 * k)
        # fix constant so that the value at -1 vanishes
        s = 0.0 + 0.0j
        sign = -1.0
        for k in range(1, n + 1):
            s += sign * out[k]
            sign = -sign
        out[0] = -s
        return out

    @njit(cache=True)
    def mgs2_nb(V, rtol):
        m, n = V.shape
        Q = np.zeros((m, n), dtype=np.complex128)
        R = np.zeros((n, n), dtype=np.complex128)
        deficient = np.zeros(n, dtype=np.bool_)
        v = np.empty(m, dtype=np.complex128)
        for j in range(n):
            nrm0 = 0.0
            for r in range(m):
                v[r] = V[r, j]
                nrm0 += v[r].real ** 2 + v[r].imag ** 2
            nrm0 = np.sqrt(nrm0)
            for _ in range(2):
                for i in range(j):
                    if deficient[i]:
                        continue
                    acc = 0.0 + 0.0j
                    for r in range(m):
                        acc += np.conj(Q[r, i]) * v[r]
                    R[i, j] += acc
                    for r in range(m):
                        v[r] -= acc * Q[r, i]
            nrm = 0.0
            for r in range(m):
                nrm += v[r].real ** 2 + v[r].imag ** 2
            nrm = np.sqrt(nrm)
            if nrm0 == 0.0 or nrm <= rtol * nrm0:
                deficient[j] = True
            else:
                R[j, j] = nrm
                for r in range(m):
                    Q[r, j] = v[r] / nrm
        return Q, R, deficient

    return {
        "clenshaw": clenshaw_nb,
        "chebder": chebder_nb,
        "chebint": chebint_nb,
        "mgs2": mgs2_nb,
    }


NUMPY_KERNELS = {
    "clenshaw": _clenshaw_np,
    "chebder": _chebder_np,
    "chebint": _chebint_np,
    "mgs2": _mgs2_np,
}


def _numba_requested() -> bool:
    flag = os.environ.get("QUASISPEC_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "off", "no")


try:
    NUMBA_KERNELS = _build_numba_kernels()
except ImportError:  # pragma: no cover - numba is a declared dependency
    NUMBA_KERNELS = None

if NUMBA_KERNELS is not None and _numba_requested():
    BACKEND = "numba"
    _ACTIVE = NUMBA_KERNELS
else:
    BACKEND = "numpy"
    _ACTIVE = NUMPY_KERNELS


def clenshaw(c, x) -> np.ndarray:
    """Evaluate the Chebyshev series ``c`` at points ``x`` in [-1, 1]."""
    c = np.ascontiguousarray(c, dtype=np.complex128)
    x = np.ascontiguousarray(x, dtype=np.float64)
    return _ACTIVE["clenshaw"](c, x)


def chebder(c) -> np.ndarray:
    """Coefficients of d/dt of a Chebyshev series (no interval scaling)."""
    return _ACTIVE["chebder"](np.ascontiguousarray(c, dtype=np.complex128))


def chebint(c) -> np.ndarray:
    """Coefficients of the antiderivative vanishing at t = -1."""
    return _ACTIVE["chebint"](np.ascontiguousarray(c, dtype=np.complex128))


def mgs2(V, rtol: float = 1e-14):
    """Modified Gram-Schmidt with one reorthogonalization pass.

    Returns ``(Q, R, deficient)``; columns flagged deficient have a zero
    column in ``Q`` and ``R[j, j] == 0``.
    """
    V = np.ascontiguousarray(V, dtype=np.complex128)
    return _ACTIVE["mgs2"](V, float(rtol))
