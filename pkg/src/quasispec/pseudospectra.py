"""Pseudospectra of quasimatrix pencils: ``sigma_min(zB - A) / sqrt(1 + |z|^2)``."""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ShapeError
from .quasimatrix import Quasimatrix, qr_coords

__all__ = ["PencilFactor", "PseudoGrid", "grid_eval", "sigma_min_at", "write_grid_csv", "format_float"]


def format_float(x: float) -> str:
    """17 significant digits; identical input gives identical text."""
    return "%.17g" % x


class PencilFactor:
    """One QR of ``[A B] = Q [R_A R_B]`` reused for every ``z``.

    Since Q has orthonormal columns, ``sigma_min(zB - A) = sigma_min(z R_B - R_A)``.
    """

    def __init__(self, A: Quasimatrix, B: Quasimatrix):
        if A.n != B.n:
            raise ShapeError(f"A has {A.n} columns but B has {B.n}")
        if A.domain != B.domain:
            raise ShapeError("A and B live on different domains")
        n = A.n
        AB = A.hcat(B)
        frame = AB.frame(min_rank=2 * n)
        _, R = qr_coords(frame.coords(AB.columns), frame)
        self.RA, self.RB = R[:, :n], R[:, n:]

    def __call__(self, z: complex) -> float:
        s = np.linalg.svd(z * self.RB - self.RA, compute_uv=False)
        return float(s[-1] / np.sqrt(1.0 + abs(z) ** 2))


def sigma_min_at(A: Quasimatrix, B: Quasimatrix, z: complex) -> float:
    return PencilFactor(A, B)(complex(z))


@dataclass(frozen=True)
class PseudoGrid:
    """Values on a rectangular grid; ``values[i, j]`` is at ``re_points[j] + 1j * im_points[i]``."""

    re_points: np.ndarray
    im_points: np.ndarray
    values: np.ndarray

    def level_set(self, eps: float) -> np.ndarray:
        """Boolean mask of grid nodes inside the eps-pseudospectrum."""
        return self.values < eps

    def local_minima(self) -> list[complex]:
        """Interior grid nodes not exceeding any of their eight neighbours."""
        V = self.values
        out = []
        for i in range(1, V.shape[0] - 1):
            for j in range(1, V.shape[1] - 1):
                if V[i, j] <= V[i - 1 : i + 2, j - 1 : j + 2].min():
                    out.append(complex(self.re_points[j], self.im_points[i]))
        return out


def grid_eval(
    A: Quasimatrix,
    B: Quasimatrix,
    re_range: Sequence[float],
    im_range: Sequence[float],
    nx: int,
    ny: int,
) -> PseudoGrid:
    if nx < 2 or ny < 2:
        raise ValueError("the grid needs at least two points per direction")
    fac = PencilFactor(A, B)
    xs = np.linspace(float(re_range[0]), float(re_range[1]), nx)
    ys = np.linspace(float(im_range[0]), float(im_range[1]), ny)
    vals = np.array([[fac(complex(x, y)) for x in xs] for y in ys])
    return PseudoGrid(xs, ys, vals)


def write_grid_csv(grid: PseudoGrid, path=None) -> str:
    """CSV with the real grid points as the header (after an empty cell) and imaginary points in the first column."""
    buf = io.StringIO()
    buf.write("," + ",".join(format_float(x) for x in grid.re_points) + "\n")
    for y, row in zip(grid.im_points, grid.values):
        buf.write(format_float(y) + "," + ",".join(format_float(v) for v in row) + "\n")
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="ascii", newline="") as fh:
            fh.write(text)
    return text
