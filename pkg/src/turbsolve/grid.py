"""Structured 2D cell-centered grids, fields, quadrature, and norms.

Unknowns live at cell centers ((i+1/2)hx, (j+1/2)hy) of a rectangle
[0,lx] x [0,ly].  Every differential operator bakes in homogeneous
Dirichlet walls via mirror ghost cells: the ghost value across a boundary
face is the negative of the adjacent interior value, so the reconstructed
face value is exactly zero and the one-sided face gradient is 2v/h.

Face quadrature carries measure hx*hy per interior face and (hx*hy)/2 per
boundary face (the half cell between a center and the wall).  With these
weights the discrete energy  sum_f c_f |dv|_f^2 w_f  coincides
algebraically with <A(c)v, v> * hx*hy for the operator assembled in
:mod:`turbsolve.linsolve`; the verification module leans on that identity.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels


@dataclass(frozen=True)
class Grid:
    """Uniform rectangular grid of nx*ny cells covering [0,lx] x [0,ly]."""

    nx: int
    ny: int
    lx: float
    ly: float

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValueError(f"need at least 2 cells per axis, got {self.nx}x{self.ny}")
        if self.lx <= 0 or self.ly <= 0:
            raise ValueError(f"domain edges must be positive, got {self.lx}x{self.ly}")

    @property
    def hx(self) -> float:
        return self.lx / self.nx

    @property
    def hy(self) -> float:
        return self.ly / self.ny

    @property
    def cell_area(self) -> float:
        return self.hx * self.hy

    @property
    def area(self) -> float:
        """Total measure |Omega|."""
        return self.lx * self.ly

    @property
    def shape(self) -> tuple:
        return (self.nx, self.ny)

    def cell_centers(self):
        """Meshgrid (X, Y) of cell centers, ij indexing, shape (nx, ny)."""
        xs = (np.arange(self.nx) + 0.5) * self.hx
        ys = (np.arange(self.ny) + 0.5) * self.hy
        return np.meshgrid(xs, ys, indexing="ij")


def make_grid(nx: int, ny: int, lx: float, ly: float) -> Grid:
    return Grid(nx, ny, float(lx), float(ly))


def _as_values(grid, values):
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.shape != grid.shape:
        if arr.size == grid.nx * grid.ny:
            arr = arr.reshape(grid.shape)
        else:
            raise ValueError(f"values shape {arr.shape} does not match grid {grid.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("field values must be finite")
    return arr


@dataclass(eq=False)
class ScalarField:
    """One real value per cell, indexed values[i, j] at x_i, y_j."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = _as_values(self.grid, self.values)

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def full(cls, grid: Grid, value: float) -> "ScalarField":
        return cls(grid, np.full(grid.shape, float(value)))

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "ScalarField":
        """Sample fn(X, Y) at cell centers."""
        X, Y = grid.cell_centers()
        return cls(grid, np.asarray(fn(X, Y), dtype=np.float64))

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())


@dataclass(eq=False)
class FaceVectorField:
    """Per-face values of a discrete gradient: fx on x-faces, fy on y-faces."""

    grid: Grid
    fx: np.ndarray  # (nx+1, ny)
    fy: np.ndarray  # (nx, ny+1)

    def __post_init__(self):
        nx, ny = self.grid.shape
        self.fx = np.ascontiguousarray(self.fx, dtype=np.float64)
        self.fy = np.ascontiguousarray(self.fy, dtype=np.float64)
        if self.fx.shape != (nx + 1, ny) or self.fy.shape != (nx, ny + 1):
            raise ValueError("face array shapes do not match grid")
        if not (np.all(np.isfinite(self.fx)) and np.all(np.isfinite(self.fy))):
            raise ValueError("face values must be finite")


def gradient(v: ScalarField) -> FaceVectorField:
    """Two-point face differences with Dirichlet mirror ghosts.

    Interior x-face i holds (v[i] - v[i-1])/hx; the wall faces hold
    +-2 v_adjacent / h, the one-sided difference against the zero wall
    value at distance h/2.
    """
    g = v.grid
    gx, gy = _kernels.face_gradients(v.values, g.hx, g.hy)
    return FaceVectorField(g, gx, gy)


def integrate(v: ScalarField) -> float:
    """Midpoint rule: sum of cell values times cell area."""
    return float(v.values.sum() * v.grid.cell_area)


def lp_norm(v: ScalarField, p: float) -> float:
    """(integral |v|^p)^(1/p) by the midpoint rule; p = inf routes to linf."""
    if np.isinf(p):
        return linf_norm(v)
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    total = float(np.sum(np.abs(v.values) ** p) * v.grid.cell_area)
    return total ** (1.0 / p)


def linf_norm(v: ScalarField) -> float:
    return float(np.max(np.abs(v.values))) if v.values.size else 0.0


def face_average(c: np.ndarray):
    """Arithmetic face means of a cell array; wall faces copy the inner cell."""
    nx, ny = c.shape
    cfx = np.empty((nx + 1, ny))
    cfy = np.empty((nx, ny + 1))
    cfx[1:nx, :] = 0.5 * (c[1:, :] + c[:-1, :])
    cfx[0, :] = c[0, :]
    cfx[nx, :] = c[nx - 1, :]
    cfy[:, 1:ny] = 0.5 * (c[:, 1:] + c[:, :-1])
    cfy[:, 0] = c[:, 0]
    cfy[:, ny] = c[:, ny - 1]
    return cfx, cfy


def face_weights(grid: Grid):
    """Per-face quadrature factors: 1 on interior faces, 1/2 on wall faces."""
    kx = np.ones(grid.nx + 1)
    ky = np.ones(grid.ny + 1)
    kx[0] = kx[-1] = 0.5
    ky[0] = ky[-1] = 0.5
    return kx, ky


def dirichlet_face_mean(v: np.ndarray):
    """Face means of a cell array including the mirror ghosts (0 on walls)."""
    nx, ny = v.shape
    mx = np.zeros((nx + 1, ny))
    my = np.zeros((nx, ny + 1))
    mx[1:nx, :] = 0.5 * (v[1:, :] + v[:-1, :])
    my[:, 1:ny] = 0.5 * (v[:, 1:] + v[:, :-1])
    return mx, my


def weighted_energy(c: ScalarField, v: ScalarField) -> float:
    """Face-quadrature energy  sum_f c_f |dv|_f^2 w_f  ~ integral c|grad v|^2.

    c is averaged to faces arithmetically (wall faces use the single inner
    cell); w_f is hx*hy on interior faces and half that on wall faces, so
    the result equals <A(c)v, v> * hx*hy for the assembled operator.
    """
    if c.grid != v.grid:
        raise ValueError("coefficient and field live on different grids")
    if np.any(c.values <= 0):
        raise ValueError("weighted_energy requires a positive coefficient field")
    g = v.grid
    gx, gy = _kernels.face_gradients(v.values, g.hx, g.hy)
    cfx, cfy = face_average(c.values)
    kx, ky = face_weights(g)
    m = g.cell_area
    ex = float(np.sum((kx[:, None] * cfx) * gx * gx))
    ey = float(np.sum((ky[None, :] * cfy) * gy * gy))
    return (ex + ey) * m
