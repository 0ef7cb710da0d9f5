"""Variable-coefficient diffusion operators and a preconditioned CG solve.

The operator is the pointwise five-point discretization of -div(c grad .)
with homogeneous Dirichlet walls (mirror ghosts) and arithmetic face
averaging of the cell coefficient.  For positive coefficients it is a
symmetric M-matrix: row-diagonally dominant with nonpositive
off-diagonals, hence positive definite and monotone (nonnegative right
hand sides produce nonnegative solutions, the discrete carrier of the
k >= 0 estimate).

The solve is Jacobi-preconditioned conjugate gradients.  Convergence is
certified against the *recomputed* residual, never the recursion residual
alone, and non-convergence raises instead of returning a partial answer.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .grid import Grid, ScalarField, face_average

INNER_TOL = 1e-12


@dataclass
class LinearSolveReport:
    iterations: int
    relative_residual: float
    converged: bool


class LinearSolveError(RuntimeError):
    """Iteration budget exhausted (or breakdown); carries the last report."""

    def __init__(self, message: str, report: LinearSolveReport):
        super().__init__(message)
        self.report = report


@dataclass(eq=False)
class DiffusionOperator:
    """Assembled -div(c grad .) with per-face coefficients; immutable."""

    grid: Grid
    cfx: np.ndarray  # (nx+1, ny)
    cfy: np.ndarray  # (nx, ny+1)

    def apply(self, v: np.ndarray) -> np.ndarray:
        return _kernels.diffusion_matvec(v, self.cfx, self.cfy, self.grid.hx, self.grid.hy)

    def diagonal(self) -> np.ndarray:
        g = self.grid
        sx = np.ones(g.nx + 1)
        sy = np.ones(g.ny + 1)
        sx[0] = sx[-1] = 2.0  # wall faces couple twice as stiffly (ghost mirror)
        sy[0] = sy[-1] = 2.0
        wx = sx[:, None] * self.cfx
        wy = sy[None, :] * self.cfy
        return (wx[:-1, :] + wx[1:, :]) / g.hx**2 + (wy[:, :-1] + wy[:, 1:]) / g.hy**2


def assemble(c: ScalarField) -> DiffusionOperator:
    """Build the operator for a cellwise coefficient c > 0."""
    if np.any(c.values <= 0):
        raise ValueError("diffusion coefficient must be positive cellwise")
    cfx, cfy = face_average(c.values)
    return DiffusionOperator(c.grid, cfx, cfy)


def solve_spd(
    A: DiffusionOperator,
    b: ScalarField,
    tol: float = INNER_TOL,
    max_iter: int | None = None,
) -> tuple[ScalarField, LinearSolveReport]:
    """Solve A x = b to ||Ax-b||/||b|| <= tol (absolute residual when b=0).

    Deterministic: zero initial guess, fixed iteration order.  Raises
    LinearSolveError when the iteration budget runs out.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    if b.grid != A.grid:
        raise ValueError("right-hand side lives on a different grid")
    g = A.grid
    if max_iter is None:
        max_iter = 10 * g.nx * g.ny

    rhs = b.values
    bnorm = float(np.linalg.norm(rhs))
    if bnorm == 0.0:
        return ScalarField.zeros(g), LinearSolveReport(0, 0.0, True)

    diag = A.diagonal()
    x = np.zeros(g.shape)
    r = rhs.copy()
    z = r / diag
    p = z.copy()
    rz = float(np.vdot(r, z))
    iterations = 0
    res = float(np.linalg.norm(r)) / bnorm

    while iterations < max_iter:
        iterations += 1
        Ap = A.apply(p)
        pAp = float(np.vdot(p, Ap))
        if pAp <= 0.0:
            raise LinearSolveError(
                "conjugate gradients broke down (operator not positive definite?)",
                LinearSolveReport(iterations, res, False),
            )
        alpha = rz / pAp
        x += alpha * p
        r -= alpha * Ap
        res = float(np.linalg.norm(r)) / bnorm
        if res <= tol:
            # certify against the true residual; refresh and continue if
            # the recursion drifted
            r_true = rhs - A.apply(x)
            res_true = float(np.linalg.norm(r_true)) / bnorm
            if res_true <= tol:
                return ScalarField(g, x), LinearSolveReport(iterations, res_true, True)
            r = r_true
            res = res_true
            z = r / diag
            p = z.copy()
            rz = float(np.vdot(r, z))
            continue
        z = r / diag
        rz_new = float(np.vdot(r, z))
        beta = rz_new / rz
        p = z + beta * p
        rz = rz_new

    raise LinearSolveError(
        f"conjugate gradients did not reach {tol:g} in {max_iter} iterations "
        f"(relative residual {res:g})",
        LinearSolveReport(iterations, res, False),
    )
