"""Finite-difference Dirichlet problems on the unit square.

Two routes to the same discrete solution:

* ``assemble_direct``/``solve_direct``: central differences for
  ``A f_xx + 2B f_xy + C f_yy = 0`` with the 4-point cross stencil for
  ``f_xy``, assembled as a sparse matrix;
* ``minimize_energy``: conjugate gradients on the discrete energy
  ``1/2 sum_cells h^2 <E grad f, grad f>``, evaluated matrix-free.

The energy quadrature averages the four corner gradients of each cell
(one-sided differences along the cell edges).  Its exact gradient is
``-h^2`` times the direct scheme applied to the Euler-Lagrange system, so
the two routes must agree to solver precision.

Lattice arrays have shape ``(n + 2, n + 2)`` and are indexed ``[i, j]`` with
``x = i h`` and ``y = j h``.
"""
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .energy import EnergyMatrix, euler_lagrange_system
from .errors import MaxIterations, NotElliptic, SolverDiverged
from .system_model import DEFAULT_TOL, is_elliptic

__all__ = [
    "BoundaryData",
    "ConsistencyReport",
    "DirectSystem",
    "DiscreteField",
    "Grid",
    "MinimizeResult",
    "assemble_direct",
    "discrete_energy",
    "el_consistency_check",
    "energy_gradient",
    "format_dump",
    "minimize_energy",
    "solve_direct",
    "write_dump",
]


@dataclass(frozen=True)
class Grid:
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise ValueError(f"grid needs n >= 3 interior points per side, got {self.n}")

    @property
    def h(self):
        return 1.0 / (self.n + 1)

    def coords(self):
        t = np.arange(self.n + 2) * self.h
        return np.meshgrid(t, t, indexing="ij")

    def boundary_mask(self):
        m = np.ones((self.n + 2, self.n + 2), dtype=bool)
        m[1:-1, 1:-1] = False
        return m


@dataclass(frozen=True, eq=False)
class DiscreteField:
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        for name in "uv":
            a = np.array(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if self.u.shape != self.v.shape or self.u.ndim != 2 or self.u.shape[0] != self.u.shape[1]:
            raise ValueError("u and v must be square arrays of equal shape")

    @property
    def n(self):
        return self.u.shape[0] - 2

    def stacked(self):
        return np.stack([self.u, self.v])

    def max_diff(self, other):
        return float(max(np.abs(self.u - other.u).max(), np.abs(self.v - other.v).max()))


class BoundaryData:
    """Dirichlet data given by a vectorised ``(x, y) -> (u, v)`` evaluator."""

    def __init__(self, evaluator):
        self.evaluator = evaluator

    @classmethod
    def constant(cls, cu, cv):
        return cls(lambda x, y: (np.full_like(x, cu, dtype=float), np.full_like(x, cv, dtype=float)))

    def __call__(self, x, y):
        u, v = self.evaluator(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        u = np.broadcast_to(np.asarray(u, dtype=float), np.shape(x))
        v = np.broadcast_to(np.asarray(v, dtype=float), np.shape(x))
        return u, v

    def check(self, samples=64, jump_tol=1e-6):
        """Sample the boundary and its edge midpoints; values must be finite and
        successive samples must approach each other under refinement."""
        def loop(m):
            t = np.linspace(0.0, 1.0, m + 1)[:-1]
            one, zero = np.ones_like(t), np.zeros_like(t)
            x = np.concatenate([t, one, 1 - t, zero])
            y = np.concatenate([zero, t, one, 1 - t])
            return np.stack(self(x, y))

        coarse, fine = loop(samples), loop(2 * samples)
        if not (np.all(np.isfinite(coarse)) and np.all(np.isfinite(fine))):
            raise ValueError("boundary data is not finite on the boundary")
        jump = lambda a: np.abs(np.diff(np.concatenate([a, a[:, :1]], axis=1), axis=1)).max()
        # For continuous data the largest jump shrinks with the step.
        if jump(fine) > max(jump_tol, 0.75 * jump(coarse)):
            raise ValueError("boundary data appears discontinuous")
        return True

    def lattice(self, grid):
        """Field with the boundary values set and zero interior."""
        x, y = grid.coords()
        u, v = self(x, y)
        mask = grid.boundary_mask()
        return DiscreteField(np.where(mask, u, 0.0), np.where(mask, v, 0.0))


def _with_interior(base, interior):
    n = base.n
    F = base.stacked().copy()
    F[:, 1:-1, 1:-1] = np.asarray(interior).reshape(2, n, n)
    return DiscreteField(F[0], F[1])


# ---------------------------------------------------------------- direct route


@dataclass
class DirectSystem:
    grid: Grid
    matrix: sp.csr_matrix
    rhs: np.ndarray
    boundary: DiscreteField


def _stencil(spec, h):
    # (di, dj) offsets and the 2x2 coefficient of f at that neighbour.
    A, B, C = spec.matrices()
    h2 = h * h
    out = {
        (0, 0): -2.0 * (A + C) / h2,
        (1, 0): A / h2,
        (-1, 0): A / h2,
        (0, 1): C / h2,
        (0, -1): C / h2,
    }
    cross = 2.0 * B / (4.0 * h2)
    for di, dj, s in ((1, 1, 1.0), (-1, -1, 1.0), (1, -1, -1.0), (-1, 1, -1.0)):
        out[(di, dj)] = s * cross
    return out


def assemble_direct(spec, grid, bc, tol=DEFAULT_TOL):
    """Sparse system for the interior unknowns, ordered ``(u, v)`` then
    row-major over ``(i, j)``; boundary terms moved to the right-hand side."""
    if not is_elliptic(spec, tol):
        raise NotElliptic("direct assembly needs an elliptic system")
    n, h = grid.n, grid.h
    boundary = bc if isinstance(bc, DiscreteField) else bc.lattice(grid)
    Fb = boundary.stacked()
    N = n * n
    ii, jj = np.meshgrid(np.arange(1, n + 1), np.arange(1, n + 1), indexing="ij")
    ii, jj = ii.ravel(), jj.ravel()
    row_node = (ii - 1) * n + (jj - 1)
    rows, cols, vals = [], [], []
    rhs = np.zeros(2 * N)
    for (di, dj), coef in _stencil(spec, h).items():
        ni, nj = ii + di, jj + dj
        inside = (ni >= 1) & (ni <= n) & (nj >= 1) & (nj <= n)
        col_node = (ni - 1) * n + (nj - 1)
        for a in range(2):
            for b in range(2):
                if coef[a, b] == 0.0:
                    continue
                rows.append(a * N + row_node[inside])
                cols.append(b * N + col_node[inside])
                vals.append(np.full(inside.sum(), coef[a, b]))
                out = ~inside
                np.subtract.at(rhs, a * N + row_node[out], coef[a, b] * Fb[b, ni[out], nj[out]])
    matrix = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(2 * N, 2 * N)
    )
    return DirectSystem(grid, matrix, rhs, boundary)


def solve_direct(system, rtol=1e-11):
    """Sparse LU solve with a residual check."""
    with warnings.catch_warnings():
        warnings.simplefilter("error", spla.MatrixRankWarning)
        try:
            x = spla.spsolve(system.matrix.tocsc(), system.rhs)
        except (spla.MatrixRankWarning, RuntimeError) as exc:
            raise SolverDiverged(f"sparse LU failed: {exc}", residual=np.inf) from exc
    if not np.all(np.isfinite(x)):
        raise SolverDiverged("sparse LU returned non-finite values", residual=np.inf)
    res = float(np.linalg.norm(system.matrix @ x - system.rhs))
    bound = rtol * np.linalg.norm(system.rhs)
    if res > bound and res > 1e-13:
        raise SolverDiverged(f"residual {res:.3g} above {bound:.3g}", residual=res)
    return _with_interior(system.boundary, x)


# ------------------------------------------------------------- energy route


def _as_energy(E):
    return E if isinstance(E, EnergyMatrix) else EnergyMatrix(E)


def _edge_diffs(F, h):
    dx = (F[:, 1:, :] - F[:, :-1, :]) / h  # x-edges, shape (2, n+1, n+2)
    dy = (F[:, :, 1:] - F[:, :, :-1]) / h  # y-edges, shape (2, n+2, n+1)
    return dx, dy


def _cell_means(dx, dy):
    # Per cell: mean of bottom/top x-differences, mean of left/right y-differences.
    return 0.5 * (dx[:, :, :-1] + dx[:, :, 1:]), 0.5 * (dy[:, :-1, :] + dy[:, 1:, :])


def _edge_weights(m):
    # Number of cells sharing each edge along the averaged direction: 1 on the rim, else 2.
    w = np.full(m, 2.0)
    w[0] = w[-1] = 1.0
    return w


def discrete_energy(E, f, grid=None):
    """``1/2 sum_cells h^2 * mean over the 4 corners of <E g, g>``."""
    E = _as_energy(E)
    F = f.stacked()
    n = F.shape[1] - 2
    h = 1.0 / (n + 1) if grid is None else grid.h
    K, L, M = E.K, E.L, E.M
    dx, dy = _edge_diffs(F, h)
    wx = _edge_weights(n + 2)[None, :]
    wy = _edge_weights(n + 2)[:, None]
    kx = np.einsum("aij,ab,bij->ij", dx, K, dx)
    my = np.einsum("aij,ab,bij->ij", dy, M, dy)
    X, Y = _cell_means(dx, dy)
    mixed = np.einsum("aij,ab,bij->", X, L, Y)
    return float(0.5 * h * h * (0.5 * np.sum(wx * kx) + 0.5 * np.sum(wy * my) + 2.0 * mixed))


def _full_gradient(E, F, h):
    K, L, M = E.K, E.L, E.M
    n2 = F.shape[1]
    dx, dy = _edge_diffs(F, h)
    wx = _edge_weights(n2)[None, None, :]
    wy = _edge_weights(n2)[None, :, None]
    X, Y = _cell_means(dx, dy)
    # d energy / d dx and d dy, then through the averaging.
    gdx = 0.5 * h * h * wx * np.einsum("ab,bij->aij", K, dx)
    gdy = 0.5 * h * h * wy * np.einsum("ab,bij->aij", M, dy)
    gX = h * h * np.einsum("ab,bij->aij", L, Y)
    gY = h * h * np.einsum("ba,bij->aij", L, X)
    gdx[:, :, :-1] += 0.5 * gX
    gdx[:, :, 1:] += 0.5 * gX
    gdy[:, :-1, :] += 0.5 * gY
    gdy[:, 1:, :] += 0.5 * gY
    G = np.zeros_like(F)
    G[:, 1:, :] += gdx / h
    G[:, :-1, :] -= gdx / h
    G[:, :, 1:] += gdy / h
    G[:, :, :-1] -= gdy / h
    return G


def energy_gradient(E, f, grid=None):
    """Exact gradient of ``discrete_energy`` with respect to the interior
    values, returned as an array of shape ``(2, n, n)``."""
    E = _as_energy(E)
    F = f.stacked()
    n = F.shape[1] - 2
    h = 1.0 / (n + 1) if grid is None else grid.h
    return _full_gradient(E, F, h)[:, 1:-1, 1:-1]


@dataclass
class MinimizeResult:
    field: DiscreteField
    iterations: int
    grad_norm: float
    energies: list = field(default_factory=list)

    @property
    def monotone(self):
        e = np.asarray(self.energies)
        return bool(np.all(np.diff(e) <= 1e-12 * max(1.0, np.abs(e).max())))


def minimize_energy(E, grid, bc, tol=1e-12, max_iter=None):
    """Conjugate gradients on the interior values with the boundary fixed.

    Stops when the max-norm of the energy gradient is at most ``tol``.
    """
    E = _as_energy(E)
    base = bc if isinstance(bc, DiscreteField) else bc.lattice(grid)
    F0 = base.stacked()
    n, h = grid.n, grid.h
    max_iter = max_iter or 20 * 2 * n * n

    def grad(x):
        F = F0.copy()
        F[:, 1:-1, 1:-1] = x.reshape(2, n, n)
        return _full_gradient(E, F, h)[:, 1:-1, 1:-1].ravel()

    g0 = grad(np.zeros(2 * n * n))
    hess = lambda d: grad(d) - g0  # linear part of the gradient

    x = np.zeros(2 * n * n)
    g = g0.copy()
    d = -g
    energies = [discrete_energy(E, base, grid)]
    it = 0
    gnorm = float(np.abs(g).max())
    while gnorm > tol:
        if it >= max_iter:
            raise MaxIterations(f"CG stopped after {it} iterations", iterations=it, grad_norm=gnorm)
        Hd = hess(d)
        curv = float(d @ Hd)
        if curv <= 0.0:
            raise MaxIterations("energy is not convex along the search direction", iterations=it, grad_norm=gnorm)
        gg = float(g @ g)
        alpha = gg / curv
        x += alpha * d
        g_new = g + alpha * Hd
        if it % 50 == 49:
            g_new = grad(x)  # refresh against drift
        beta = float(g_new @ g_new) / gg
        d = -g_new + beta * d
        g = g_new
        it += 1
        gnorm = float(np.abs(g).max())
        energies.append(discrete_energy(E, _with_interior(base, x), grid))
    return MinimizeResult(_with_interior(base, x), it, gnorm, energies)


# --------------------------------------------------------------- cross-check


@dataclass
class ConsistencyReport:
    n: int
    max_diff: float
    cg_iterations: int
    grad_norm: float
    energy_monotone: bool
    direct: DiscreteField
    minimizer: DiscreteField

    def to_json(self):
        return {
            "n": self.n,
            "max_diff": self.max_diff,
            "cg_iterations": self.cg_iterations,
            "grad_norm": self.grad_norm,
            "energy_monotone": self.energy_monotone,
        }


def el_consistency_check(E, grid, bc, tol=1e-12):
    E = _as_energy(E)
    base = bc if isinstance(bc, DiscreteField) else bc.lattice(grid)
    direct = solve_direct(assemble_direct(euler_lagrange_system(E), grid, base))
    res = minimize_energy(E, grid, base, tol=tol)
    return ConsistencyReport(
        grid.n, direct.max_diff(res.field), res.iterations, res.grad_norm, res.monotone, direct, res.field
    )


def format_dump(f):
    """Plain-text dump: header ``n h`` then one ``i j u v`` row per node."""
    n = f.n
    h = 1.0 / (n + 1)
    lines = [f"{n} {h!r}"]
    for i in range(n + 2):
        for j in range(n + 2):
            lines.append(f"{i} {j} {float(f.u[i, j])!r} {float(f.v[i, j])!r}")
    return "\n".join(lines) + "\n"


def write_dump(f, path):
    with open(path, "w") as fh:
        fh.write(format_dump(f))
