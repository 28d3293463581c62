"""Radial grid and the conservative discretization of

    L u = -(w u')' + w C u' + w (c + V) u,   w = exp(a) psi^(N-1),

with u'(0) = 0 and u(R) = 0.

Each node i < M owns the cell between the neighbouring face midpoints
(the pole cell is [0, r_1/2]). The operator is stored in integrated form:
row i of the band matrix approximates the integral of L u over cell i, so
dividing by the cell weight W_i = int_cell w dr gives the normalized
operator -(w u')'/w + ..., and dividing by the cell length gives L u
itself. The flux through the pole face vanishes when N >= 2, which
encodes u'(0) = 0 without a ghost node. The last row is the identity
(Dirichlet).
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _kernels
from .errors import ParameterError, SingularOperatorError

GRADINGS = ("uniform", "boundary-refined")
MIN_POINTS = 16

_GL_X, _GL_W = np.polynomial.legendre.leggauss(6)


@dataclass(frozen=True, eq=False)
class Grid:
    nodes: np.ndarray
    grading: str

    @property
    def M(self):
        return self.nodes.size - 1

    @property
    def R(self):
        return float(self.nodes[-1])

    @property
    def h(self):
        return np.diff(self.nodes)


def make_grid(R, M, grading="uniform", allow_coarse=False):
    """Nodes 0 = r_0 < ... < r_M = R.

    ``boundary-refined`` maps a uniform grid through x + x(1-x)/2, which
    shrinks the spacing smoothly by a factor 3 from the pole to r = R.
    Grids with fewer than 16 intervals are rejected unless
    ``allow_coarse`` is set.
    """
    if int(M) != M:
        raise ParameterError("M must be an integer")
    M = int(M)
    if M < (1 if allow_coarse else MIN_POINTS):
        raise ParameterError(f"grid needs M >= {MIN_POINTS} intervals, got {M}")
    if not R > 0:
        raise ParameterError("R must be positive")
    if grading not in GRADINGS:
        raise ParameterError(f"unknown grading {grading!r}")
    x = np.arange(M + 1) / M
    if grading == "boundary-refined":
        x = x + 0.5 * x * (1.0 - x)
    nodes = R * x
    nodes[0] = 0.0
    nodes[-1] = float(R)
    nodes.setflags(write=False)
    return Grid(nodes, grading)


def _cell_integral(fn, lo, hi):
    """Vectorized 6-point Gauss-Legendre integral of fn over [lo, hi]."""
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    pts = mid[:, None] + half[:, None] * _GL_X[None, :]
    vals = np.asarray(fn(pts.ravel()), dtype=float).reshape(pts.shape)
    return half * (vals @ _GL_W)


@dataclass(frozen=True, eq=False)
class Geometry:
    """Spec-dependent, potential-independent discretization data."""

    faces: np.ndarray      # r_{i+1/2}, i = 0..M-1
    wface: np.ndarray      # w at faces
    W: np.ndarray          # cell weights int_cell w dr, length M+1 (last = 0 unused)
    cell: np.ndarray       # cell lengths, length M+1
    wnode: np.ndarray      # w at nodes
    Cnode: np.ndarray      # C at nodes


@lru_cache(maxsize=64)
def geometry(spec, grid):
    r = grid.nodes
    M = grid.M
    faces = 0.5 * (r[:-1] + r[1:])
    wface = spec.w(faces)
    # each cell integrated as two half-cells so the node is a breakpoint
    lo = np.concatenate([r[:-1], faces])
    hi = np.concatenate([faces, r[1:]])
    parts = _cell_integral(spec.w, lo, hi)
    right_half, left_half = parts[:M], parts[M:]
    W = np.zeros(M + 1)
    W[:M] += right_half
    W[1:M] += left_half[:M - 1]
    cell = np.zeros(M + 1)
    cell[:M] += faces - r[:-1]
    cell[1:M] += (r[1:] - faces)[:M - 1]
    wnode = spec.w(r)
    Cnode = spec.C(r)
    for arr in (faces, wface, W, cell, wnode, Cnode):
        arr.setflags(write=False)
    return Geometry(faces, wface, W, cell, wnode, Cnode)


@dataclass(frozen=True, eq=False)
class WeightedOperator:
    """Tridiagonal (M+1)x(M+1) operator in integrated form.

    ``lower[i]``/``upper[i]`` couple row i to i-1/i+1. Row 0 carries the
    pole regularity condition, row M the Dirichlet condition u(R) = 0.
    """

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    W: np.ndarray
    cell: np.ndarray
    grid: Grid
    shift: float = 0.0
    potential: np.ndarray = None
    upwind_rows: tuple = ()
    bc: tuple = field(default=("neumann-pole", "dirichlet-R"))

    @property
    def size(self):
        return self.diag.size

    def matvec(self, u):
        """Integrated action; the last entry is u_M."""
        return _kernels.tridiag_matvec(self.lower, self.diag, self.upper,
                                       np.ascontiguousarray(u, dtype=float))

    def apply(self, u):
        """Normalized action (A u)_i / W_i; last entry u_M."""
        y = self.matvec(u)
        y[:-1] /= self.W[:-1]
        return y

    def apply_pointwise(self, u):
        """Pointwise action (A u)_i / |cell_i| approximating L u(r_i)."""
        y = self.matvec(u)
        y[:-1] /= self.cell[:-1]
        return y

    def normalized_rows(self):
        """Band (lower, diag, upper) of the normalized operator."""
        s = np.ones_like(self.W)
        s[:-1] = 1.0 / self.W[:-1]
        return self.lower * s, self.diag * s, self.upper * s

    def dense(self, normalized=False):
        lo, d, up = self.normalized_rows() if normalized else (self.lower, self.diag, self.upper)
        n = self.size
        A = np.diag(d)
        A[np.arange(1, n), np.arange(n - 1)] = lo[1:]
        A[np.arange(n - 1), np.arange(1, n)] = up[:-1]
        return A

    def with_potential(self, extra_diag_density):
        """Copy with W_i * v_i added to the diagonal of rows 0..M-1."""
        d = self.diag.copy()
        d[:-1] += self.W[:-1] * extra_diag_density[:-1]
        return WeightedOperator(self.lower, d, self.upper, self.W, self.cell, self.grid,
                                self.shift, extra_diag_density, self.upwind_rows, self.bc)


@lru_cache(maxsize=64)
def _base_band(spec, grid):
    """Diffusion + advection band for c = 0, V = 0."""
    g = geometry(spec, grid)
    r = grid.nodes
    h = grid.h
    M = grid.M
    lower = np.zeros(M + 1)
    upper = np.zeros(M + 1)
    diag = np.zeros(M + 1)
    k = g.wface / h  # face conductances
    upper[:M] = -k
    lower[1:M] = -k[:M - 1]
    diag[:M] = k
    diag[1:M] += k[:M - 1]

    upwind = []
    C = g.Cnode
    if np.any(C != 0):
        for i in range(1, M):
            hm, hp = h[i - 1], h[i]
            b = g.W[i] * C[i]
            # centered three-point derivative on a nonuniform stencil
            cl = -hp / (hm * (hm + hp))
            cc = (hp - hm) / (hm * hp)
            cu = hm / (hp * (hm + hp))
            lo_new = lower[i] + b * cl
            up_new = upper[i] + b * cu
            if lo_new <= 0 and up_new <= 0:
                lower[i] = lo_new
                upper[i] = up_new
                diag[i] += b * cc
            else:
                upwind.append(i)
                if b > 0:
                    lower[i] -= b / hm
                    diag[i] += b / hm
                else:
                    upper[i] += b / hp
                    diag[i] -= b / hp
        b0 = g.W[0] * C[0]
        # u'(0) = 0: average slope over the pole cell is about half the
        # one-sided difference; kept only if it preserves the sign pattern
        adv = 0.5 * b0 / h[0]
        if upper[0] + adv <= 0:
            upper[0] += adv
            diag[0] -= adv
        else:
            upwind.append(0)
    diag[M] = 1.0
    for arr in (lower, diag, upper):
        arr.setflags(write=False)
    return lower, diag, upper, tuple(upwind)


def assemble(spec, grid, shift=0.0, potential=None):
    """Weighted operator with shift c and potential V (node values or callable)."""
    if shift < 0:
        raise ParameterError("shift must be >= 0")
    g = geometry(spec, grid)
    if not (np.all(np.isfinite(g.wface)) and np.all(np.isfinite(g.W))
            and np.all(np.isfinite(g.Cnode))):
        raise ParameterError("non-finite coefficient in operator")
    if np.any(g.W[1:-1] <= 0):
        raise ParameterError("weight must be positive on interior nodes")
    lower, diag, upper, upwind = _base_band(spec, grid)
    if potential is None:
        V = np.zeros(grid.M + 1)
    elif callable(potential):
        V = np.asarray(potential(grid.nodes), dtype=float)
    else:
        V = np.asarray(potential, dtype=float)
    if V.shape != (grid.M + 1,) or not np.all(np.isfinite(V)):
        raise ParameterError("potential must be finite with one value per node")
    dens = shift + V
    d = diag.copy()
    d[:-1] += g.W[:-1] * dens[:-1]
    return WeightedOperator(lower, d, upper, g.W, g.cell, grid, float(shift), V, upwind)


def solve_linear(op, rhs, form="density"):
    """Solve the discrete problem for the right-hand side ``rhs``.

    ``form="density"``: rhs is a source density g, solves (A u)_i = W_i g_i,
    i.e. op.apply(u) = rhs. ``form="integrated"``: rhs already integrated
    against the cell weights, solves A u = rhs. In both cases rhs[M] is
    the boundary value u(R).
    """
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != (op.size,):
        raise ParameterError("rhs must have one entry per node")
    if form == "density":
        b = rhs.copy()
        b[:-1] *= op.W[:-1]
    elif form == "integrated":
        b = rhs.copy()
    else:
        raise ParameterError(f"unknown rhs form {form!r}")
    u = _kernels.tridiag_solve(op.lower, op.diag, op.upper, np.ascontiguousarray(b))
    if not np.all(np.isfinite(u)):
        raise SingularOperatorError("singular operator")
    return u


def weighted_lp_norm(grid, density, values, p):
    """(int_0^R density |values|^p dr)^(1/p), composite trapezoid."""
    if p < 1:
        raise ParameterError("p must be >= 1")
    dens = density(grid.nodes) if callable(density) else density
    dens = np.broadcast_to(np.asarray(dens, dtype=float), grid.nodes.shape)
    vals = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ParameterError("values must be finite")
    if np.any(dens < 0):
        raise ParameterError("density must be nonnegative")
    integral = _trap(grid.nodes, dens * np.abs(vals) ** p)
    return integral ** (1.0 / p)


def _trap(x, y):
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))


def derivative(grid, u):
    """Second-order nodal derivative: 3-point centered inside, 0 at the
    pole, one-sided 3-point at R."""
    r = grid.nodes
    h = np.diff(r)
    du = np.zeros_like(u, dtype=float)
    hm, hp = h[:-1], h[1:]
    du[1:-1] = (-hp / (hm * (hm + hp)) * u[:-2] + (hp - hm) / (hm * hp) * u[1:-1]
                + hm / (hp * (hm + hp)) * u[2:])
    a, b = h[-1], h[-2]
    du[-1] = ((2 * a + b) / (a * (a + b)) * u[-1] - (a + b) / (a * b) * u[-2]
              + a / (b * (a + b)) * u[-3])
    return du


def flux(spec, grid, u, i):
    """-w(r_i) u'(r_i) by centered differencing (zero at the pole)."""
    M = grid.M
    if not 0 <= i <= M:
        raise ParameterError(f"node index {i} out of range 0..{M}")
    if i == 0:
        return 0.0
    u = np.asarray(u, dtype=float)
    du = derivative(grid, u)
    return float(-geometry(spec, grid).wnode[i] * du[i])


def cumulative_source(grid, spec, values):
    """int_0^{r_i} w(s) values(s) ds at every node (trapezoid)."""
    g = geometry(spec, grid)
    y = g.wnode * values
    out = np.zeros_like(y)
    out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * grid.h)
    return out
