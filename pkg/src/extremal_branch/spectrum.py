"""Principal eigenvalue of the linearized operator, torsion function and
the two-sided bounds on the extremal parameter.

The linearization at (u, lam) is J = A - lam W f'(u) acting on nodes
0..M-1 (u_M = 0 is fixed), and the eigenproblem is J phi = mu W phi.
W^-1 J is tridiagonal with negative off-diagonals, so it is similar to
the symmetric tridiagonal matrix with diagonal J_ii / W_i and squared
off-diagonals J_{i,i+1} J_{i+1,i} / (W_i W_{i+1}). All eigenvalues are
real, and Sturm counts of that matrix locate mu_1 exactly; it is then
refined together with phi by shifted inverse iteration with shifts kept
strictly below mu_1.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from . import _kernels
from .errors import NoConvergenceError, SingularOperatorError
from .odecore import assemble, geometry, solve_linear

MAX_ITER = 500
EIG_RESIDUAL = 1e-8
TOL_EIG_REL = 1e-5


@dataclass
class EigenPair:
    mu: float
    phi: np.ndarray
    iterations: int
    residual: float
    # infimum of the quadratic form <J phi, phi> / <W phi, phi>; equals mu
    # when C = 0 and lies at or below mu otherwise
    form_inf: float = None


def _jacobian_band(spec, grid, u, lam):
    op = assemble(spec, grid)
    W = geometry(spec, grid).W
    M = grid.M
    d = op.diag[:M].copy()
    if lam != 0:
        d -= lam * W[:M] * spec.nonlinearity.fp(np.asarray(u, dtype=float)[:M])
    lo = op.lower[:M].copy()
    up = op.upper[:M].copy()
    up[-1] = 0.0  # coupling to the Dirichlet node drops out
    return lo, d, up, W[:M]


def _symmetric_form(lo, d, up, W):
    diag = d / W
    offsq = up[:-1] * lo[1:] / (W[:-1] * W[1:])
    return diag, offsq


def _bracket_mu1(diag, offsq, guess=None):
    """(a, b) with no eigenvalue below a and at least one below b."""
    e = np.sqrt(np.maximum(offsq, 0.0))
    rad = np.zeros_like(diag)
    rad[:-1] += e
    rad[1:] += e
    a = float(np.min(diag - rad))
    b = float(np.min(diag + rad))
    if guess is not None and math.isfinite(guess):
        span = max(abs(guess), 1.0) * 1e-3
        lo_try, hi_try = guess - span, guess + span
        if _kernels.sturm_count(diag, offsq, lo_try) == 0:
            a = max(a, lo_try)
        if _kernels.sturm_count(diag, offsq, hi_try) >= 1:
            b = min(b, hi_try)
    while _kernels.sturm_count(diag, offsq, b) == 0:
        b = b + max(abs(b), 1.0)
    while _kernels.sturm_count(diag, offsq, a) > 0:
        a = a - max(abs(a), 1.0)
    return a, b


def _bisect(diag, offsq, a, b):
    for _ in range(200):
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            break
        if _kernels.sturm_count(diag, offsq, mid) == 0:
            a = mid
        else:
            b = mid
        if b - a <= 4 * np.finfo(float).eps * max(abs(a), abs(b), 1e-300):
            break
    return a, b


def principal_eigenvalue(spec, grid, u=None, lam=0.0, mu_guess=None):
    """Smallest eigenvalue mu_1 of J phi = mu W phi and its positive
    eigenfunction (sup phi = 1, phi_M = 0)."""
    M = grid.M
    if u is None:
        u = np.zeros(M + 1)
    lo, d, up, W = _jacobian_band(spec, grid, u, lam)
    diag, offsq = _symmetric_form(lo, d, up, W)
    if np.any(offsq < 0):
        raise NoConvergenceError("linearized operator lost its sign pattern")
    a, b = _bracket_mu1(diag, offsq, mu_guess)
    a, b = _bisect(diag, offsq, a, b)
    mu = 0.5 * (a + b)

    # inverse iteration (J - sigma W) y = W phi, sigma just below mu_1
    gap = max(b - a, 1e-12 * max(abs(mu), 1.0))
    sigma = a - gap
    D = _sym_weights(lo, up)
    phi = np.ones(M)
    it = 0
    res = math.inf
    for attempt in range(3):
        shifted = d - sigma * W
        for it in range(1, MAX_ITER + 1):
            try:
                y = _kernels.tridiag_solve(lo, shifted, up, np.ascontiguousarray(W * phi))
            except SingularOperatorError:
                sigma -= gap
                shifted = d - sigma * W
                continue
            y /= y[np.argmax(np.abs(y))]
            phi = y
            Jphi = _kernels.tridiag_matvec(lo, d, up, phi)
            Wphi = W * phi
            # Rayleigh-type estimate in the symmetrizing inner product
            mu_est = float(np.dot(Jphi, phi * D) / np.dot(Wphi, phi * D))
            if a - gap <= mu_est <= b + gap:
                mu = mu_est
            res = float(np.max(np.abs(Jphi - mu * Wphi)) / np.max(np.abs(Wphi)))
            if res <= max(EIG_RESIDUAL, _rounding_floor(lo, d, up, W, mu, phi)):
                break
        if phi[np.argmax(np.abs(phi))] < 0:
            phi = -phi
        if res <= max(EIG_RESIDUAL, _rounding_floor(lo, d, up, W, mu, phi)) and \
                np.all(phi > 0):
            break
        # retry with a shift further below mu_1
        gap *= 10.0
        sigma = a - gap
        phi = np.ones(M)
    else:
        if res > max(EIG_RESIDUAL, _rounding_floor(lo, d, up, W, mu, phi)):
            raise NoConvergenceError(f"inverse iteration residual {res:.2e} after "
                                     f"{MAX_ITER} steps")
        raise NoConvergenceError("eigenvector not positive: computed mode is not principal")
    full = np.zeros(M + 1)
    full[:M] = phi / phi.max()
    form = float(mu)
    if spec.advection.has_C:
        form = _form_infimum(lo, d, up, W)
    return EigenPair(float(mu), full, it, res, form)


def _form_infimum(lo, d, up, W):
    """Smallest eigenvalue of the symmetric part of J against W.

    The quadratic form only sees (J + J^T) / 2, whose off-diagonals are the
    averaged couplings; its minimum over the pencil is located by Sturm
    bisection like mu_1.
    """
    off = 0.5 * (up[:-1] + lo[1:])
    diag = d / W
    offsq = off * off / (W[:-1] * W[1:])
    a, b = _bisect(diag, offsq, *_bracket_mu1(diag, offsq))
    return 0.5 * (a + b)


def _rounding_floor(lo, d, up, W, mu, phi):
    """100 eps (|J| |phi| + |mu| W |phi|) / max |W phi|: the smallest
    eigen-residual computable in floating point."""
    a = np.abs(phi)
    mag = np.abs(d) * a + np.abs(mu) * W * a
    mag[1:] += np.abs(lo[1:]) * a[:-1]
    mag[:-1] += np.abs(up[:-1]) * a[1:]
    return 100.0 * np.finfo(float).eps * float(np.max(mag) / np.max(W * a))


def _sym_weights(lo, up):
    """Diagonal D making D J symmetric, D_{i+1} / D_i = J_{i,i+1} / J_{i+1,i}.

    (D J) phi = mu (D W) phi is then a symmetric-definite pencil with the
    same eigenvalues, and its Rayleigh quotient is used for mu. D = 1 when
    C = 0.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        r = up[:-1] / lo[1:]
    r = np.where(np.isfinite(r) & (r > 0), r, 1.0)
    logs = np.concatenate([[0.0], np.cumsum(np.log(r))])
    return np.exp(logs - logs.max())


def torsion_function(spec, grid):
    """Solution of the discrete problem with unit source density, zero at R."""
    op = assemble(spec, grid)
    g = np.ones(grid.M + 1)
    g[-1] = 0.0
    return solve_linear(op, g)


def first_eigenvalue(spec, grid):
    """lambda_1 of the operator at u = 0, lam = 0."""
    return principal_eigenvalue(spec, grid).mu


def _lower_bound(nl, maxw):
    if nl.kind == "mems":
        return 4.0 / (27.0 * maxw), 1.0 / (3.0 * maxw)
    if nl.kind == "gelfand":
        return 1.0 / (math.e * maxw), 1.0 / maxw
    return golden_lower_bound(nl, maxw)


def golden_lower_bound(nl, maxw):
    """max over beta in (0, s0/maxw) of beta / f(beta maxw), golden section."""
    hi = (nl.s0 / maxw) if math.isfinite(nl.s0) else 1e3 / maxw
    res = minimize_scalar(lambda b: -b / float(nl.f(b * maxw)), bracket=(0.0, 1.0 / maxw, hi),
                          method="golden", tol=1e-10)
    beta = float(res.x)
    return beta / float(nl.f(beta * maxw)), beta


def lambda_star_bounds(spec, grid):
    """(lower, upper) with lower = max_beta beta / f(beta max w) using the
    torsion function w and upper = lambda_1."""
    maxw = float(np.max(torsion_function(spec, grid)))
    lower, _ = _lower_bound(spec.nonlinearity, maxw)
    upper = first_eigenvalue(spec, grid)
    return lower, upper


def stability_check(spec, grid, u, lam, tol_eig=None, lambda1=None):
    """'stable' if mu_1 > tol_eig, 'semi-stable-boundary' if |mu_1| <= tol_eig,
    otherwise 'unstable'. tol_eig defaults to 1e-5 lambda_1."""
    if tol_eig is None:
        lam1 = first_eigenvalue(spec, grid) if lambda1 is None else lambda1
        tol_eig = TOL_EIG_REL * lam1
    mu = principal_eigenvalue(spec, grid, u, lam).mu
    if mu > tol_eig:
        return "stable"
    if abs(mu) <= tol_eig:
        return "semi-stable-boundary"
    return "unstable"
