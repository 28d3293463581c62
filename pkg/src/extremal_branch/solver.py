"""Fixed-lambda solves of the discrete radial problem.

The discrete equations are, in integrated form,

    F(u)_i = (A u)_i - lam W_i f(u_i) = 0,  i < M,   u_M = 0,

with A the assembled operator and W the cell weights. Convergence is
measured on the normalized residual F_i / W_i, which approximates the
pointwise equation divided by the weight.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import (
    BlowUpError, DomainError, MonotonicityError, NoConvergenceError, ParameterError,
    SingularOperatorError,
)
from .odecore import assemble, geometry

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
NEWTON_MAX_ITER = 50
ARMIJO_MIN_STEP = 2.0 ** -20
CLIP_GAP = 1e-8
MONOTONE_MAX_ITER = 10000
# exp overflows just above 709; treat anything beyond as blow-up
GELFAND_BLOWUP = 700.0


@dataclass
class Solution:
    lam: float
    u: np.ndarray
    residual_norm: float
    grid: object
    spec: object
    mu1: float = None
    iterations: int = 0
    method: str = "newton"
    info: dict = field(default_factory=dict)

    @property
    def u0(self):
        return float(self.u[0])

    @property
    def sup_u(self):
        return float(np.max(self.u))

    @property
    def r(self):
        return self.grid.nodes


def _ceiling(nl):
    if nl.kind == "mems":
        return nl.s0 - CLIP_GAP
    if nl.kind == "gelfand":
        return GELFAND_BLOWUP
    return math.inf


def _integrated_residual(op, W, lam, nl, u):
    F = op.matvec(u)
    F[:-1] -= lam * W[:-1] * nl.f(u[:-1])
    F[-1] = u[-1]
    return F


def _scaled(F, W):
    out = F.copy()
    out[:-1] /= W[:-1]
    return out


def residual_floor(op, W, lam, nl, u):
    """Rounding-level size of the normalized residual at u.

    Cancellation in (A u)_i - lam W_i f_i leaves an error of about
    eps * (|A| |u| + lam W |f|)_i; no tolerance below this can be met.
    """
    absAu = np.abs(op.lower) * np.abs(np.roll(u, 1)) + np.abs(op.diag) * np.abs(u) + \
        np.abs(op.upper) * np.abs(np.roll(u, -1))
    mag = absAu[:-1] + lam * W[:-1] * np.abs(nl.f(u[:-1]))
    return float(np.max(np.finfo(float).eps * mag / W[:-1]))


def _check_state(nl, u):
    if np.any(u >= nl.s0):
        raise DomainError("nonlinearity blow-up level reached")


def residual(spec, grid, u, lam):
    """L[u] - lam w f(u) at the nodes.

    Rows are divided by the cell lengths so each entry approximates the
    pointwise value -(w u')' + w C u' - lam w f(u) at r_i. The Dirichlet
    row at r = R is zeroed.
    """
    nl = spec.nonlinearity
    u = np.asarray(u, dtype=float)
    _check_state(nl, u)
    op = assemble(spec, grid)
    W = geometry(spec, grid).W
    F = _integrated_residual(op, W, lam, nl, u)
    F[:-1] /= op.cell[:-1]
    F[-1] = 0.0
    return F


def weighted_residual_norm(spec, grid, u, lam):
    """max_i |F(u)_i / W_i| over the non-Dirichlet rows."""
    op = assemble(spec, grid)
    W = geometry(spec, grid).W
    F = _integrated_residual(op, W, lam, spec.nonlinearity, np.asarray(u, dtype=float))
    return float(np.max(np.abs(_scaled(F, W)[:-1])))


def newton_solve(spec, grid, lam, u_init=None, tol=DEFAULT_TOL, max_iter=NEWTON_MAX_ITER):
    """Damped Newton iteration for the discrete problem at fixed lam.

    Steps are backtracked (factor 1/2, down to 2^-20) until the weighted
    L2 norm of the residual decreases by the Armijo factor. Iterates are
    clipped to s0 - 1e-8 for mems; repeated clipping is reported as
    blow-up. The stopping test is the normalized sup-norm residual
    against max(tol, 100 x rounding floor).
    """
    if lam < 0:
        raise ParameterError("lambda must be >= 0")
    nl = spec.nonlinearity
    M = grid.M
    u = np.zeros(M + 1) if u_init is None else np.array(u_init, dtype=float)
    if u.shape != (M + 1,):
        raise ParameterError("u_init must have one entry per node")
    top = _ceiling(nl)
    if np.any(u >= nl.s0) or np.any(~np.isfinite(u)):
        raise DomainError("initial guess outside [0, s0)")
    u[-1] = 0.0
    op = assemble(spec, grid)
    W = geometry(spec, grid).W
    Winv = np.zeros(M + 1)
    Winv[:-1] = 1.0 / W[:-1]
    clip_events = 0
    clipped_in_a_row = 0

    def merit(F):
        with np.errstate(over="ignore", invalid="ignore"):
            return math.sqrt(float(np.sum(F[:-1] ** 2 * Winv[:-1])) + F[-1] ** 2)

    F = _integrated_residual(op, W, lam, nl, u)
    for it in range(max_iter + 1):
        norm = float(np.max(np.abs(F[:-1] * Winv[:-1])))
        floor = residual_floor(op, W, lam, nl, u)
        target = max(tol, 100.0 * floor)
        if norm <= target and abs(u[-1]) == 0.0:
            info = {"clip_events": clip_events, "target": target}
            if target > tol:
                info["tolerance_floored"] = True
            return Solution(float(lam), u, norm, grid, spec, iterations=it,
                            method="newton", info=info)
        if it == max_iter:
            break
        J_diag = op.diag.copy()
        J_diag[:-1] -= lam * W[:-1] * nl.fp(u[:-1])
        try:
            du = _kernels.tridiag_solve(op.lower, J_diag, op.upper, -F)
        except SingularOperatorError as exc:
            raise NoConvergenceError(f"singular Jacobian at lambda={lam}") from exc
        m0 = merit(F)
        t = 1.0
        while True:
            trial = u + t * du
            clipped = False
            if np.any(trial > top):
                if nl.kind != "mems":
                    raise BlowUpError(f"iterate exceeded {top} at lambda={lam}")
                np.minimum(trial, top, out=trial)
                clipped = True
            Ft = _integrated_residual(op, W, lam, nl, trial)
            if np.all(np.isfinite(Ft)) and merit(Ft) <= (1.0 - 1e-4 * t) * m0:
                break
            t *= 0.5
            if t < ARMIJO_MIN_STEP:
                raise NoConvergenceError(
                    f"line search failed at lambda={lam} (residual {norm:.3e})")
        if clipped:
            clip_events += 1
            clipped_in_a_row += 1
            log.debug("newton: iterate clipped below s0 (%d events)", clip_events)
            if clipped_in_a_row >= 5:
                raise BlowUpError(f"iterates pinned at s0 - {CLIP_GAP} at lambda={lam}")
        else:
            clipped_in_a_row = 0
        u, F = trial, Ft
    raise NoConvergenceError(f"no convergence after {max_iter} Newton iterations "
                             f"at lambda={lam} (residual {norm:.3e})")


def default_shift(nl, lam, sup_u):
    """1.5 lam f'(sup u + margin), margin 0.1 (s0 - sup u) capped at 1."""
    margin = 1.0 if math.isinf(nl.s0) else min(1.0, 0.1 * (nl.s0 - sup_u))
    return 1.5 * lam * float(nl.fp(sup_u + margin))


def monotone_iterate(spec, grid, lam, c=None, tol=DEFAULT_TOL, max_iter=MONOTONE_MAX_ITER):
    """Monotone iteration (A + c W) u_n = lam W f(u_{n-1}) + c W u_{n-1}, u_0 = 0.

    With c = None the shift follows ``default_shift`` and is recomputed
    every step. Each step must not decrease u (checked up to rounding).
    The loop stops once the step is below tol and the error predicted from
    the observed contraction rate, step * rho / (1 - rho), is below tol as
    well; near the fold rho approaches 1 and the bare step size would stop
    far from the limit.
    """
    if lam < 0:
        raise ParameterError("lambda must be >= 0")
    nl = spec.nonlinearity
    M = grid.M
    op = assemble(spec, grid)
    W = geometry(spec, grid).W
    top = _ceiling(nl)
    u = np.zeros(M + 1)
    prev_step = None
    c_used = 0.0
    for n in range(1, max_iter + 1):
        cn = default_shift(nl, lam, float(u.max())) if c is None else float(c)
        c_used = max(c_used, cn)
        d = op.diag.copy()
        d[:-1] += cn * W[:-1]
        # increment form: (A + c W) inc = lam W f(u) - A u, same iterate as
        # solving for u_n directly but without cancellation against u
        inc = _kernels.tridiag_solve(op.lower, d, op.upper,
                                     -_integrated_residual(op, W, lam, nl, u))
        new = u + inc
        if not np.all(np.isfinite(new)) or np.any(new >= top):
            raise BlowUpError(f"monotone iterates reached the blow-up level at lambda={lam} "
                              f"after {n} steps")
        scale = max(1.0, float(np.max(np.abs(new))))
        if np.min(inc) < -max(1e-12 * scale, 0.1 * tol):
            raise MonotonicityError(f"monotone iteration decreased at step {n} "
                                    f"(min increment {np.min(inc):.3e})")
        step = float(np.max(np.abs(inc)))
        u = new
        if step == 0.0:
            break
        if prev_step is not None and step <= tol:
            rho = min(step / prev_step, 1.0 - 1e-16)
            if step * rho / (1.0 - rho) <= tol:
                break
        prev_step = step
    else:
        raise NoConvergenceError(f"monotone iteration did not converge in {max_iter} "
                                 f"steps at lambda={lam} (last step {step:.3e})")
    F = _integrated_residual(op, W, lam, nl, u)
    norm = float(np.max(np.abs(_scaled(F, W)[:-1])))
    return Solution(float(lam), u, norm, grid, spec, iterations=n, method="monotone",
                    info={"c_max": c_used,
                          "margin_capped": c is None and math.isinf(nl.s0)})
