"""Pseudo-arclength continuation of the solution branch from (lam, u) = (0, 0).

The branch is parameterized by arclength in the plane (chi(u0), lam), where
chi rescales the pole value so that it grows without bound along the
branch: chi = u0 (gelfand), log(1 + u0) (power), -log(1 - u0) (mems).
Each step solves the bordered system

    F(u, lam) = A u - lam W f(u) = 0,
    t_chi (chi(u0) - chi_k) + t_lam (lam - lam_k) = ds,

by Newton's method from a secant predictor. The first fold (maximum of
lam) is refined by maximizing lam over pole-value parameterized solves.
"""

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import _kernels
from .errors import (
    BlowUpError, ConfigError, ContinuationStalled, ExtremalBranchError, NoConvergenceError,
    ParameterError, SingularOperatorError,
)
from .odecore import assemble, geometry, make_grid
from .solver import (
    CLIP_GAP, DEFAULT_TOL, GELFAND_BLOWUP, Solution, newton_solve, residual_floor,
)
from .spectrum import TOL_EIG_REL, first_eigenvalue, principal_eigenvalue

log = logging.getLogger(__name__)

DS_FLOOR = 1e-8
CORRECTOR_MAX_ITER = 15
# a solution is resolved while its core (u within one natural unit of u0)
# spans at least this many nodes
MIN_CORE = 8
TERMINATIONS = ("fold-passed-and-ceiling", "ceiling", "max-steps", "blow-up-detected")


# ---------------------------------------------------------------- helpers

def chi(nl, u0):
    if nl.kind == "gelfand":
        return u0
    if nl.kind == "power":
        return math.log1p(u0)
    return -math.log1p(-u0)


def dchi(nl, u0):
    if nl.kind == "gelfand":
        return 1.0
    if nl.kind == "power":
        return 1.0 / (1.0 + u0)
    return 1.0 / (1.0 - u0)


def chi_inverse(nl, c):
    if nl.kind == "gelfand":
        return c
    if nl.kind == "power":
        return math.expm1(c)
    return -math.expm1(-c)


def default_ceiling(nl):
    return 0.999 * nl.s0 if nl.kind == "mems" else 30.0


def singular_regime(nl, N):
    """Whether the extremal solution is expected to be unbounded.

    gelfand N >= 10 and mems N >= 8 follow the critical-dimension table;
    for the power nonlinearity the threshold is the Joseph-Lundgren value
    N >= 6 + 4 (sqrt(m (m - 1)) + 1) / (m - 1).
    """
    if nl.kind == "gelfand":
        return N >= 10
    if nl.kind == "mems":
        return N >= 8
    return N >= 6 + 4.0 * (math.sqrt(nl.m * (nl.m - 1)) + 1) / (nl.m - 1)


class _Context:
    """Operator data shared by all solves along one branch."""

    def __init__(self, spec, grid, tol):
        self.spec = spec
        self.grid = grid
        self.nl = spec.nonlinearity
        self.M = grid.M
        op = assemble(spec, grid)
        self.op = op
        self.W = geometry(spec, grid).W
        self.lower = np.ascontiguousarray(op.lower[:self.M])
        self.upper = np.ascontiguousarray(op.upper[:self.M])
        self.diag = op.diag[:self.M]
        self.Wi = self.W[:self.M]
        self.tol = tol
        if self.nl.kind == "mems":
            self.top = self.nl.s0 - CLIP_GAP
        elif self.nl.kind == "gelfand":
            self.top = GELFAND_BLOWUP
        else:
            self.top = math.inf

    def F(self, u, lam):
        Au = self.op.matvec(u)[:self.M]
        return Au - lam * self.Wi * self.nl.f(u[:self.M])

    def norm(self, F):
        return float(np.max(np.abs(F / self.Wi)))

    def target(self, u, lam):
        return max(self.tol, 100.0 * residual_floor(self.op, self.W, lam, self.nl, u))


def _bordered_newton(ctx, u, lam, constraint, max_iter=CORRECTOR_MAX_ITER):
    """Newton on {F = 0, g = 0}; constraint(u, lam) -> (g, dg/du0, dg/dlam).

    Returns (u, lam, iterations) or raises NoConvergenceError/BlowUpError.
    """
    u = u.copy()
    u[-1] = 0.0
    first = None
    for it in range(max_iter + 1):
        F = ctx.F(u, lam)
        g, c0, d = constraint(u, lam)
        norm = ctx.norm(F)
        if not math.isfinite(norm):
            raise NoConvergenceError("non-finite residual in corrector")
        if first is None:
            first = norm
        if norm <= ctx.target(u, lam) and abs(g) <= 1e-12 * max(1.0, abs(lam)):
            return u, lam, it
        if it == max_iter or norm > 1e8 * max(first, 1.0):
            break
        J = ctx.diag - lam * ctx.Wi * ctx.nl.fp(u[:ctx.M])
        col = -ctx.Wi * ctx.nl.f(u[:ctx.M])
        try:
            du, dlam = _kernels.bordered_solve(ctx.lower, np.ascontiguousarray(J), ctx.upper,
                                               np.ascontiguousarray(col), c0, d,
                                               np.ascontiguousarray(-F), -g)
        except SingularOperatorError as exc:
            raise NoConvergenceError("singular bordered system") from exc
        t = 1.0
        while np.any(u[:ctx.M] + t * du >= ctx.top) or lam + t * dlam < 0:
            t *= 0.5
            if t < 1e-3:
                raise BlowUpError("corrector step leaves the domain of f")
        u[:ctx.M] += t * du
        lam += t * dlam
    raise NoConvergenceError("corrector did not converge")


def solve_at_u0(ctx, target_u0, u_init, lam_init, max_iter=CORRECTOR_MAX_ITER):
    """Solution with prescribed pole value; returns (u, lam)."""
    def constraint(u, lam):
        return u[0] - target_u0, 1.0, 0.0
    u, lam, _ = _bordered_newton(ctx, u_init, lam_init, constraint, max_iter)
    return u, lam


# ---------------------------------------------------------------- data

@dataclass
class BranchPoint:
    s: float
    lam: float
    u0: float
    sup_u: float
    mu1: float
    stable: bool
    solution: Solution = None
    form_inf: float = None


@dataclass
class Branch:
    points: list
    spec: object
    grid: object
    termination: str
    fold_index: int = None
    lambda_star: float = None
    lambda_star_err: float = None
    lambda1: float = None
    tol_eig: float = None
    flags: dict = field(default_factory=dict)

    def lambdas(self):
        return np.array([p.lam for p in self.points])

    def u0s(self):
        return np.array([p.u0 for p in self.points])

    def mu1s(self):
        return np.array([p.mu1 for p in self.points])


def _make_point(ctx, s, u, lam, tol_eig, mu_guess=None, iterations=0):
    eig = principal_eigenvalue(ctx.spec, ctx.grid, u, lam, mu_guess=mu_guess)
    norm = ctx.norm(ctx.F(u, lam))
    sol = Solution(float(lam), u, norm, ctx.grid, ctx.spec, mu1=eig.mu,
                   iterations=iterations, method="continuation")
    return BranchPoint(float(s), float(lam), float(u[0]), float(np.max(u)), eig.mu,
                       bool(eig.mu >= -tol_eig), sol, eig.form_inf)


# ---------------------------------------------------------------- tracing

def trace_branch(spec, grid, ds=None, max_steps=2000, u0_ceiling=None, tol=DEFAULT_TOL,
                 tol_eig=None, refine_fold=True):
    """Follow the branch from (0, 0) until u0 reaches u0_ceiling, the step
    size underflows, or max_steps points have been accepted."""
    nl = spec.nonlinearity
    if ds is None:
        ds = 0.05 * spec.R
    if u0_ceiling is None:
        u0_ceiling = default_ceiling(nl)
    if not ds > 0:
        raise ParameterError("ds must be positive")
    if not 0 < u0_ceiling < nl.s0:
        raise ParameterError("u0_ceiling must lie in (0, s0)")
    if max_steps < 1:
        raise ParameterError("max_steps must be >= 1")
    ctx = _Context(spec, grid, tol)
    lam1 = first_eigenvalue(spec, grid)
    if tol_eig is None:
        tol_eig = TOL_EIG_REL * lam1
    chi_ceil = chi(nl, u0_ceiling)
    M = grid.M

    u = np.zeros(M + 1)
    pts = [_make_point(ctx, 0.0, u, 0.0, tol_eig)]
    # tangent at the origin: du/dlam = A^-1 (W f(0))
    rhs = np.zeros(M)
    rhs[:] = ctx.Wi * float(nl.f(0.0))
    du_dlam = np.zeros(M + 1)
    du_dlam[:M] = _kernels.tridiag_solve(ctx.lower, np.ascontiguousarray(ctx.diag), ctx.upper,
                                         rhs)
    tc, tl = dchi(nl, 0.0) * du_dlam[0], 1.0
    nrm = math.hypot(tc, tl)
    t_chi, t_lam = tc / nrm, tl / nrm
    # state derivative per unit arclength for the predictor
    dz_u = du_dlam / nrm
    dz_lam = 1.0 / nrm

    h = ds
    s = 0.0
    termination = "max-steps"
    fold_index = None
    successes = 0
    while len(pts) < max_steps + 1:
        last = pts[-1]
        u_k, lam_k = last.solution.u, last.lam
        chi_k = chi(nl, u_k[0])
        step = h
        final = False
        if chi_k + step * t_chi >= chi_ceil and t_chi > 0:
            final = True
        try:
            if final:
                frac = (chi_ceil - chi_k) / (step * t_chi) if t_chi > 0 else 1.0
                u_pred = np.clip(u_k + frac * step * dz_u, 0.0, None)
                lam_pred = max(lam_k + frac * step * dz_lam, 0.0)
                u_pred[0] = u0_ceiling
                u_new, lam_new = solve_at_u0(ctx, u0_ceiling, _cap(ctx, u_pred), lam_pred)
                step = math.hypot(chi(nl, u_new[0]) - chi_k, lam_new - lam_k)
            else:
                u_pred = _cap(ctx, np.maximum(u_k + step * dz_u, 0.0))
                lam_pred = max(lam_k + step * dz_lam, 0.0)
                chi_k_, tc_, tl_, step_ = chi_k, t_chi, t_lam, step

                def constraint(uu, ll, chi_k_=chi_k_, tc_=tc_, tl_=tl_, step_=step_):
                    return (tc_ * (chi(nl, uu[0]) - chi_k_) + tl_ * (ll - lam_k) - step_,
                            tc_ * dchi(nl, uu[0]), tl_)
                u_new, lam_new, _ = _bordered_newton(ctx, u_pred, lam_pred, constraint)
            if chi(nl, u_new[0]) <= chi_k or np.any(u_new[:M] < -1e-12):
                raise NoConvergenceError("step went backwards along the branch")
        except (NoConvergenceError, BlowUpError, FloatingPointError) as exc:
            h *= 0.5
            successes = 0
            log.debug("step rejected at lam=%.6g u0=%.6g (%s); ds -> %.3g", lam_k, u_k[0],
                      exc, h)
            if h < DS_FLOOR:
                # past a fold or past the resolved profiles the solution has
                # concentrated below the grid scale
                if fold_index is None and _core_nodes(last) >= MIN_CORE:
                    raise ContinuationStalled(
                        f"arclength step underflow at lambda={lam_k:.6g}, u0={u_k[0]:.6g} "
                        "before any fold") from exc
                termination = "blow-up-detected"
                break
            continue

        s += step
        pt = _make_point(ctx, s, u_new, lam_new, tol_eig, mu_guess=last.mu1)
        pts.append(pt)
        # secant direction in the (chi, lam) plane and in state space
        dc = chi(nl, u_new[0]) - chi_k
        dl = lam_new - lam_k
        nrm = math.hypot(dc, dl)
        t_chi, t_lam = dc / nrm, dl / nrm
        dz_u = (u_new - u_k) / nrm
        dz_lam = dl / nrm

        # turning points of unresolved profiles are grid artifacts, not folds
        if fold_index is None and len(pts) >= 3 and pts[-1].lam < pts[-2].lam and \
                pts[-2].lam >= pts[-3].lam and _core_nodes(pts[-2]) >= MIN_CORE:
            fold_index = len(pts) - 2
            if refine_fold:
                fold_index = _refine_fold(ctx, pts, fold_index, tol_eig)
        if final:
            termination = "fold-passed-and-ceiling" if fold_index is not None else "ceiling"
            break
        successes += 1
        if successes >= 2 and h < ds:
            h = min(ds, 2.0 * h)
            successes = 0

    branch = Branch(pts, spec, grid, termination, fold_index=fold_index, lambda1=lam1,
                    tol_eig=tol_eig)
    branch.flags["mu1_slope_max"] = _mu1_slope(branch)
    try:
        lam_star, err = find_lambda_star(branch)
        branch.lambda_star, branch.lambda_star_err = lam_star, err
    except ExtremalBranchError:
        pass
    return branch


def _mu1_slope(branch):
    """Largest |d mu1 / ds| between consecutive resolved points; a jump far
    above the typical slope would indicate a switch to another mode."""
    idx = resolved_tail(branch)
    if len(idx) < 2:
        return 0.0
    mu = np.array([branch.points[i].mu1 for i in idx])
    s = np.array([branch.points[i].s for i in idx])
    ds = np.diff(s)
    ok = ds > 0
    slope = np.abs(np.diff(mu))[ok] / ds[ok]
    slope_max = float(np.max(slope)) if slope.size else 0.0
    log.debug("max |d mu1/ds| on the resolved branch: %.4g", slope_max)
    return slope_max


def _cap(ctx, u):
    return np.minimum(u, ctx.top) if math.isfinite(ctx.top) else u


def _interp_state(pts, u0):
    """Linear interpolation of stored solutions at pole value u0."""
    u0s = np.array([p.u0 for p in pts])
    j = int(np.clip(np.searchsorted(u0s, u0), 1, len(pts) - 1))
    a, b = pts[j - 1], pts[j]
    w = 0.0 if b.u0 == a.u0 else (u0 - a.u0) / (b.u0 - a.u0)
    u = (1 - w) * a.solution.u + w * b.solution.u
    lam = (1 - w) * a.lam + w * b.lam
    u = u.copy()
    u[0] = u0
    return u, lam


def _refine_fold(ctx, pts, k, tol_eig):
    """Insert the maximizer of lam(u0) between points k-1 and k+1; returns
    its index."""
    lo, hi = pts[k - 1], pts[k + 1]
    cache = {}

    def neg_lam(u0):
        u_init, lam_init = _interp_state(pts[k - 1:k + 2], u0)
        u, lam = solve_at_u0(ctx, u0, u_init, lam_init)
        cache[u0] = (u, lam)
        return -lam

    try:
        res = minimize_scalar(neg_lam, bounds=(lo.u0, hi.u0), method="bounded",
                              options={"xatol": 1e-11 * max(1.0, hi.u0)})
        u0f = float(res.x)
        u, lam = cache.get(u0f) or solve_at_u0(ctx, u0f, *_interp_state(pts[k - 1:k + 2], u0f))
    except (NoConvergenceError, BlowUpError) as exc:
        log.debug("fold refinement failed (%s); keeping coarse fold", exc)
        return k
    if not lo.u0 < u0f < hi.u0:
        return k
    # arclength of the inserted point by interpolation in u0
    s = float(np.interp(u0f, [lo.u0, pts[k].u0, hi.u0], [lo.s, pts[k].s, hi.s])) \
        if lo.u0 < pts[k].u0 < hi.u0 else pts[k].s
    pt = _make_point(ctx, s, u, lam, tol_eig, mu_guess=0.0)
    pt.solution.info["fold_refined"] = True
    if u0f < pts[k].u0:
        pts.insert(k, pt)
        return k
    pts.insert(k + 1, pt)
    return k + 1


# ---------------------------------------------------------------- lambda*

def _core_nodes(point):
    """Nodes inside the region where u is within one natural unit of u0."""
    nl = point.solution.spec.nonlinearity
    u = point.solution.u
    u0 = u[0]
    scale = {"gelfand": 1.0, "power": 1.0 + u0, "mems": 1.0 - u0}[nl.kind]
    return int(np.sum(u >= u0 - scale))


def resolved_tail(branch, min_core=MIN_CORE):
    """Indices of points whose solution core spans at least min_core nodes."""
    idx = []
    for i, p in enumerate(branch.points):
        if p.solution is None:
            break
        if i > 0 and _core_nodes(p) < min_core:
            break
        idx.append(i)
    return idx


def _asymptote(branch):
    """Limit of lam along the resolved tail.

    The tail is resampled at equally spaced chi and the last three samples
    are combined by Aitken's delta-squared process; when that is unstable
    the last value is returned. The error estimate is the size of the
    extrapolation correction.
    """
    nl = branch.spec.nonlinearity
    idx = resolved_tail(branch)
    if len(idx) < 6:
        raise ExtremalBranchError("branch too short for asymptote detection")
    c = np.array([chi(nl, branch.points[i].u0) for i in idx])
    lam = np.array([branch.points[i].lam for i in idx])
    c_end = c[-1]
    span = min(c_end - c[0], 3.0)
    grid = np.linspace(c_end - span, c_end, 7)
    samples = np.interp(grid, c, lam)
    a, b, cc = samples[-5], samples[-3], samples[-1]
    denom = cc - 2 * b + a
    if denom != 0 and abs(cc - b) < abs(b - a):
        est = cc - (cc - b) ** 2 / denom
    else:
        est = cc
    err = abs(est - cc) + abs(cc - b)
    return float(est), float(err)


def find_lambda_star(branch):
    """(lambda*, error bar).

    Fold case: the refined maximum of lam, with the error bar from a
    quadratic fit of lam(s) through the 5 points around the fold (distance
    between the fit maximum and the refined value, plus the fit residual).
    Asymptote case, used when the extremal solution is expected to be
    singular or the branch reached the ceiling without folding: limit of lam
    along the resolved tail; ``branch.flags['singular']`` is set.
    """
    nl = branch.spec.nonlinearity
    N = branch.spec.N
    if singular_regime(nl, N) or (branch.fold_index is None and
                                  branch.termination in ("ceiling",)):
        est, err = _asymptote(branch)
        branch.flags["singular"] = True
        branch.flags["lambda_star_method"] = "asymptote"
        return est, err
    if branch.fold_index is None:
        raise ExtremalBranchError("branch ended before a fold or asymptote was detected")
    k = branch.fold_index
    pts = branch.points
    lo = max(0, k - 2)
    hi = min(len(pts), lo + 5)
    lo = max(0, hi - 5)
    s = np.array([p.s for p in pts[lo:hi]])
    lam = np.array([p.lam for p in pts[lo:hi]])
    lam_star = pts[k].lam
    err = 0.0
    if len(s) >= 3:
        coef = np.polyfit(s - s.mean(), lam, 2)
        fit = np.polyval(coef, s - s.mean())
        resid = float(np.max(np.abs(fit - lam)))
        if coef[0] < 0:
            peak = coef[2] - coef[1] ** 2 / (4 * coef[0])
            err = abs(peak - lam_star) + resid
        else:
            err = resid
    branch.flags["singular"] = False
    branch.flags["lambda_star_method"] = "fold"
    return float(lam_star), float(err)


# ---------------------------------------------------------------- extraction

def _branch_solutions_available(branch):
    return all(p.solution is not None for p in branch.points)


def _seed_by_u0_continuation(ctx, target_u0, steps=40):
    """Walk pole-value parameterized solves from u0 = 0 to target_u0."""
    nl = ctx.nl
    u = np.zeros(ctx.M + 1)
    lam = 0.0
    prev = None
    for c in np.linspace(0.0, chi(nl, target_u0), steps + 1)[1:]:
        u0 = chi_inverse(nl, c)
        guess_u, guess_lam = u, lam
        if prev is not None:
            pu, plam = prev
            guess_u = np.maximum(2 * u - pu, 0.0)
            guess_lam = max(2 * lam - plam, 0.0)
        guess_u = guess_u.copy()
        guess_u[0] = u0
        prev = (u, lam)
        u, lam = solve_at_u0(ctx, u0, _cap(ctx, guess_u), guess_lam)
    return u, lam


def _segment_indices(branch, segment):
    n = len(branch.points)
    if branch.fold_index is None:
        if segment == "second":
            raise ExtremalBranchError("branch has no fold, so no second segment")
        return list(range(n))
    k = branch.fold_index
    if segment == "minimal":
        return list(range(0, k + 1))
    if segment == "second":
        if k + 1 >= n:
            raise ExtremalBranchError("branch stops at the fold; second segment missing")
        return list(range(k, n))
    raise ParameterError(f"unknown segment {segment!r}")


def solution_at(branch, lam, segment="minimal", tol=DEFAULT_TOL):
    """Solution with parameter lam on the minimal or second segment.

    The bracketing pair of branch points is located, lam(u0) is solved for
    lam by Brent's method on pole-value parameterized solves, and the result
    is polished by Newton at fixed lam. The returned Solution carries mu1.
    """
    spec, grid = branch.spec, branch.grid
    if branch.lambda_star is not None and branch.fold_index is not None and \
            lam > branch.points[branch.fold_index].lam:
        raise ExtremalBranchError(f"lambda={lam} exceeds the fold value")
    if lam < 0:
        raise ParameterError("lambda must be >= 0")
    idx = _segment_indices(branch, segment)
    pts = [branch.points[i] for i in idx]
    lams = np.array([p.lam for p in pts])
    bracket = None
    for j in range(len(pts) - 1):
        a, b = lams[j], lams[j + 1]
        if min(a, b) <= lam <= max(a, b):
            bracket = j
            break
    if bracket is None:
        raise ExtremalBranchError(f"lambda={lam} not reached on the {segment} segment")
    pa, pb = pts[bracket], pts[bracket + 1]
    ctx = _Context(spec, grid, tol)

    if pa.solution is not None and pb.solution is not None:
        local = [pa, pb]
    else:
        local = None
    if lam == pa.lam and pa.solution is not None:
        u_star = pa.solution.u
    elif lam == pb.lam and pb.solution is not None:
        u_star = pb.solution.u
    else:
        cache = {}
        if local is None:
            ua, la = _seed_by_u0_continuation(ctx, pa.u0)
            ub, lb = solve_at_u0(ctx, pb.u0, ua, la)
            local = [BranchPoint(pa.s, la, pa.u0, float(ua.max()), pa.mu1, pa.stable,
                                 Solution(la, ua, 0.0, grid, spec)),
                     BranchPoint(pb.s, lb, pb.u0, float(ub.max()), pb.mu1, pb.stable,
                                 Solution(lb, ub, 0.0, grid, spec))]

        def g(u0):
            ui, li = _interp_state(local, u0)
            u, l_ = solve_at_u0(ctx, u0, ui, li)
            cache[u0] = u
            return l_ - lam

        ga = local[0].lam - lam
        gb = local[1].lam - lam
        if ga == 0:
            u_star = local[0].solution.u
        elif gb == 0:
            u_star = local[1].solution.u
        else:
            u0s = brentq(g, local[0].u0, local[1].u0, xtol=1e-13, rtol=1e-13)
            u_star = cache.get(u0s)
            if u_star is None:
                g(u0s)
                u_star = cache[u0s]
    sol = newton_solve(spec, grid, lam, u_init=u_star, tol=tol)
    eig = principal_eigenvalue(spec, grid, sol.u, lam)
    sol.mu1 = eig.mu
    sol.info["form_inf"] = eig.form_inf
    sol.info["segment"] = segment
    return sol


def extremal_profile(branch):
    """Solution at the refined fold (or at the end of the resolved tail in
    the singular regime), with mu1."""
    if branch.fold_index is not None:
        p = branch.points[branch.fold_index]
    elif branch.flags.get("singular"):
        idx = resolved_tail(branch)
        p = branch.points[idx[-1]]
    else:
        raise ExtremalBranchError("branch has no fold")
    if p.solution is None:
        raise ExtremalBranchError("branch point has no stored solution")
    sol = p.solution
    sol.mu1 = p.mu1
    return sol


# ---------------------------------------------------------------- sweeps

@dataclass
class SweepRow:
    N: int
    lambda_star: float
    sup_u_star: float
    classification: str
    error: str = None
    growth: tuple = ()


def _with_dimension(spec, N):
    from dataclasses import replace
    return replace(spec, model=replace(spec.model, dimension=int(N)))


def _fold_sup(spec, M, grading, ds, max_steps, u0_ceiling):
    grid = make_grid(spec.R, M, grading)
    br = trace_branch(spec, grid, ds=ds, max_steps=max_steps, u0_ceiling=u0_ceiling)
    lam_star, _ = find_lambda_star(br)
    sol = _discrete_extremal(br)
    return lam_star, sol.sup_u, br.fold_index is not None


def _discrete_extremal(branch):
    """Maximum-lambda point of the resolved part of the branch (the refined
    fold when present)."""
    if branch.fold_index is not None:
        return branch.points[branch.fold_index].solution
    idx = resolved_tail(branch)
    k = idx[int(np.argmax(branch.lambdas()[idx]))]
    return branch.points[k].solution


def classify(spec, M, grading="uniform", ds=None, max_steps=2000, u0_ceiling=None):
    """Regular/singular from the growth of f(sup u*) over M/4, M/2, M.

    sup u* is the pole value at the discrete extremal point (the maximum
    of lam on the resolved branch). 'singular' iff f(sup u*) grows by more
    than 20% at each grid doubling, or no grid shows a fold: then lam is
    still increasing where the branch stops (the pole value ceiling or the
    grid resolution), and sup u* only measures that stopping point.
    Returns (classification, lambda*, sup u*, growth factors) using the
    finest grid for the reported values.
    """
    nl = spec.nonlinearity
    sups = []
    folds = []
    lam_star = None
    for MM in (M // 4, M // 2, M):
        lam_star, sup, folded = _fold_sup(spec, MM, grading, ds, max_steps, u0_ceiling)
        sups.append(sup)
        folds.append(folded)
    fs = [float(nl.f(x)) for x in sups]
    growth = tuple(fs[i + 1] / fs[i] - 1.0 for i in range(2))
    singular = all(g > 0.2 for g in growth) or not any(folds)
    return ("singular" if singular else "regular"), lam_star, sups[-1], growth


def _sweep_row(args):
    spec, N, M, grading, ds, max_steps, u0_ceiling = args
    try:
        s = _with_dimension(spec, N)
        cls, lam_star, sup, growth = classify(s, M, grading, ds, max_steps, u0_ceiling)
        return SweepRow(int(N), lam_star, sup, cls, None, growth)
    except ExtremalBranchError as exc:
        return SweepRow(int(N), math.nan, math.nan, "error", str(exc))


def dimension_sweep(spec, N_list, M=1024, grading="uniform", ds=None, max_steps=2000,
                    u0_ceiling=None, jobs=1):
    """One classification row per dimension; failures are recorded per row."""
    tasks = [(spec, int(N), M, grading, ds, max_steps, u0_ceiling) for N in N_list]
    if jobs and jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_row, tasks))
    return [_sweep_row(t) for t in tasks]


# ---------------------------------------------------------------- export

BRANCH_HEADER = ("s", "lambda", "u0", "sup_u", "mu1", "stable")


def fmt(x):
    """17 significant digits, enough to round-trip a double."""
    return format(float(x), ".17g")


def write_branch_csv(branch, path, points_dir=None):
    """Branch table with header s,lambda,u0,sup_u,mu1,stable; with
    points_dir, every point's profile goes to point_<k>.csv (r,u)."""
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(BRANCH_HEADER)
        for p in branch.points:
            out.writerow([fmt(p.s), fmt(p.lam), fmt(p.u0), fmt(p.sup_u), fmt(p.mu1),
                          "true" if p.stable else "false"])
    if points_dir is not None:
        for k, p in enumerate(branch.points):
            if p.solution is not None:
                write_profile_csv(f"{points_dir}/point_{k}.csv", branch.grid.nodes, p.solution.u)


def write_profile_csv(path, r, u):
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(("r", "u"))
        for ri, ui in zip(r, u):
            out.writerow([fmt(ri), fmt(ui)])


def _read_table(path, header):
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if not rows or tuple(c.strip() for c in rows[0]) != tuple(header):
        raise ConfigError(f"{path}: expected header {','.join(header)}")
    body = [r for r in rows[1:] if r]
    if not body:
        raise ConfigError(f"{path}: no data rows")
    return body


def read_branch_csv(path, spec, grid):
    """Branch without stored solutions from a branch table.

    The fold is the first interior maximum of lambda. Solutions are
    recomputed on demand by ``solution_at``.
    """
    pts = []
    for row in _read_table(path, BRANCH_HEADER):
        try:
            if len(row) != len(BRANCH_HEADER) or row[5] not in ("true", "false"):
                raise ValueError
            vals = [float(x) for x in row[:5]]
        except ValueError as exc:
            raise ConfigError(f"{path}: malformed row {row!r}") from exc
        if not all(math.isfinite(v) for v in vals):
            raise ConfigError(f"{path}: non-finite value in row {row!r}")
        pts.append(BranchPoint(*vals, row[5] == "true"))
    lams = [p.lam for p in pts]
    fold = None
    for k in range(1, len(pts) - 1):
        if lams[k] >= lams[k - 1] and lams[k + 1] < lams[k]:
            fold = k
            break
    branch = Branch(pts, spec, grid, "loaded", fold_index=fold)
    if fold is not None:
        branch.lambda_star = lams[fold]
    return branch


def read_profile_csv(path, grid):
    """Nodal values u from an r,u table matching the grid nodes."""
    body = _read_table(path, ("r", "u"))
    try:
        arr = np.array([[float(a), float(b)] for a, b in body])
    except ValueError as exc:
        raise ConfigError(f"{path}: malformed profile") from exc
    if arr.shape[0] != grid.M + 1 or not np.all(np.isfinite(arr)):
        raise ConfigError(f"{path}: expected {grid.M + 1} finite rows")
    if np.max(np.abs(arr[:, 0] - grid.nodes)) > 1e-12 * grid.R:
        raise ConfigError(f"{path}: radii do not match the grid")
    return arr[:, 1]
