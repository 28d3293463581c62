"""Numerical checks of the closed-form a priori estimates on semi-stable
solutions, and the energy functional of the truncated problem.

All integrals use the radial measure dr with weight w = e^a psi^(N-1);
suprema of the weight are taken over the grid nodes. The right-hand sides
are the constants that the testing-function arguments actually deliver
(Hoelder step with the sup of the weight, then solving for the norm). The
printed variants of the same constants are kept in ``params`` as
``rhs_printed`` for comparison; they differ by the exponent applied to the
Hoelder constant and, for the pointwise bounds, by the factor lam.

Every check is report-only: a report is returned whether or not the
inequality holds.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline

from .continuation import extremal_profile, find_lambda_star
from .errors import ExtremalBranchError, ParameterError
from .model import DEFAULT_CAP, _G, _check_trunc_params
from .odecore import _cell_integral, geometry, weighted_lp_norm
from .spectrum import TOL_EIG_REL, first_eigenvalue, lambda_star_bounds, principal_eigenvalue

log = logging.getLogger(__name__)

LEMMA_IDS = ("L03", "L18", "L39", "L45", "L26", "L58", "L17", "L05", "T06", "T22ii")
REL_SLACK = 1e-9
DECAY_RADII = 10
MEMS_T_MAX = 2.0 + math.sqrt(6.0)
# report-only checks whose outcome does not decide a verification run
INFORMATIVE_ONLY = ("T06",)


@dataclass
class EstimateReport:
    lemma_id: str
    params: dict
    lhs: float
    rhs: float
    lam: float = None
    mu1: float = None
    margin: float = field(init=False)
    satisfied: bool = field(init=False)

    def __post_init__(self):
        if self.lemma_id not in LEMMA_IDS:
            raise ParameterError(f"unknown lemma id {self.lemma_id!r}")
        self.lhs = float(self.lhs)
        self.rhs = float(self.rhs)
        self.margin = self.rhs - self.lhs
        self.satisfied = bool(self.margin >= -REL_SLACK * abs(self.rhs))

    def to_dict(self):
        return {"lemma_id": self.lemma_id, "params": dict(self.params), "lhs": self.lhs,
                "rhs": self.rhs, "margin": self.margin, "satisfied": self.satisfied,
                "lambda": self.lam, "mu1": self.mu1}


# ---------------------------------------------------------------- helpers

@lru_cache(maxsize=32)
def _lambda1(spec, grid):
    return first_eigenvalue(spec, grid)


def _mu1(sol):
    if sol.mu1 is None:
        sol.mu1 = principal_eigenvalue(sol.spec, sol.grid, sol.u, sol.lam).mu
    return float(sol.mu1)


def _meta(sol):
    mu = _mu1(sol)
    semi = mu >= -TOL_EIG_REL * _lambda1(sol.spec, sol.grid)
    return mu, semi


def _require(sol, kind):
    if sol.spec.nonlinearity.kind != kind:
        raise ParameterError(f"check applies to {kind}, not {sol.spec.nonlinearity.kind}")


def _weights(sol):
    g = geometry(sol.spec, sol.grid)
    wnode = np.asarray(g.wnode)
    # int_0^R w dr: the cell weights stop at the last face, add the half cell at R
    tail = _cell_integral(sol.spec.w, g.faces[-1:], sol.grid.nodes[-1:])
    total = float(np.sum(g.W) + tail[0])
    return wnode, float(np.max(wnode)), total


def _volume_weights(sol):
    """e^a and psi^(N-1) separately at the nodes, for the volume-measure variant."""
    r = sol.grid.nodes
    ea = np.exp(sol.spec.a(r))
    vol = sol.spec.w(r) / ea
    return ea, vol


def _interpolant(sol):
    """C^1 interpolant of u with u'(0) = 0; its slopes satisfy the mean
    value property exactly between any two radii."""
    return CubicSpline(sol.grid.nodes, sol.u, bc_type=((1, 0.0), "not-a-knot"))


def _mean_value_points(spline, R, rho, sub=4):
    """For each rho > 0, the first c in (0, rho] with -u'(c) rho = u(0) - u(rho).

    -u' is sampled on a refinement of the interpolation nodes; the first
    crossing of its running maximum locates the first root, which is then
    placed by linear interpolation. When u(0) <= u(rho) no such point
    exists and rho itself is returned.
    """
    knots = spline.x
    fine = np.concatenate([np.linspace(knots[i], knots[i + 1], sub, endpoint=False)
                           for i in range(len(knots) - 1)] + [knots[-1:]])
    g = -spline(fine, 1)
    run = np.maximum.accumulate(g)
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    slope = (spline(0.0) - spline(rho)) / rho
    out = rho.copy()
    idx = np.searchsorted(run, slope, side="left")
    for k, (j, s) in enumerate(zip(idx, slope)):
        if s <= 0 or j >= len(fine):
            continue
        if j == 0:
            c = fine[0]
        else:
            g0, g1 = g[j - 1], g[j]
            frac = 0.0 if g1 == g0 else (s - g0) / (g1 - g0)
            c = fine[j - 1] + min(max(frac, 0.0), 1.0) * (fine[j] - fine[j - 1])
        out[k] = min(c, rho[k])
    return out


def _w_at(spec, c):
    return np.asarray(spec.w(np.asarray(c, dtype=float)), dtype=float)


def _c3_proven(spec, c, total, p):
    """(int_0^R w)^(1 - 1/p) / w(c)."""
    with np.errstate(divide="ignore"):
        return total ** ((p - 1.0) / p) / _w_at(spec, c)


def _c3_printed(spec, grid, c, p):
    """e^(-a(c)) psi(c)^(1-N) [int_0^R e^(a(1-1/p)) psi^((N-1)(1-1/p)) dr]^(p/(p-1))."""
    if p == 1:
        return np.full(np.shape(c), math.nan)
    g = geometry(spec, grid)
    integral = _trapz(grid.nodes, np.asarray(g.wnode) ** (1.0 - 1.0 / p))
    with np.errstate(divide="ignore"):
        return integral ** (p / (p - 1.0)) / _w_at(spec, c)


def _trapz(x, y):
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))


def _clean(x):
    x = float(x)
    return x if math.isfinite(x) else None


# ---------------------------------------------------------------- L^p bounds

def _mems_K(t):
    return 4.0 * (2 * t + 1) / (2 + 4 * t - t * t)


def mems_lp_bound(sol, t):
    """Weighted L^(t+3/2) bound on (1-u)^-2 for mems, 0 < t < 2 + sqrt 6.

    lhs = (int w (1-u)^(-2t-3) dr)^(2/(2t+3)),
    rhs = K^(2/t) C2^(2/t) R^(2/(2t+3)), K = 4(2t+1)/(2+4t-t^2),
    C2 = (sup w)^(t/(2t+3)).
    The volume-measure variant (weight e^a against psi^(N-1) dr, domain size
    int psi^(N-1) dr) is reported under ``params['global']``.
    """
    _require(sol, "mems")
    if not 0 < t < MEMS_T_MAX:
        raise ParameterError("t must lie in (0, 2 + sqrt 6)")
    mu, semi = _meta(sol)
    R = sol.spec.R
    p = t + 1.5
    K = _mems_K(t)
    wnode, wmax, _ = _weights(sol)
    q = (1.0 - sol.u) ** -2
    lhs = weighted_lp_norm(sol.grid, wnode, q, p)
    C2 = wmax ** (t / (2 * t + 3))
    rhs = K ** (2 / t) * C2 ** (2 / t) * R ** (2 / (2 * t + 3))

    ea, vol = _volume_weights(sol)
    omega = _trapz(sol.grid.nodes, vol)
    C1 = float(np.max(ea)) ** (t / (2 * t + 3))
    glob = {"lemma_id": "L03", "lhs": lhs,
            "rhs": K ** (2 / t) * C1 ** (2 / t) * omega ** (2 / (2 * t + 3)),
            "rhs_printed": K ** (2 / t) * C1 * omega ** (2 / (2 * t + 3))}
    params = {"t": t, "p": p, "K": K, "C2": C2, "semi_stable": semi,
              "rhs_printed": K ** (2 / t) * C2 * R ** (2 / (2 * t + 3)), "global": glob}
    return EstimateReport("L18", params, lhs, rhs, sol.lam, mu)


def gelfand_lp_bound(sol, t):
    """Weighted L^(2t+1) bound on e^u for gelfand, 0 < t < 2.

    lhs = (int w e^((2t+1)u) dr)^(1/(2t+1)),
    rhs = (4/(2-t))^(1/t) C^(1/t) R^(1/(2t+1)), C = (sup w)^(t/(2t+1)).
    """
    _require(sol, "gelfand")
    if not 0 < t < 2:
        raise ParameterError("t must lie in (0, 2)")
    mu, semi = _meta(sol)
    R = sol.spec.R
    p = 2 * t + 1
    wnode, wmax, _ = _weights(sol)
    lhs = weighted_lp_norm(sol.grid, wnode, np.exp(sol.u), p)
    C = wmax ** (t / p)
    factor = 4.0 / (2.0 - t)
    rhs = factor ** (1 / t) * C ** (1 / t) * R ** (1 / p)

    ea, vol = _volume_weights(sol)
    omega = _trapz(sol.grid.nodes, vol)
    C1 = float(np.max(ea)) ** (t / p)
    glob = {"lemma_id": "L39", "lhs": lhs,
            "rhs": factor ** (1 / t) * C1 ** (1 / t) * omega ** (1 / p),
            "rhs_printed": (2 * t / (2 * t - t * t)) ** (1 / t) * C1 * omega ** (1 / p)}
    params = {"t": t, "p": p, "C1": C, "semi_stable": semi,
              "rhs_printed": (2 * t / (2 * t - t * t)) ** (1 / t) * C * R ** (1 / p),
              "global": glob}
    return EstimateReport("L39", params, lhs, rhs, sol.lam, mu)


def _power_range(m, b):
    root = math.sqrt(m * (m - 1))
    return (m - root) / b, (m + root) / b


def _power_kappa(m, t, b):
    lo, hi = _power_range(m, b)
    if not (b > 0 and lo < t < hi):
        raise ParameterError(f"t must lie in ({lo}, {hi}) for m={m}, b={b}")
    if not 2 * b * t > 1:
        raise ParameterError("2 b t must exceed 1")
    kappa = 1.0 - (b * t) ** 2 / (m * (2 * b * t - 1))
    if not kappa > 0:
        raise ParameterError("t at the end of the admissible range")
    return kappa


def power_lp_bound(sol, t, b=1.0):
    """Weighted L^(q/m) bound on (1+u)^m for power, q = 2bt + m - 1.

    lhs = (int w (1+u)^q dr)^(m/q),
    rhs = (2C/kappa)^(m/(bt)) R^(m/q), kappa = 1 - b^2 t^2 / (m (2bt - 1)),
    C = (sup w)^(bt/q).
    """
    _require(sol, "power")
    if not b > 0:
        raise ParameterError("b must be positive")
    m = sol.spec.nonlinearity.m
    kappa = _power_kappa(m, t, b)
    mu, semi = _meta(sol)
    R = sol.spec.R
    q = 2 * b * t + m - 1
    wnode, wmax, _ = _weights(sol)
    lhs = weighted_lp_norm(sol.grid, wnode, (1.0 + sol.u) ** m, q / m)
    C = wmax ** (b * t / q)
    rhs = (2 * C / kappa) ** (m / (b * t)) * R ** (m / q)

    ea, vol = _volume_weights(sol)
    omega = _trapz(sol.grid.nodes, vol)
    Cg = float(np.max(ea)) ** (b * t / q)
    C1_printed = 2.0 * wmax ** (t * t / ((t + 1) * (2 * t + 1)))
    glob = {"lemma_id": "L26", "lhs": lhs,
            "rhs": (2 * Cg / kappa) ** (m / (b * t)) * omega ** (m / q)}
    params = {"t": t, "b": b, "m": m, "p": q / m, "kappa": kappa, "C": C,
              "semi_stable": semi,
              "rhs_printed": kappa ** (-1 / (t * b)) * C1_printed * R ** (1 / ((2 * t + 1) * b)),
              "global": glob}
    return EstimateReport("L26", params, lhs, rhs, sol.lam, mu)


def lp_bound(sol, t, b=1.0):
    """Dispatch to the L^p bound of the solution's nonlinearity."""
    kind = sol.spec.nonlinearity.kind
    if kind == "mems":
        return mems_lp_bound(sol, t)
    if kind == "gelfand":
        return gelfand_lp_bound(sol, t)
    return power_lp_bound(sol, t, b)


def t_in_range(kind, t, m=2.0, b=1.0):
    if kind == "mems":
        return 0 < t < MEMS_T_MAX
    if kind == "gelfand":
        return 0 < t < 2
    try:
        _power_kappa(m, t, b)
    except ParameterError:
        return False
    return True


# ---------------------------------------------------------------- pointwise bounds

_DECAY_ID = {"mems": "L17", "gelfand": "L45", "power": "L58"}


def pointwise_decay_check(sol, p):
    """u(0) >= u(r) >= u(0) - r lam C3(c) ||w^(1/p) f(u)||_p at 10 radii.

    c is the mean value point of u on (0, r) and
    C3(c) = (int_0^R w dr)^(1 - 1/p) / w(c). The report carries the pair
    (lhs, rhs) with the smallest relative margin: either the drop
    u(0) - u(r) against its bound, or u(r) against u(0).
    """
    if not p >= 1:
        raise ParameterError("p must be >= 1")
    spec, grid = sol.spec, sol.grid
    nl = spec.nonlinearity
    if nl.kind == "power":
        log.debug("pointwise bound for power uses the Hoelder constant with exponent "
                  "1 - 1/p; the printed variant is kept as c3_printed")
    mu, semi = _meta(sol)
    R = spec.R
    wnode, _, total = _weights(sol)
    norm = weighted_lp_norm(grid, wnode, nl.f(sol.u), p)
    spline = _interpolant(sol)
    radii = R * np.arange(1, DECAY_RADII + 1) / DECAY_RADII
    c = _mean_value_points(spline, R, radii)
    c3 = _c3_proven(spec, c, total, p)
    c3p = _c3_printed(spec, grid, c, p)
    u0 = float(sol.u[0])
    ur = spline(radii)
    drop = u0 - ur
    allowed = radii * sol.lam * c3 * norm
    worst = None
    for k in range(DECAY_RADII):
        for lhs, rhs, side in ((drop[k], allowed[k], "lower"), (ur[k], u0, "upper")):
            rel = (rhs - lhs) / max(abs(rhs), 1e-300)
            if worst is None or rel < worst[0]:
                worst = (rel, lhs, rhs, side, k)
    _, lhs, rhs, side, k = worst
    params = {"p": p, "side": side, "r": float(radii[k]), "c": float(c[k]),
              "C3": _clean(c3[k]), "c3_printed": _clean(c3p[k]), "norm": norm,
              "radii": [float(x) for x in radii], "mean_value_points": [float(x) for x in c],
              "semi_stable": semi,
              "rhs_printed": _clean(u0 - radii[k] * c3p[k] * norm) if side == "lower" else u0}
    return EstimateReport(_DECAY_ID[nl.kind], params, lhs, rhs, sol.lam, mu)


def d2_density_check(sol, t):
    """int_0^R w / D2^(2t+3) dr against K^((2t+3)/t) C2^((2t+3)/t) R (mems).

    D2(r) = 1 - u(0) + r lam C3(c(r)) K^(2/t) C2^(2/t) R^(1/p), p = t + 3/2,
    is an upper bound for 1 - u(r) built from the pointwise decay and the
    L^p bound, so the integral is dominated by int w (1-u)^(-2t-3).
    """
    _require(sol, "mems")
    if not 0 < t < MEMS_T_MAX:
        raise ParameterError("t must lie in (0, 2 + sqrt 6)")
    spec, grid = sol.spec, sol.grid
    mu, semi = _meta(sol)
    R = spec.R
    p = t + 1.5
    K = _mems_K(t)
    wnode, wmax, total = _weights(sol)
    C2 = wmax ** (t / (2 * t + 3))
    r = grid.nodes
    spline = _interpolant(sol)
    c = np.zeros_like(r)
    c[1:] = _mean_value_points(spline, R, r[1:])
    c3 = np.zeros_like(r)
    with np.errstate(divide="ignore", invalid="ignore"):
        c3[1:] = _c3_proven(spec, c[1:], total, p)
    slope = sol.lam * K ** (2 / t) * C2 ** (2 / t) * R ** (1 / p)
    with np.errstate(invalid="ignore"):
        D2 = 1.0 - sol.u[0] + np.where(r > 0, r * c3 * slope, 0.0)
    with np.errstate(divide="ignore"):
        integrand = np.where(np.isfinite(D2), wnode / D2 ** (2 * t + 3), 0.0)
    lhs = _trapz(r, integrand)
    rhs = (K * C2) ** ((2 * t + 3) / t) * R
    params = {"t": t, "p": p, "K": K, "C2": C2, "D2_at_R": _clean(D2[-1]),
              "semi_stable": semi, "rhs_printed": K ** ((2 * t + 3) / t)}
    return EstimateReport("L05", params, lhs, rhs, sol.lam, mu)


# ---------------------------------------------------------------- L-infinity bound

def linfty_bound(branch, t, b=1.0):
    """Closed-form bound on sup u* evaluated from the printed formulas.

    The radial constants enter in their printed form, with sup w in place
    of sup e^a; C3 is taken at the mean value point of u* on (0, R). The
    bound is informative when it is finite and, for mems, when the
    subtracted constant C is positive (the bound is then below 1).
    """
    if branch.fold_index is None or branch.flags.get("singular"):
        raise ParameterError("the bound needs a branch with a regular fold")
    spec, grid = branch.spec, branch.grid
    nl = spec.nonlinearity
    if spec.N >= nl.Nstar:
        raise ParameterError("dimension at or above the critical dimension")
    sol = extremal_profile(branch)
    R = spec.R
    wnode, wmax, total = _weights(sol)
    cR = float(_mean_value_points(_interpolant(sol), R, [R])[0])
    params = {"t": t, "c": cR}
    if nl.kind == "mems":
        if not 0 < t < MEMS_T_MAX:
            raise ParameterError("t must lie in (0, 2 + sqrt 6)")
        p = t + 1.5
        K = _mems_K(t)
        C1 = wmax ** (t / (2 * t + 3))
        C3 = float(_c3_printed(spec, grid, cR, p))
        C4 = C1 * C3
        C = (total ** (1 / (2 * t + 3)) * K ** (-1 / t) * R ** (1 / p ** 2)
             - C4 * K ** (2 / t) * R ** (1 + 1 / p))
        bound = 1.0 - C
        informative = math.isfinite(C) and C > 0
        params.update(p=p, C=_clean(C), C1=C1, C3=_clean(C3))
    elif nl.kind == "gelfand":
        if not 0 < t < 2:
            raise ParameterError("t must lie in (0, 2)")
        p = 2 * t + 1
        C1 = wmax ** (t / (2 * t + 1))
        C3 = float(_c3_printed(spec, grid, cR, p))
        C4 = C1 * C3
        ratio = 2 * t / (2 * t - t * t)
        bound = (math.log(C1 * R ** (1 / p) * ratio ** ((2 * t + 1) / t)) / (2 * t + 1)
                 + C4 * (4 * ratio) ** (1 / t) * R ** (1 + 1 / p))
        informative = math.isfinite(bound)
        params.update(p=p, C1=C1, C3=_clean(C3))
    else:
        m = nl.m
        kappa = _power_kappa(m, t, b)
        p = (2 * b * t + m - 1) / m
        C1 = 2.0 * wmax ** (t * t / ((t + 1) * (2 * t + 1)))
        C3 = float(_c3_printed(spec, grid, cR, p))
        e = 1.0 / (2 * b * t + b)
        bound_m = (2 ** m * C1 * C3 * kappa ** (-1 / (t * b)) * R ** e
                   + 2 ** m * (C1 * C3) ** m / (m + 1) * kappa ** (-m / (t * b))
                   * R ** (m * e + m + 1))
        bound = bound_m ** (1 / m)
        informative = math.isfinite(bound)
        params.update(p=p, b=b, kappa=kappa, C1=C1, C3=_clean(C3))
    params["informative"] = bool(informative)
    params["bound"] = _clean(bound)
    rhs = bound if math.isfinite(bound) else math.inf
    return EstimateReport("T06", params, sol.sup_u, rhs, sol.lam, _mu1(sol))


# ---------------------------------------------------------------- bounds sandwich

def bounds_reports(branch):
    """Two reports: lower <= lambda* and lambda* <= lambda_1."""
    lower, upper = lambda_star_bounds(branch.spec, branch.grid)
    lam_star = branch.lambda_star
    if lam_star is None:
        lam_star, _ = find_lambda_star(branch)
    return [EstimateReport("T22ii", {"side": "lower"}, lower, lam_star),
            EstimateReport("T22ii", {"side": "upper"}, lam_star, upper)]


# ---------------------------------------------------------------- energy

def energy(spec, grid, u, eps, p, lam, cap=DEFAULT_CAP):
    """Discrete energy of the truncated problem,

        J = 1/2 sum_faces w_face (u_{i+1} - u_i)^2 / h_i - lam sum_i W_i G_eps(u_i).

    The weight is w = e^a psi^(N-1) with the stored a; the energy weight
    e^(-a') of the gradient-field form A = grad a' is the same function
    because a' = -a. Its gradient in u_0..u_{M-1} is the discrete residual
    A u - lam W g_eps(u), so critical points are exactly the discrete
    solutions below the truncation level. G_eps is integrated in closed
    form from the left end of the domain of f.
    """
    if spec.advection.has_C:
        raise ParameterError("energy is defined for gradient advection only (C must vanish)")
    nl = spec.nonlinearity
    _check_trunc_params(nl, eps, p, cap)
    u = np.asarray(u, dtype=float)
    if u.shape != (grid.M + 1,):
        raise ParameterError("u must have one entry per node")
    g = geometry(spec, grid)
    du = np.diff(u)
    kinetic = 0.5 * float(np.sum(g.wface * du * du / grid.h))
    potential = float(np.sum(g.W[:-1] * _G(nl, u[:-1], eps, p, cap)))
    return kinetic - lam * potential


# ---------------------------------------------------------------- batch driver

def _point_reports(args):
    sol, t_samples, p_samples, b = args
    kind = sol.spec.nonlinearity.kind
    m = sol.spec.nonlinearity.m
    out = []
    for t in t_samples:
        if not t_in_range(kind, t, m, b):
            continue
        out.append(lp_bound(sol, t, b))
        if kind == "mems":
            out.append(d2_density_check(sol, t))
    for p in p_samples:
        if p >= 1:
            out.append(pointwise_decay_check(sol, p))
    return out


def semi_stable_points(branch):
    """Branch points with lam > 0, a stored solution and mu1 >= -tol_eig."""
    tol = branch.tol_eig
    if tol is None:
        tol = TOL_EIG_REL * _lambda1(branch.spec, branch.grid)
    pts = []
    for pt in branch.points:
        if pt.lam > 0 and pt.solution is not None and pt.mu1 >= -tol:
            pts.append(pt)
    return pts


def verify_all(branch, t_samples, p_samples=(), b=1.0, jobs=1):
    """Run every applicable check at every semi-stable branch point.

    Per point and per admissible t: the L^p bound of the nonlinearity (and
    the D2 density check for mems); per p >= 1: the pointwise decay check.
    Once per branch: the L-infinity bound for each admissible t when the
    branch has a regular fold, and the two-sided lambda* bounds. Empty
    sample lists give an empty list.
    """
    t_samples = list(t_samples)
    p_samples = list(p_samples)
    if not t_samples and not p_samples:
        return []
    if not branch.points:
        raise ParameterError("branch has no points")
    pts = semi_stable_points(branch)
    tasks = []
    for pt in pts:
        sol = pt.solution
        sol.mu1 = pt.mu1
        tasks.append((sol, t_samples, p_samples, b))
    if jobs and jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_point_reports, tasks))
    else:
        chunks = [_point_reports(task) for task in tasks]
    reports = [r for chunk in chunks for r in chunk]

    nl = branch.spec.nonlinearity
    if branch.fold_index is not None and not branch.flags.get("singular") \
            and branch.spec.N < nl.Nstar:
        for t in t_samples:
            if t_in_range(nl.kind, t, nl.m, b):
                try:
                    reports.append(linfty_bound(branch, t, b))
                except (ExtremalBranchError, ValueError, OverflowError) as exc:
                    log.info("L-infinity bound skipped at t=%s: %s", t, exc)
    if branch.lambda_star is not None or branch.fold_index is not None:
        reports.extend(bounds_reports(branch))
    return reports


def decisive(reports):
    """Reports that decide a verification run (all but the informative ones)."""
    return [r for r in reports if r.lemma_id not in INFORMATIVE_ONLY]
