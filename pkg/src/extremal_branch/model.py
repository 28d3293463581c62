"""Geometry, nonlinearity and advection data of the radial problem

    -(w u')' + w C u' = lam w f(u)  on (0, R),   u'(0) = u(R) = 0,

with weight w(r) = exp(a(r)) psi(r)^(N-1). The advection is stored as
A = -a' + C.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ParameterError
from .expr import Antiderivative, Expr, Zero, parse_field

GEOMETRIES = ("euclidean", "hyperbolic", "spherical", "custom")
NONLINEARITIES = ("gelfand", "power", "mems")
_NSTAR = {"gelfand": 10, "power": 11, "mems": 8}

# default cap replacing s0 = inf when the truncated nonlinearity is needed
DEFAULT_CAP = 50.0


@dataclass(frozen=True)
class RiemannianModel:
    """Geodesic ball of radius R around the pole of dr^2 + psi(r)^2 dtheta^2."""

    kind: str
    dimension: int
    radius: float
    psi_expr: object = None

    def __post_init__(self):
        if self.kind not in GEOMETRIES:
            raise ParameterError(f"unknown geometry {self.kind!r}")
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise ParameterError("dimension must be an integer >= 1")
        object.__setattr__(self, "dimension", int(self.dimension))
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ParameterError("radius must be positive")
        if self.kind == "spherical" and self.radius >= math.pi:
            raise ParameterError("spherical geodesic ball needs R < pi")
        if self.kind == "custom":
            if self.psi_expr is None:
                raise ParameterError("custom geometry needs a psi expression")
            if isinstance(self.psi_expr, str):
                object.__setattr__(self, "psi_expr", Expr(self.psi_expr))
            r = np.linspace(0.0, self.radius, 257)[1:]
            if not np.all(self.psi(r) > 0):
                raise ParameterError("psi must be positive on (0, R]")
            if self.dimension >= 2:
                eps = 1e-6 * self.radius
                if abs(float(self.psi(eps)) / eps - 1) > 1e-3 or \
                        abs(float(self.psi_prime(eps)) - 1) > 1e-3:
                    raise ParameterError("psi must satisfy psi(r)/r -> 1, psi'(r) -> 1 at the pole")

    def psi(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "euclidean":
            return r.copy()
        if self.kind == "hyperbolic":
            return np.sinh(r)
        if self.kind == "spherical":
            return np.sin(r)
        return self.psi_expr(r)

    def psi_prime(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "euclidean":
            return np.ones_like(r)
        if self.kind == "hyperbolic":
            return np.cosh(r)
        if self.kind == "spherical":
            return np.cos(r)
        return self.psi_expr.derivative(r)


@dataclass(frozen=True)
class Nonlinearity:
    """f(s) = e^s (gelfand), (1+s)^m (power), (1-s)^-2 (mems)."""

    kind: str
    m: float = 2.0

    def __post_init__(self):
        if self.kind not in NONLINEARITIES:
            raise ParameterError(f"unknown nonlinearity {self.kind!r}")
        if self.kind == "power" and not self.m > 1:
            raise ParameterError("power exponent m must exceed 1")

    @property
    def s0(self):
        return 1.0 if self.kind == "mems" else math.inf

    @property
    def Nstar(self):
        return _NSTAR[self.kind]

    # Unchecked vectorized evaluations, also valid for s < 0 where defined.
    def f(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "gelfand":
            return np.exp(s)
        if self.kind == "power":
            return (1.0 + s) ** self.m
        return (1.0 - s) ** -2

    def fp(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "gelfand":
            return np.exp(s)
        if self.kind == "power":
            return self.m * (1.0 + s) ** (self.m - 1)
        return 2.0 * (1.0 - s) ** -3

    def fpp(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "gelfand":
            return np.exp(s)
        if self.kind == "power":
            return self.m * (self.m - 1) * (1.0 + s) ** (self.m - 2)
        return 6.0 * (1.0 - s) ** -4

    def F(self, s):
        """Antiderivative of f vanishing at the left end of its domain
        (-inf for gelfand and mems, -1 for power)."""
        s = np.asarray(s, dtype=float)
        if self.kind == "gelfand":
            return np.exp(s)
        if self.kind == "power":
            return (1.0 + s) ** (self.m + 1) / (self.m + 1)
        return 1.0 / (1.0 - s)


@dataclass(frozen=True)
class AdvectionField:
    """A = -a' + C, with a and C radial fields on [0, R]."""

    a: object = field(default_factory=Zero)
    C: object = field(default_factory=Zero)

    @property
    def representation(self):
        reps = {getattr(self.a, "representation", "closed-form expression"),
                getattr(self.C, "representation", "closed-form expression")}
        if "tabulated samples with interpolation" in reps:
            return "tabulated samples with interpolation"
        return "closed-form expression"

    @property
    def has_C(self):
        return not isinstance(self.C, Zero)


@dataclass(frozen=True)
class ProblemSpec:
    model: RiemannianModel
    nonlinearity: Nonlinearity
    advection: AdvectionField = field(default_factory=AdvectionField)

    def __post_init__(self):
        r = np.linspace(0.0, self.model.radius, 257)
        a = np.asarray(self.advection.a(r), dtype=float)
        C = np.asarray(self.advection.C(r), dtype=float)
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(C))):
            raise ParameterError("advection fields must be finite on [0, R]")

    @property
    def N(self):
        return self.model.dimension

    @property
    def R(self):
        return self.model.radius

    def w(self, r):
        """Vectorized weight exp(a) psi^(N-1)."""
        r = np.asarray(r, dtype=float)
        N = self.model.dimension
        base = np.exp(np.asarray(self.advection.a(r), dtype=float))
        if N == 1:
            return base + 0.0 * r
        return base * self.model.psi(r) ** (N - 1)

    def a(self, r):
        return np.asarray(self.advection.a(np.asarray(r, dtype=float)), dtype=float)

    def C(self, r):
        return np.asarray(self.advection.C(np.asarray(r, dtype=float)), dtype=float)


def make_spec(geometry="euclidean", N=2, R=1.0, kind="gelfand", m=2.0, a=None, C=None,
              psi=None):
    """Convenience constructor from plain values and expression strings."""
    return ProblemSpec(RiemannianModel(geometry, N, R, psi),
                       Nonlinearity(kind, m),
                       AdvectionField(parse_field(a), parse_field(C)))


def _check_domain(nl, s):
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise DomainError("nonlinearity argument must be >= 0")
    if np.any(s >= nl.s0):
        raise DomainError("nonlinearity blow-up level reached")
    return s


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def eval_f(nl, s):
    return _out(nl.f(_check_domain(nl, s)))


def eval_fp(nl, s):
    return _out(nl.fp(_check_domain(nl, s)))


def eval_fpp(nl, s):
    return _out(nl.fpp(_check_domain(nl, s)))


def _junction(nl, eps, cap):
    if nl.kind == "mems":
        return 1.0 - eps
    return cap - eps


def _tail_coeffs(nl, eps, p, cap):
    T = _junction(nl, eps, cap)
    fT = float(nl.f(T))
    beta = float(nl.fp(T)) / (p * T ** (p - 1))
    alpha = fT - beta * T ** p
    return T, alpha, beta


def _check_trunc_params(nl, eps, p, cap):
    if not 0 < eps < 1:
        raise ParameterError("eps must lie in (0, 1)")
    if not p > 1:
        raise ParameterError("p must exceed 1")
    if nl.kind != "mems" and not cap - eps > 0:
        raise ParameterError("truncation cap must exceed eps")


def eval_truncated_f(nl, s, eps, p, cap=DEFAULT_CAP, N=None):
    """C^1 regularization g_eps: f below the junction, alpha + beta s^p above.

    The junction sits at 1 - eps for mems and at cap - eps otherwise. When N
    is given and N >= 3, p must be subcritical, 1 < p < (N+2)/(N-2).
    """
    _check_trunc_params(nl, eps, p, cap)
    if N is not None and N >= 3 and not p < (N + 2) / (N - 2):
        raise ParameterError("p must be below (N+2)/(N-2)")
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise DomainError("argument must be >= 0")
    return _out(_g(nl, s, eps, p, cap))


def _g(nl, s, eps, p, cap):
    T, alpha, beta = _tail_coeffs(nl, eps, p, cap)
    low = np.minimum(s, T)
    with np.errstate(all="ignore"):
        tail = alpha + beta * np.abs(s) ** p
    return np.where(s <= T, nl.f(low), tail)


def _gp(nl, s, eps, p, cap):
    T, alpha, beta = _tail_coeffs(nl, eps, p, cap)
    low = np.minimum(s, T)
    with np.errstate(all="ignore"):
        tail = beta * p * np.abs(s) ** (p - 1)
    return np.where(s <= T, nl.fp(low), tail)


def eval_truncated_G(nl, s, eps, p, cap=DEFAULT_CAP):
    """G_eps(s) = integral of g_eps from the left end of the domain of f."""
    _check_trunc_params(nl, eps, p, cap)
    s = np.asarray(s, dtype=float)
    return _out(_G(nl, s, eps, p, cap))


def _G(nl, s, eps, p, cap):
    T, alpha, beta = _tail_coeffs(nl, eps, p, cap)
    low = np.minimum(s, T)
    base = nl.F(low)
    hi = np.maximum(s, T)
    extra = alpha * (hi - T) + beta * (hi ** (p + 1) - T ** (p + 1)) / (p + 1)
    return base + extra


def critical_dimension(nl):
    return nl.Nstar


def weight(spec, r):
    """exp(a(r)) psi(r)^(N-1) at a single radius in [0, R]."""
    if not 0 <= r <= spec.R:
        raise DomainError(f"radius {r} outside [0, {spec.R}]")
    if r == 0:
        base = math.exp(float(spec.a(0.0)))
        return base if spec.N == 1 else 0.0
    return float(spec.w(r))


def decompose_radial(A_raw, model):
    """Split a radial advection A_raw(r) into a = -int_0^r A_raw, C = 0.

    On a ball around the pole a radial field with div(e^a C) = 0 has
    e^a psi^(N-1) C constant, and regularity at r = 0 forces that constant
    to vanish, so the whole field is a gradient.
    """
    field_ = parse_field(A_raw)
    if isinstance(field_, Zero):
        return AdvectionField(Zero(), Zero())
    return AdvectionField(Antiderivative(field_, sign=-1.0, R=model.radius), Zero())
