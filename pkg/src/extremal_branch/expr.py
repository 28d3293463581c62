"""Radial fields given as closed-form expressions or tabulated samples.

Expressions use a small arithmetic grammar in the variable ``r``: numbers,
``+ - * / ^``, parentheses and the functions sin, cos, sinh, cosh, exp,
log, sqrt. They are parsed with :mod:`ast` against a whitelist and never
passed to ``eval``.
"""

import ast
import csv
import math
import operator
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import ConfigError

_FUNCS = {
    "sin": np.sin,
    "cos": np.cos,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
}
_CONSTS = {"pi": math.pi, "e": math.e}
_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}


def _compile(node):
    """Turn an ast node into a closure r -> value."""
    if isinstance(node, ast.Expression):
        return _compile(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        v = float(node.value)
        return lambda r: v + 0.0 * r
    if isinstance(node, ast.Name):
        if node.id == "r":
            return lambda r: r
        if node.id in _CONSTS:
            v = _CONSTS[node.id]
            return lambda r: v + 0.0 * r
        raise ConfigError(f"unknown name {node.id!r} in expression")
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _compile(node.operand)
        if isinstance(node.op, ast.USub):
            return lambda r: -inner(r)
        return inner
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        op = _BINOPS[type(node.op)]
        lhs, rhs = _compile(node.left), _compile(node.right)
        return lambda r: op(lhs(r), rhs(r))
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS:
            raise ConfigError("only sin, cos, sinh, cosh, exp, log, sqrt are allowed")
        if len(node.args) != 1 or node.keywords:
            raise ConfigError(f"{node.func.id} takes exactly one argument")
        fn = _FUNCS[node.func.id]
        arg = _compile(node.args[0])
        return lambda r: fn(arg(r))
    raise ConfigError(f"unsupported syntax in expression: {ast.dump(node)}")


class Expr:
    """Closed-form radial field r -> value.

    Holds only the source string so instances pickle cleanly (needed for
    process pools).
    """

    representation = "closed-form expression"

    def __init__(self, source):
        self.source = str(source)
        try:
            tree = ast.parse(self.source.replace("^", "**"), mode="eval")
        except SyntaxError as exc:
            raise ConfigError(f"cannot parse expression {self.source!r}") from exc
        self._fn = _compile(tree)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(all="ignore"):
            return np.asarray(self._fn(r), dtype=float) + 0.0 * r

    def derivative(self, r):
        """Complex-step derivative; exact to rounding for analytic fields."""
        r = np.asarray(r, dtype=float)
        h = 1e-30
        with np.errstate(all="ignore"):
            val = self._fn(r + 1j * h)
        return np.imag(np.asarray(val, dtype=complex)) / h + 0.0 * r

    def __getstate__(self):
        return {"source": self.source}

    def __setstate__(self, state):
        self.__init__(state["source"])

    def __repr__(self):
        return f"Expr({self.source!r})"


class Tabulated:
    """Field sampled at increasing radii, interpolated by monotone cubics."""

    representation = "tabulated samples with interpolation"

    def __init__(self, r, values, source=None):
        r = np.asarray(r, dtype=float)
        values = np.asarray(values, dtype=float)
        if r.ndim != 1 or r.shape != values.shape or r.size < 2:
            raise ConfigError("tabulated field needs two matching columns with at least 2 rows")
        if r[0] != 0.0:
            raise ConfigError("tabulated field must start at r=0")
        if np.any(np.diff(r) <= 0):
            raise ConfigError("tabulated radii must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ConfigError("tabulated values must be finite")
        self.r = r
        self.values = values
        self.source = source
        self._interp = PchipInterpolator(r, values, extrapolate=True)

    @classmethod
    def from_csv(cls, path):
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"tabulated field file not found: {path}")
        rows = []
        with path.open(newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].strip().startswith("#"):
                    continue
                try:
                    rows.append((float(row[0]), float(row[1])))
                except (ValueError, IndexError):
                    if rows:
                        raise ConfigError(f"bad row {row!r} in {path}")
                    # header line
        if not rows:
            raise ConfigError(f"no data rows in {path}")
        arr = np.array(rows)
        return cls(arr[:, 0], arr[:, 1], source=str(path))

    def __call__(self, r):
        return np.asarray(self._interp(np.asarray(r, dtype=float)), dtype=float)

    def derivative(self, r):
        return np.asarray(self._interp.derivative()(np.asarray(r, dtype=float)), dtype=float)

    def __getstate__(self):
        return {"r": self.r, "values": self.values, "source": self.source}

    def __setstate__(self, state):
        self.__init__(state["r"], state["values"], state["source"])


class Zero:
    """The identically zero field."""

    representation = "closed-form expression"
    source = "0"

    def __call__(self, r):
        return np.zeros_like(np.asarray(r, dtype=float))

    def derivative(self, r):
        return np.zeros_like(np.asarray(r, dtype=float))

    def __repr__(self):
        return "Zero()"


class Antiderivative:
    """r -> sign * integral_0^r g(s) ds by Gauss-Legendre on each gap.

    The integrand is any vectorized callable. Each query radius is reached
    by summing 8-point rules over the gaps between sorted query points and
    the interval [0, R] subdivided into ``panels`` pieces, so results are
    accurate for smooth g regardless of how sparse the query set is.
    """

    representation = "closed-form expression"

    def __init__(self, g, sign=1.0, panels=64, R=None):
        self.g = g
        self.sign = float(sign)
        self.panels = int(panels)
        self.R = R
        self._x, self._w = np.polynomial.legendre.leggauss(8)

    def _integrate(self, lo, hi):
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        pts = mid[:, None] + half[:, None] * self._x[None, :]
        vals = np.asarray(self.g(pts.ravel()), dtype=float).reshape(pts.shape)
        return half * (vals @ self._w)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        flat = r.ravel()
        top = float(flat.max()) if flat.size else 0.0
        if self.R is not None:
            top = max(top, float(self.R))
        knots = np.linspace(0.0, top, self.panels + 1) if top > 0 else np.zeros(1)
        pts = np.unique(np.concatenate([knots, flat]))
        cum = np.concatenate([[0.0], np.cumsum(self._integrate(pts[:-1], pts[1:]))]) \
            if pts.size > 1 else np.zeros(1)
        out = np.interp(flat, pts, cum)
        return (self.sign * out).reshape(r.shape)

    def derivative(self, r):
        return self.sign * np.asarray(self.g(np.asarray(r, dtype=float)), dtype=float)


def parse_field(value, base_dir=None):
    """Expression string, CSV path, number or callable -> field object."""
    if value is None:
        return Zero()
    if callable(value):
        return value
    if isinstance(value, (int, float)):
        return Zero() if value == 0 else Expr(repr(float(value)))
    text = str(value).strip()
    if text in ("", "0", "0.0"):
        return Zero()
    if text.lower().endswith(".csv"):
        path = Path(text)
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        return Tabulated.from_csv(path)
    return Expr(text)
