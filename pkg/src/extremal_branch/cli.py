"""Command-line front end.

    extremal-branch {branch,bounds,verify,sweep,energy} --config run.cfg --out DIR [--jobs N]

The configuration is a flat text file of ``dotted.key = value`` lines with
``#`` comments. Exit codes: 0 success, 1 configuration or input error,
2 continuation stalled before a fold, 3 a verification check failed.
"""

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .continuation import (
    fmt, dimension_sweep, solution_at, trace_branch, write_branch_csv,
    read_profile_csv,
)
from .errors import ConfigError, ContinuationStalled, ExtremalBranchError
from .estimates import decisive, energy, semi_stable_points, verify_all, _point_reports
from .model import DEFAULT_CAP, AdvectionField, Nonlinearity, ProblemSpec, RiemannianModel
from .expr import parse_field
from .odecore import GRADINGS, make_grid
from .solver import DEFAULT_TOL, Solution
from .spectrum import TOL_EIG_REL, lambda_star_bounds, principal_eigenvalue

log = logging.getLogger("extremal_branch")

EXIT_OK, EXIT_CONFIG, EXIT_STALL, EXIT_FAILED = 0, 1, 2, 3

DEFAULTS = {
    "model.kind": "euclidean",
    "model.dimension": "2",
    "model.radius": "1",
    "model.psi": "",
    "nonlinearity.kind": "gelfand",
    "nonlinearity.m": "2",
    "advection.a": "0",
    "advection.C": "0",
    "grid.points": "1024",
    "grid.grading": "",
    "continuation.ds": "",
    "continuation.max_steps": "2000",
    "continuation.u0_ceiling": "",
    "tol.residual": repr(DEFAULT_TOL),
    "tol.eig": "",
    "seed": "0",
    "output.points": "false",
    "verify.t": "0.5,1,2",
    "verify.p": "2",
    "verify.b": "1",
    "verify.solution": "",
    "verify.lambda": "",
    "verify.segment": "minimal",
    "sweep.dims": "",
    "energy.lambda_fraction": "0.97",
    "energy.eps": "0.5",
    "energy.p": "",
    "energy.cap": repr(DEFAULT_CAP),
    "energy.directions": "20",
}


# ---------------------------------------------------------------- config

def parse_config_text(text, source="<config>"):
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value")
        key, value = (x.strip() for x in line.split("=", 1))
        if key not in DEFAULTS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def _number(cfg, key, kind=float):
    text = cfg[key]
    try:
        value = kind(text)
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse {text!r}") from exc
    if kind is float and not math.isfinite(value):
        raise ConfigError(f"{key}: must be finite")
    return value


def _optional(cfg, key, kind=float):
    return None if cfg[key] == "" else _number(cfg, key, kind)


def _float_list(cfg, key):
    text = cfg[key].strip()
    if not text:
        return []
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"{key}: expected comma-separated numbers") from exc


def parse_dims(text):
    """'2..12' or '2,3,5' (mixed allowed) -> list of ints."""
    dims = []
    for part in (p.strip() for p in text.split(",")):
        if not part:
            continue
        try:
            if ".." in part:
                lo, hi = part.split("..", 1)
                dims.extend(range(int(lo), int(hi) + 1))
            else:
                dims.append(int(part))
        except ValueError as exc:
            raise ConfigError(f"bad dimension list entry {part!r}") from exc
    return dims


@dataclass
class RunConfig:
    values: dict
    base_dir: Path

    @classmethod
    def load(cls, path):
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        vals = dict(DEFAULTS)
        vals.update(parse_config_text(path.read_text(), str(path)))
        return cls(vals, path.parent)

    def __getitem__(self, key):
        return self.values[key]

    def spec(self):
        v = self.values
        try:
            model = RiemannianModel(v["model.kind"], _number(v, "model.dimension", int),
                                    _number(v, "model.radius"), v["model.psi"] or None)
            nl = Nonlinearity(v["nonlinearity.kind"], _number(v, "nonlinearity.m"))
            adv = AdvectionField(parse_field(v["advection.a"], self.base_dir),
                                 parse_field(v["advection.C"], self.base_dir))
            return ProblemSpec(model, nl, adv)
        except ConfigError:
            raise
        except (ExtremalBranchError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def grading(self, spec):
        g = self.values["grid.grading"]
        if g == "":
            return "boundary-refined" if spec.nonlinearity.kind == "mems" else "uniform"
        if g not in GRADINGS:
            raise ConfigError(f"grid.grading must be one of {GRADINGS}")
        return g

    def grid(self, spec):
        M = _number(self.values, "grid.points", int)
        try:
            return make_grid(spec.R, M, self.grading(spec))
        except ExtremalBranchError as exc:
            raise ConfigError(str(exc)) from exc

    def continuation_kwargs(self):
        v = self.values
        kw = {"ds": _optional(v, "continuation.ds"),
              "max_steps": _number(v, "continuation.max_steps", int),
              "u0_ceiling": _optional(v, "continuation.u0_ceiling"),
              "tol": _number(v, "tol.residual")}
        if v["tol.eig"] != "":
            kw["tol_eig"] = _number(v, "tol.eig")
        return kw

    def flag(self, key):
        text = self.values[key].strip().lower()
        if text not in ("true", "false", "1", "0", "yes", "no"):
            raise ConfigError(f"{key}: expected true or false")
        return text in ("true", "1", "yes")


# ---------------------------------------------------------------- output

def _jsonify(obj, indent=0):
    """JSON text with floats at 17 significant digits; non-finite -> null."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}{json.dumps(str(k))}: {_jsonify(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + _jsonify(v, indent + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj) if math.isfinite(obj) else "null"
    return json.dumps(str(obj))


def write_json(path, obj):
    Path(path).write_text(_jsonify(obj) + "\n")


def _setup_logging():
    level = os.environ.get("EXTREMAL_BRANCH_LOG", "").strip().lower()
    levels = {"quiet": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def _trace(cfg, spec, grid):
    return trace_branch(spec, grid, **cfg.continuation_kwargs())


def _fold_summary(branch):
    if branch.fold_index is None:
        return None
    p = branch.points[branch.fold_index]
    return {"index": branch.fold_index, "lambda": p.lam, "u0": p.u0, "sup_u": p.sup_u,
            "mu1": p.mu1, "form_inf": p.form_inf}


# ---------------------------------------------------------------- commands

def cmd_branch(cfg, out, jobs=1):
    spec = cfg.spec()
    grid = cfg.grid(spec)
    branch = _trace(cfg, spec, grid)
    points_dir = out if cfg.flag("output.points") else None
    write_branch_csv(branch, out / "branch.csv", points_dir)
    summary = {
        "lambda_star": branch.lambda_star,
        "lambda_star_err": branch.lambda_star_err,
        "lambda_star_method": branch.flags.get("lambda_star_method"),
        "singular": branch.flags.get("singular"),
        "fold": _fold_summary(branch),
        "termination": branch.termination,
        "mu1_slope_max": branch.flags.get("mu1_slope_max"),
        "lambda1": branch.lambda1,
        "tol_eig": branch.tol_eig,
        "points": len(branch.points),
        "grid_points": grid.M,
        "grading": cfg.grading(spec),
    }
    write_json(out / "summary.json", summary)
    if branch.lambda_star is None:
        log.error("branch ended (%s) before a fold or asymptote was detected",
                  branch.termination)
        return EXIT_STALL
    return EXIT_OK


def cmd_lambda_star_bounds(cfg, out, jobs=1):
    spec = cfg.spec()
    grid = cfg.grid(spec)
    lower, upper = lambda_star_bounds(spec, grid)
    lam_star = None
    try:
        lam_star = _trace(cfg, spec, grid).lambda_star
    except ExtremalBranchError as exc:
        log.warning("no branch for the bounds check: %s", exc)
    ok = None if lam_star is None else bool(lower <= lam_star <= upper)
    write_json(out / "bounds.json", {"lower": lower, "upper": upper, "lambda_star": lam_star,
                                     "sandwich_ok": ok})
    return EXIT_OK


def _single_solution_reports(cfg, spec, grid, sol, jobs):
    tol = TOL_EIG_REL * principal_eigenvalue(spec, grid).mu
    if cfg["tol.eig"] != "":
        tol = _number(cfg.values, "tol.eig")
    if sol.mu1 is None:
        sol.mu1 = principal_eigenvalue(spec, grid, sol.u, sol.lam).mu
    if not sol.mu1 >= -tol:
        log.warning("requested solution is not semi-stable (mu1=%.3g); nothing to verify",
                    sol.mu1)
        return []
    return _point_reports((sol, _float_list(cfg.values, "verify.t"),
                           _float_list(cfg.values, "verify.p"),
                           _number(cfg.values, "verify.b")))


def cmd_verify(cfg, out, jobs=1):
    spec = cfg.spec()
    grid = cfg.grid(spec)
    v = cfg.values
    lam = _optional(v, "verify.lambda")
    if v["verify.solution"]:
        if lam is None:
            raise ConfigError("verify.solution needs verify.lambda")
        path = Path(v["verify.solution"])
        if not path.is_absolute():
            path = cfg.base_dir / path
        u = read_profile_csv(path, grid)
        if u[-1] != 0 or np.any(u >= spec.nonlinearity.s0) or np.any(u < 0):
            raise ConfigError(f"{path}: profile outside [0, s0) or nonzero at R")
        sol = Solution(lam, u, math.nan, grid, spec, method="file")
        reports = _single_solution_reports(cfg, spec, grid, sol, jobs)
    elif lam is not None:
        branch = _trace(cfg, spec, grid)
        sol = solution_at(branch, lam, v["verify.segment"], tol=_number(v, "tol.residual"))
        reports = _single_solution_reports(cfg, spec, grid, sol, jobs)
    else:
        branch = _trace(cfg, spec, grid)
        if not semi_stable_points(branch):
            log.warning("branch has no semi-stable points with lambda > 0")
        reports = verify_all(branch, _float_list(v, "verify.t"), _float_list(v, "verify.p"),
                             b=_number(v, "verify.b"), jobs=jobs)
    write_json(out / "estimates.json", [r.to_dict() for r in reports])
    failed = [r for r in decisive(reports) if not r.satisfied]
    for r in failed:
        log.error("%s violated: lhs=%s rhs=%s lambda=%s", r.lemma_id, fmt(r.lhs), fmt(r.rhs),
                  r.lam)
    return EXIT_FAILED if failed else EXIT_OK


def cmd_sweep(cfg, out, jobs=1, dims=None):
    spec = cfg.spec()
    N_list = parse_dims(dims if dims is not None else cfg["sweep.dims"])
    if not N_list:
        raise ConfigError("empty dimension list")
    if any(N < 1 for N in N_list):
        raise ConfigError("dimensions must be >= 1")
    kw = cfg.continuation_kwargs()
    rows = dimension_sweep(spec, N_list, M=_number(cfg.values, "grid.points", int),
                           grading=cfg.grading(spec), ds=kw["ds"], max_steps=kw["max_steps"],
                           u0_ceiling=kw["u0_ceiling"], jobs=jobs)
    lines = ["N,lambda_star,sup_u_star,classification"]
    for row in rows:
        lines.append(f"{row.N},{fmt(row.lambda_star)},{fmt(row.sup_u_star)},"
                     f"{row.classification}")
        if row.error:
            log.warning("N=%d: %s", row.N, row.error)
    (out / "sweep.csv").write_text("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_energy(cfg, out, jobs=1):
    spec = cfg.spec()
    grid = cfg.grid(spec)
    v = cfg.values
    branch = _trace(cfg, spec, grid)
    if branch.fold_index is None:
        log.error("energy comparison needs a fold (termination %s)", branch.termination)
        return EXIT_STALL
    lam = _number(v, "energy.lambda_fraction") * branch.lambda_star
    eps = _number(v, "energy.eps")
    p = _optional(v, "energy.p")
    if p is None:
        p = 2.0 if spec.N <= 2 else 1.0 + 2.0 / (spec.N - 2)
    cap = _number(v, "energy.cap")
    tol = _number(v, "tol.residual")
    low = solution_at(branch, lam, "minimal", tol=tol)
    high = solution_at(branch, lam, "second", tol=tol)
    J_low = energy(spec, grid, low.u, eps, p, lam, cap)
    J_high = energy(spec, grid, high.u, eps, p, lam, cap)
    rng = np.random.default_rng(_number(v, "seed", int))
    worst = stationarity(spec, grid, low.u, eps, p, lam, cap, rng,
                         _number(v, "energy.directions", int))
    write_json(out / "energy.json", {
        "lambda": lam, "lambda_star": branch.lambda_star, "eps": eps, "p": p, "cap": cap,
        "u0_minimal": low.u0, "u0_second": high.u0,
        "J_minimal": J_low, "J_second": J_high, "difference": J_high - J_low,
        "ordered": bool(J_high > J_low), "stationarity": worst,
    })
    return EXIT_OK


def stationarity(spec, grid, u, eps, p, lam, cap, rng, directions=20, h=1e-6):
    """Largest relative central-difference derivative of the energy along
    random interior directions: |dJ| / (|dK| + lam |dP|) with K, P the
    gradient and potential parts."""
    worst = 0.0
    scale = max(1.0, float(np.max(np.abs(u))))
    for _ in range(directions):
        d = rng.standard_normal(u.size)
        d[-1] = 0.0
        d *= h * scale / np.max(np.abs(d))
        kp = energy(spec, grid, u + d, eps, p, 0.0, cap)
        km = energy(spec, grid, u - d, eps, p, 0.0, cap)
        pp = (kp - energy(spec, grid, u + d, eps, p, 1.0, cap))
        pm = (km - energy(spec, grid, u - d, eps, p, 1.0, cap))
        dK = kp - km
        dP = pp - pm
        dJ = dK - lam * dP
        worst = max(worst, abs(dJ) / (abs(dK) + lam * abs(dP)))
    return worst


COMMANDS = {
    "branch": cmd_branch,
    "bounds": cmd_lambda_star_bounds,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "energy": cmd_energy,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="extremal-branch", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="key = value configuration file")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes")
        if name == "sweep":
            sp.add_argument("--dims", default=None, help="dimensions, e.g. 2..12 or 2,3,4")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    _setup_logging()
    try:
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        cfg = RunConfig.load(args.config)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        cmd = COMMANDS[args.command]
        if args.command == "sweep":
            return cmd(cfg, out, args.jobs, args.dims)
        return cmd(cfg, out, args.jobs)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except ContinuationStalled as exc:
        log.error("%s", exc)
        return EXIT_STALL
    except ExtremalBranchError as exc:
        log.error("%s", exc)
        return EXIT_STALL if args.command in ("branch", "energy") else EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
