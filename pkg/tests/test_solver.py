import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

import frozen
from extremal_branch.errors import (
    DomainError, MonotonicityError, NoConvergenceError, ParameterError,
)
from extremal_branch.model import make_spec
from extremal_branch.odecore import make_grid
from extremal_branch.solver import (
    monotone_iterate, newton_solve, residual, weighted_residual_norm,
)
from extremal_branch.spectrum import lambda_star_bounds


def test_gelfand_1d_pole_value():
    spec = make_spec("euclidean", 1, 1.0, "gelfand")
    sol = newton_solve(spec, make_grid(1.0, 1024), 0.5)
    assert sol.residual_norm <= sol.info["target"] <= 1e-7
    assert sol.u0 == pytest.approx(frozen.GELFAND_1D_U0_AT_HALF, abs=1e-5)
    assert sol.u[-1] == 0.0


def test_mems_2d_pole_value():
    spec = make_spec("euclidean", 2, 1.0, "mems")
    sol = newton_solve(spec, make_grid(1.0, 1024, "boundary-refined"), 0.3)
    assert 0 < sol.sup_u < 1
    assert sol.u0 == pytest.approx(frozen.MEMS_2D_U0_AT_0_3, abs=1e-5)


def test_lambda_zero_gives_zero():
    spec = make_spec("hyperbolic", 3, 1.0, "power")
    sol = newton_solve(spec, make_grid(1.0, 64), 0.0)
    assert np.all(sol.u == 0.0)


def test_residual_rows():
    spec = make_spec("euclidean", 2, 1.0, "gelfand")
    grid = make_grid(1.0, 256)
    sol = newton_solve(spec, grid, 1.0)
    F = residual(spec, grid, sol.u, 1.0)
    assert F[-1] == 0.0
    assert np.max(np.abs(F)) < 1e-7
    assert weighted_residual_norm(spec, grid, sol.u, 1.0) == pytest.approx(
        sol.residual_norm, abs=1e-12)
    # a non-solution has a residual of the size of the source
    assert np.max(np.abs(residual(spec, grid, np.zeros(257), 1.0))) > 0.1


def test_input_errors():
    spec = make_spec("euclidean", 2, 1.0, "mems")
    grid = make_grid(1.0, 64)
    with pytest.raises(ParameterError):
        newton_solve(spec, grid, -1.0)
    with pytest.raises(ParameterError):
        monotone_iterate(spec, grid, -1.0)
    with pytest.raises(DomainError):
        newton_solve(spec, grid, 0.1, u_init=np.full(65, 1.0))
    with pytest.raises(ParameterError):
        newton_solve(spec, grid, 0.1, u_init=np.zeros(10))
    with pytest.raises(DomainError):
        residual(spec, grid, np.full(65, 1.5), 0.1)


def test_monotone_matches_newton():
    spec = make_spec("euclidean", 2, 1.0, "gelfand")
    grid = make_grid(1.0, 512)
    mono = monotone_iterate(spec, grid, 1.5)
    newt = newton_solve(spec, grid, 1.5)
    assert np.max(np.abs(mono.u - newt.u)) < 1e-8
    assert mono.method == "monotone"


@pytest.mark.parametrize("kind,N,lam", [("mems", 2, 0.85), ("gelfand", 1, 0.95)])
def test_above_fold_fails(kind, N, lam):
    spec = make_spec("euclidean", N, 1.0, kind)
    grid = make_grid(1.0, 256)
    with pytest.raises(NoConvergenceError):
        monotone_iterate(spec, grid, lam)
    with pytest.raises(NoConvergenceError):
        newton_solve(spec, grid, lam)


def test_bad_shift_detected():
    # a negative shift destroys the order-preserving property
    spec = make_spec("euclidean", 2, 1.0, "gelfand")
    grid = make_grid(1.0, 128)
    with pytest.raises((MonotonicityError, NoConvergenceError)):
        monotone_iterate(spec, grid, 1.9, c=-20.0)


def test_clip_events_reported():
    spec = make_spec("euclidean", 2, 1.0, "mems")
    grid = make_grid(1.0, 128, "boundary-refined")
    sol = newton_solve(spec, grid, 0.5)
    assert sol.info["clip_events"] >= 0
    assert sol.sup_u < 1 - 1e-8


configs = st.tuples(
    st.sampled_from(["euclidean", "hyperbolic", "spherical"]),
    st.integers(1, 6),
    st.sampled_from(["gelfand", "power", "mems"]),
    st.sampled_from([None, "r^2/4", "r"]),
    st.floats(0.05, 0.8),
)


@settings(max_examples=20, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(configs)
def test_minimal_solution_is_monotone_limit(cfg):
    geom, N, kind, a, frac = cfg
    spec = make_spec(geom, N, 1.0, kind, m=2.0, a=a)
    grid = make_grid(1.0, 128)
    lower, _ = lambda_star_bounds(spec, grid)
    lam = frac * lower
    mono = monotone_iterate(spec, grid, lam)
    newt = newton_solve(spec, grid, lam)
    assert np.max(np.abs(mono.u - newt.u)) < 1e-6
    # radially nonincreasing and positive inside
    assert np.all(np.diff(newt.u) <= 1e-12)
    assert np.all(newt.u[:-1] > 0)


def test_monotone_at_zero_lambda_stops_after_one_step():
    spec = make_spec("spherical", 2, 1.0, "mems")
    sol = monotone_iterate(spec, make_grid(1.0, 64), 0.0)
    assert sol.iterations == 1 and np.all(sol.u == 0)


def test_residual_examples():
    spec = make_spec("hyperbolic", 2, 1.0, "gelfand")
    grid = make_grid(1.0, 512)
    assert np.all(residual(spec, grid, np.zeros(513), 0.0) == 0)
    F = residual(spec, grid, np.zeros(513), 1.0)
    r = grid.nodes[1:-1]
    assert np.allclose(F[1:-1], -spec.w(r), rtol=1e-5)


def test_monotone_with_fixed_shift_fine_grid():
    spec = make_spec("euclidean", 2, 1.0, "gelfand")
    grid = make_grid(1.0, 4096)
    newt = newton_solve(spec, grid, 1.0)
    # c = 2 lam e^(u guess) with the guess u = 0.6
    mono = monotone_iterate(spec, grid, 1.0, c=2.0 * np.exp(0.6))
    assert np.max(np.abs(mono.u - newt.u)) <= 10 * 1e-10 + newt.info["target"]
