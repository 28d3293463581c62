import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

import suite
from extremal_branch.continuation import trace_branch
from extremal_branch.errors import ParameterError
from extremal_branch.estimates import (
    INFORMATIVE_ONLY, LEMMA_IDS, MEMS_T_MAX, EstimateReport, d2_density_check, decisive,
    energy, gelfand_lp_bound, linfty_bound, lp_bound, mems_lp_bound, pointwise_decay_check,
    power_lp_bound, semi_stable_points, t_in_range, verify_all,
)
from extremal_branch.model import make_spec
from extremal_branch.odecore import geometry, make_grid
from extremal_branch.solver import newton_solve
from extremal_branch.spectrum import lambda_star_bounds


def _solve(kind, N, lam, geom="euclidean", R=1.0, M=512, a=None, m=2.0):
    spec = make_spec(geom, N, R, kind, m=m, a=a)
    grading = "boundary-refined" if kind == "mems" else "uniform"
    return newton_solve(spec, make_grid(R, M, grading), lam)


@pytest.fixture(scope="module")
def gelfand_branch():
    spec = make_spec("euclidean", 2, 1.0, "gelfand")
    return trace_branch(spec, make_grid(1.0, 512))


@pytest.fixture(scope="module")
def mems_branch():
    spec = make_spec("euclidean", 2, 1.0, "mems")
    return trace_branch(spec, make_grid(1.0, 512, "boundary-refined"))


def test_report_margin_and_dict():
    r = EstimateReport("L18", {"t": 1.0}, 2.0, 3.0, 0.5, 1.0)
    assert r.margin == 1.0 and r.satisfied
    assert not EstimateReport("L18", {}, 3.0, 2.0).satisfied
    # rounding slack proportional to |rhs|
    assert EstimateReport("L18", {}, 1.0 + 1e-10, 1.0).satisfied
    d = r.to_dict()
    assert set(d) == {"lemma_id", "params", "lhs", "rhs", "margin", "satisfied", "lambda", "mu1"}
    assert "T22ii" in LEMMA_IDS and INFORMATIVE_ONLY == ("T06",)


def test_mems_lp_examples():
    sol = _solve("mems", 2, 0.5 * 0.7892)
    rep = mems_lp_bound(sol, 1.0)
    assert rep.satisfied and rep.lemma_id == "L18"
    assert rep.params["K"] ** 2 == pytest.approx(5.76)
    assert rep.rhs == pytest.approx(5.76 * rep.params["C2"] ** 2)
    assert rep.params["rhs_printed"] == pytest.approx(5.76 * rep.params["C2"])
    near = mems_lp_bound(sol, MEMS_T_MAX - 1e-9)
    # the factor K^(2/t) diverges at the end of the range
    assert near.rhs > 100 * mems_lp_bound(sol, 4.0).rhs and near.satisfied
    with pytest.raises(ParameterError):
        mems_lp_bound(sol, MEMS_T_MAX)
    with pytest.raises(ParameterError):
        gelfand_lp_bound(sol, 1.0)


def test_gelfand_lp_examples():
    sol = _solve("gelfand", 2, 1.0)
    rep = gelfand_lp_bound(sol, 1.0)
    assert rep.satisfied
    assert rep.params["rhs_printed"] == pytest.approx(2.0 * rep.params["C1"])
    zero = gelfand_lp_bound(_solve("gelfand", 2, 0.0), 1.0)
    # lhs is the f-independent floor (int w)^(1/3) = (1/2)^(1/3)
    assert zero.lhs == pytest.approx(0.5 ** (1 / 3), rel=1e-4)
    assert zero.margin > 0.5 * zero.rhs
    with pytest.raises(ParameterError):
        gelfand_lp_bound(sol, 2.0)


def test_power_lp_examples():
    sol = _solve("power", 3, 0.5)
    rep = power_lp_bound(sol, 2.0, 1.0)
    assert rep.params["kappa"] ** -0.5 == pytest.approx(math.sqrt(3.0))
    assert rep.satisfied
    lo = 2 - math.sqrt(2)
    assert not t_in_range("power", lo, 2.0, 1.0)
    with pytest.raises(ParameterError):
        power_lp_bound(sol, lo, 1.0)
    with pytest.raises(ParameterError):
        power_lp_bound(sol, 1.0, 0.0)
    assert lp_bound(sol, 1.0).lemma_id == "L26"


def test_decay_examples():
    sol = _solve("mems", 2, 0.5)
    rep = pointwise_decay_check(sol, 2.0)
    assert rep.lemma_id == "L17" and rep.satisfied
    assert len(rep.params["radii"]) == 10
    c, r = rep.params["mean_value_points"], rep.params["radii"]
    assert all(0 < ci < ri for ci, ri in zip(c, r))
    # N = 1, a = 0: printed C3 = R^(p/(p-1)) whatever c is
    one = pointwise_decay_check(_solve("gelfand", 1, 0.1, R=2.0), 2.0)
    assert one.lemma_id == "L45"
    assert one.params["c3_printed"] == pytest.approx(4.0, rel=1e-6)
    assert one.params["C3"] == pytest.approx(math.sqrt(2.0), rel=1e-6)
    assert pointwise_decay_check(_solve("power", 3, 0.3), 1.0).lemma_id == "L58"


def test_d2_density(mems_branch):
    k = mems_branch.fold_index
    for pt in mems_branch.points[k - 3:k]:
        sol = pt.solution
        sol.mu1 = pt.mu1
        rep = d2_density_check(sol, 1.0)
        assert rep.lemma_id == "L05" and rep.satisfied
        assert rep.params["D2_at_R"] >= 1 - sol.sup_u
    zero = d2_density_check(_solve("mems", 2, 0.0), 1.0)
    # D2 >= 1 for u = 0, so the integral is at most int w = 1/2
    assert zero.lhs <= 0.5 + 1e-9


def test_linfty_mems(mems_branch):
    rep = linfty_bound(mems_branch, 1.0)
    assert rep.lemma_id == "T06"
    assert rep.lhs < 1
    assert rep.params["bound"] == pytest.approx(1 - rep.params["C"])
    assert rep.params["informative"] == (rep.params["C"] > 0)


def test_linfty_gelfand_hand_evaluation(gelfand_branch):
    rep = linfty_bound(gelfand_branch, 1.0)
    # t = 1, R = 1, a = 0, N = 2: C1 = (sup r)^(1/3) = 1 and the ratio is 2
    assert rep.params["C1"] == pytest.approx(1.0)
    c3 = rep.params["C3"]
    assert rep.rhs == pytest.approx(math.log(8.0) / 3 + 8.0 * c3, rel=1e-12)
    assert rep.params["informative"]


def test_linfty_preconditions():
    spec = make_spec("euclidean", 10, 1.0, "gelfand")
    br = trace_branch(spec, make_grid(1.0, 128), max_steps=5)
    with pytest.raises(ParameterError):
        linfty_bound(br, 1.0)


def test_verify_all_counts(gelfand_branch, mems_branch):
    assert verify_all(gelfand_branch, []) == []
    reps = verify_all(gelfand_branch, [0.5, 1.0, 1.5])
    semi = semi_stable_points(gelfand_branch)
    l39 = [r for r in reps if r.lemma_id == "L39"]
    assert len(l39) == 3 * len(semi)
    assert all(r.satisfied for r in decisive(reps))
    assert sum(r.lemma_id == "T22ii" for r in reps) == 2

    reps = verify_all(mems_branch, [1.0])
    semi = semi_stable_points(mems_branch)
    assert len(semi) < len(mems_branch.points) - 1
    assert sum(r.lemma_id == "L18" for r in reps) == len(semi)
    assert all(r.mu1 >= -mems_branch.tol_eig for r in reps if r.lemma_id == "L18")
    assert all(r.satisfied for r in decisive(reps))


def test_verify_all_parallel_matches(gelfand_branch):
    a = verify_all(gelfand_branch, [1.0], [2.0])
    b = verify_all(gelfand_branch, [1.0], [2.0], jobs=2)
    assert [r.to_dict() for r in a] == [r.to_dict() for r in b]


# ---------------------------------------------------------------- energy

@pytest.mark.parametrize("kind", ["mems", "gelfand"])
def test_energy_of_zero(kind):
    spec = make_spec("euclidean", 2, 1.0, kind, a="r^2/4")
    grid = make_grid(1.0, 1024)
    W = geometry(spec, grid).W
    J = energy(spec, grid, np.zeros(1025), 0.5, 2.0, 0.7)
    assert J == pytest.approx(-0.7 * np.sum(W[:-1]), rel=1e-12)
    # int_0^1 e^(r^2/4) r dr = 2 (e^(1/4) - 1)
    assert J == pytest.approx(-0.7 * 2 * (math.exp(0.25) - 1), rel=2e-3)


def test_energy_without_source_is_dirichlet_form():
    spec = make_spec("hyperbolic", 3, 1.0, "gelfand")
    grid = make_grid(1.0, 64)
    rng = np.random.default_rng(3)
    u = rng.uniform(0, 1, 65)
    u[-1] = 0
    assert energy(spec, grid, u, 0.5, 2.0, 0.0) > 0
    assert energy(spec, grid, np.zeros(65), 0.5, 2.0, 0.0) == 0.0


def test_energy_rejects_divergence_free_part():
    spec = make_spec("euclidean", 2, 1.0, "gelfand", C="r")
    grid = make_grid(1.0, 64)
    with pytest.raises(ParameterError):
        energy(spec, grid, np.zeros(65), 0.5, 2.0, 1.0)


def test_energy_stationary_at_solution():
    spec = make_spec("euclidean", 2, 1.0, "gelfand", a="r^2/4")
    grid = make_grid(1.0, 512)
    lam = 1.5
    u = newton_solve(spec, grid, lam).u
    rng = np.random.default_rng(0)
    h = 1e-6
    for _ in range(20):
        d = rng.standard_normal(u.size)
        d[-1] = 0
        d *= h / np.max(np.abs(d))
        dJ = energy(spec, grid, u + d, 0.5, 2.0, lam) - energy(spec, grid, u - d, 0.5, 2.0, lam)
        dK = energy(spec, grid, u + d, 0.5, 2.0, 0) - energy(spec, grid, u - d, 0.5, 2.0, 0)
        assert abs(dJ) <= 1e-4 * abs(dK)


# ---------------------------------------------------------------- invariant

def _t_strategy(kind):
    if kind == "mems":
        return st.floats(0.05, MEMS_T_MAX - 0.05)
    if kind == "gelfand":
        return st.floats(0.05, 1.95)
    return st.floats(2 - math.sqrt(2) + 0.01, 2 + math.sqrt(2) - 0.01)


@settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.data())
def test_lp_bounds_hold_on_minimal_solutions(data):
    label, spec = data.draw(st.sampled_from(suite.configs()))
    kind = spec.nonlinearity.kind
    grading = "boundary-refined" if kind == "mems" else "uniform"
    grid = make_grid(1.0, 128, grading)
    lower, _ = lambda_star_bounds(spec, grid)
    lam = data.draw(st.floats(0.05, 0.99)) * lower
    t = data.draw(_t_strategy(kind))
    sol = newton_solve(spec, grid, lam)
    rep = lp_bound(sol, t)
    assert rep.params["semi_stable"]
    assert rep.satisfied, (label, lam, t, rep.to_dict())
    assert pointwise_decay_check(sol, data.draw(st.floats(1.0, 6.0))).satisfied
