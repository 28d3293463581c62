import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from extremal_branch import _kernels
from extremal_branch._kernels import _pykernels
from extremal_branch.errors import SingularOperatorError

try:
    from extremal_branch._kernels import _ckernels
    BACKENDS = [_pykernels, _ckernels]
except ImportError:  # pragma: no cover
    BACKENDS = [_pykernels]


def random_band(rng, n, dominant=True):
    lower = rng.uniform(-1, 0, n)
    upper = rng.uniform(-1, 0, n)
    lower[0] = 0.0
    upper[-1] = 0.0
    diag = -(lower + upper) + (rng.uniform(0.1, 1, n) if dominant else rng.uniform(-1, 1, n))
    return lower, diag, upper


def dense(lower, diag, upper):
    n = diag.size
    A = np.diag(diag)
    A[np.arange(1, n), np.arange(n - 1)] = lower[1:]
    A[np.arange(n - 1), np.arange(1, n)] = upper[:-1]
    return A


def test_backend_reported():
    assert _kernels.BACKEND in ("cython", "python")


@pytest.mark.parametrize("mod", BACKENDS)
@given(n=st.integers(3, 60), seed=st.integers(0, 2**31))
@settings(max_examples=40, deadline=None)
def test_tridiag_solve_matches_dense(mod, n, seed):
    rng = np.random.default_rng(seed)
    lo, d, up = random_band(rng, n)
    b = rng.normal(size=n)
    x = mod.tridiag_solve(lo, d, up, b)
    assert np.allclose(dense(lo, d, up) @ x, b, atol=1e-10)
    assert np.allclose(mod.tridiag_matvec(lo, d, up, x), b, atol=1e-10)


@pytest.mark.parametrize("mod", BACKENDS)
def test_zero_pivot_raises(mod):
    # first row identically zero
    lo = np.array([0.0, 1.0, 1.0])
    d = np.array([0.0, 1.0, 1.0])
    up = np.array([0.0, 1.0, 0.0])
    with pytest.raises(SingularOperatorError):
        mod.tridiag_solve(lo, d, up, np.ones(3))


@pytest.mark.parametrize("mod", BACKENDS)
@given(n=st.integers(3, 40), seed=st.integers(0, 2**31))
@settings(max_examples=40, deadline=None)
def test_sturm_count_matches_eigvalsh(mod, n, seed):
    rng = np.random.default_rng(seed)
    d = rng.normal(size=n)
    e = rng.normal(size=n - 1)
    ev = scipy.linalg.eigvalsh_tridiagonal(d, e)
    sigma = float(rng.normal())
    if np.min(np.abs(ev - sigma)) < 1e-8:
        return
    assert mod.sturm_count(d, e**2, sigma) == int(np.sum(ev < sigma))


@pytest.mark.parametrize("mod", BACKENDS)
@given(n=st.integers(3, 50), seed=st.integers(0, 2**31))
@settings(max_examples=40, deadline=None)
def test_bordered_solve_matches_dense(mod, n, seed):
    rng = np.random.default_rng(seed)
    lo, d, up = random_band(rng, n)
    col = rng.normal(size=n)
    c0, dd = float(rng.normal()), float(rng.normal())
    b = rng.normal(size=n)
    s = float(rng.normal())
    K = np.zeros((n + 1, n + 1))
    K[:n, :n] = dense(lo, d, up)
    K[:n, n] = col
    K[n, 0] = c0
    K[n, n] = dd
    if np.linalg.cond(K) > 1e8:
        return
    z = np.linalg.solve(K, np.append(b, s))
    x, y = mod.bordered_solve(lo, d, up, col, c0, dd, b, s)
    assert np.allclose(x, z[:n], atol=1e-8 * np.abs(z).max())
    assert abs(y - z[n]) <= 1e-8 * np.abs(z).max()


@pytest.mark.parametrize("mod", BACKENDS)
def test_bordered_solve_with_singular_block(mod):
    # T singular (zero row sum with Neumann ends), border makes it regular
    n = 20
    lo = np.full(n, -1.0)
    up = np.full(n, -1.0)
    lo[0] = 0.0
    up[-1] = 0.0
    d = np.full(n, 2.0)
    d[0] = 1.0
    d[-1] = 1.0
    col = np.ones(n)
    x, y = mod.bordered_solve(lo, d, up, col, 1.0, 0.0, np.zeros(n), 1.0)
    K = np.zeros((n + 1, n + 1))
    K[:n, :n] = dense(lo, d, up)
    K[:n, n] = col
    K[n, 0] = 1.0
    z = np.linalg.solve(K, np.append(np.zeros(n), 1.0))
    assert np.allclose(x, z[:n]) and np.isclose(y, z[n])


def test_backends_agree():
    rng = np.random.default_rng(7)
    lo, d, up = random_band(rng, 200)
    b = rng.normal(size=200)
    results = [m.tridiag_solve(lo, d, up, b) for m in BACKENDS]
    for r in results[1:]:
        assert np.allclose(r, results[0], rtol=1e-12, atol=1e-12)
