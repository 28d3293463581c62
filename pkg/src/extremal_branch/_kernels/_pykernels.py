"""Pure Python/NumPy implementations of the hot kernels.

Same signatures as the compiled ``_ckernels`` module. Tridiagonal and
bordered solves lean on LAPACK/SuperLU through SciPy; the Sturm count is
an inherently sequential recurrence and runs as a plain loop.
"""

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from ..errors import SingularOperatorError


def tridiag_solve(lower, diag, upper, rhs):
    n = diag.shape[0]
    ab = np.empty((3, n))
    ab[0, 1:] = upper[:-1]
    ab[0, 0] = 0.0
    ab[1] = diag
    ab[2, :-1] = lower[1:]
    ab[2, -1] = 0.0
    try:
        x = scipy.linalg.solve_banded((1, 1), ab, rhs, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SingularOperatorError("singular operator") from exc
    if not np.all(np.isfinite(x)):
        raise SingularOperatorError("singular operator")
    return x


def tridiag_matvec(lower, diag, upper, x):
    y = diag * x
    y[1:] += lower[1:] * x[:-1]
    y[:-1] += upper[:-1] * x[1:]
    return y


def sturm_count(diag, offsq, sigma):
    d = diag.tolist()
    e2 = offsq.tolist()
    count = 0
    q = d[0] - sigma
    if q < 0.0:
        count += 1
    tiny = 1e-300
    for i in range(1, len(d)):
        if q == 0.0:
            q = tiny
        q = d[i] - sigma - e2[i - 1] / q
        if q < 0.0:
            count += 1
    return count


def bordered_solve(lower, diag, upper, col, c0, d, rhs, s):
    n = diag.shape[0]
    offsets = [-1, 0, 1]
    T = scipy.sparse.diags([lower[1:], diag, upper[:-1]], offsets, shape=(n, n),
                           format="csc")
    border_col = scipy.sparse.csc_matrix(col.reshape(n, 1))
    border_row = scipy.sparse.csc_matrix(([c0], ([0], [0])), shape=(1, n))
    K = scipy.sparse.bmat([[T, border_col], [border_row, np.array([[d]])]],
                          format="csc")
    b = np.empty(n + 1)
    b[:n] = rhs
    b[n] = s
    try:
        z = scipy.sparse.linalg.splu(K).solve(b)
    except RuntimeError as exc:
        raise SingularOperatorError("singular bordered operator") from exc
    if not np.all(np.isfinite(z)):
        raise SingularOperatorError("singular bordered operator")
    return z[:n], float(z[n])
