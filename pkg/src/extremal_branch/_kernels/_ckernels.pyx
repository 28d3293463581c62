# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled tridiagonal kernels.

Band layout used throughout: ``lower[i]`` couples row i to i-1 (``lower[0]``
unused), ``upper[i]`` couples row i to i+1 (``upper[n-1]`` unused).
"""

import numpy as np
cimport numpy as cnp

from ..errors import SingularOperatorError

cnp.import_array()


def tridiag_solve(const double[::1] lower, const double[::1] diag, const double[::1] upper,
                  const double[::1] rhs):
    cdef Py_ssize_t n = diag.shape[0]
    cdef Py_ssize_t i
    cdef double piv
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.empty(n)
    cdef double[::1] xv = x
    cdef double[::1] cp = np.empty(n)

    piv = diag[0]
    if piv == 0.0:
        raise SingularOperatorError("singular operator")
    cp[0] = upper[0] / piv
    xv[0] = rhs[0] / piv
    for i in range(1, n):
        piv = diag[i] - lower[i] * cp[i - 1]
        if piv == 0.0:
            raise SingularOperatorError("singular operator")
        cp[i] = upper[i] / piv
        xv[i] = (rhs[i] - lower[i] * xv[i - 1]) / piv
    for i in range(n - 2, -1, -1):
        xv[i] -= cp[i] * xv[i + 1]
    return x


def tridiag_matvec(const double[::1] lower, const double[::1] diag, const double[::1] upper,
                   const double[::1] x):
    cdef Py_ssize_t n = diag.shape[0]
    cdef Py_ssize_t i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y = np.empty(n)
    cdef double[::1] yv = y
    for i in range(n):
        yv[i] = diag[i] * x[i]
        if i > 0:
            yv[i] += lower[i] * x[i - 1]
        if i < n - 1:
            yv[i] += upper[i] * x[i + 1]
    return y


def sturm_count(const double[::1] diag, const double[::1] offsq, double sigma):
    """Number of eigenvalues below sigma of the symmetric tridiagonal matrix
    with diagonal ``diag`` and squared off-diagonal ``offsq``."""
    cdef Py_ssize_t n = diag.shape[0]
    cdef Py_ssize_t i
    cdef int count = 0
    cdef double q = diag[0] - sigma
    if q < 0.0:
        count += 1
    for i in range(1, n):
        if q == 0.0:
            q = 1e-300
        q = diag[i] - sigma - offsq[i - 1] / q
        if q < 0.0:
            count += 1
    return count


def bordered_solve(const double[::1] lower, const double[::1] diag, const double[::1] upper,
                   const double[::1] col, double c0, double d, const double[::1] rhs,
                   double s):
    """Solve [[T, col], [c0 e_0^T, d]] [x; y] = [rhs; s].

    Eliminates from the last row upward so every pivot belongs to the
    trailing block without the pole row; the (possibly singular) pole row
    only enters the final 2x2 system together with the border.
    """
    cdef Py_ssize_t n = diag.shape[0]
    cdef Py_ssize_t i
    cdef double den, a11, a12, b1, det, y, x0
    cdef double[::1] p = np.empty(n)
    cdef double[::1] q = np.empty(n)
    cdef double[::1] g = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.empty(n)
    cdef double[::1] xv = x

    # x_i = p_i + q_i x_{i-1} + g_i y for i >= 1
    den = diag[n - 1]
    if den == 0.0:
        raise SingularOperatorError("singular bordered operator")
    p[n - 1] = rhs[n - 1] / den
    q[n - 1] = -lower[n - 1] / den
    g[n - 1] = -col[n - 1] / den
    for i in range(n - 2, 0, -1):
        den = diag[i] + upper[i] * q[i + 1]
        if den == 0.0:
            raise SingularOperatorError("singular bordered operator")
        p[i] = (rhs[i] - upper[i] * p[i + 1]) / den
        q[i] = -lower[i] / den
        g[i] = -(col[i] + upper[i] * g[i + 1]) / den

    a11 = diag[0] + upper[0] * q[1]
    a12 = col[0] + upper[0] * g[1]
    b1 = rhs[0] - upper[0] * p[1]
    det = a11 * d - a12 * c0
    if det == 0.0:
        raise SingularOperatorError("singular bordered operator")
    x0 = (b1 * d - a12 * s) / det
    y = (a11 * s - c0 * b1) / det

    xv[0] = x0
    for i in range(1, n):
        xv[i] = p[i] + q[i] * xv[i - 1] + g[i] * y
    return x, y
