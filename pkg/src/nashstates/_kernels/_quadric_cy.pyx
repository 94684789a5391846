# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled quadric kernels.

Same contract and control flow as ``_quadric_py``; the least-squares step
uses LAPACK dgelss (SVD-based min-norm solve, identical rcond semantics to
``numpy.linalg.lstsq``).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs
from scipy.linalg.cython_lapack cimport dgelss

cnp.import_array()

BACKEND_NAME = "cython"

cdef int _CONVERGED = 0
cdef int _NO_CONVERGENCE = 1
cdef int _RANK_COLLAPSE = 2

GN_CONVERGED = _CONVERGED
GN_NO_CONVERGENCE = _NO_CONVERGENCE
GN_RANK_COLLAPSE = _RANK_COLLAPSE

cdef double _ALPHA_MIN = 1e-12


cdef void _qvals(const double[:, :, ::1] forms, const double* v, double* out) noexcept nogil:
    cdef Py_ssize_t c, i, j, n = forms.shape[1]
    cdef double acc, row
    for c in range(forms.shape[0]):
        acc = 0.0
        for i in range(n):
            row = 0.0
            for j in range(n):
                row += forms[c, i, j] * v[j]
            acc += v[i] * row
        out[c] = acc


cdef void _residual(const double[:, :, ::1] forms, const double[:, ::1] linear,
                    const double* v, double* out) noexcept nogil:
    cdef Py_ssize_t c = forms.shape[0], l = linear.shape[0], n = forms.shape[1]
    cdef Py_ssize_t i, j
    cdef double acc
    _qvals(forms, v, out)
    for i in range(l):
        acc = 0.0
        for j in range(n):
            acc += linear[i, j] * v[j]
        out[c + i] = acc
    acc = 0.0
    for j in range(n):
        acc += v[j] * v[j]
    out[c + l] = acc - 1.0


def quadric_values(const double[:, :, ::1] forms, const double[::1] v):
    """Values v^T Q_c v for a stack of symmetric forms, shape (C,)."""
    out = np.empty(forms.shape[0], dtype=np.float64)
    cdef double[::1] mv = out
    if forms.shape[0]:
        _qvals(forms, &v[0], &mv[0])
    return out


def quadric_gradients(const double[:, :, ::1] forms, const double[::1] v):
    """Gradients 2 Q_c v, shape (C, n)."""
    cdef Py_ssize_t c, i, j, n = forms.shape[1]
    out = np.empty((forms.shape[0], n), dtype=np.float64)
    cdef double[:, ::1] mv = out
    cdef double acc
    for c in range(forms.shape[0]):
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc += forms[c, i, j] * v[j]
            mv[c, i] = 2.0 * acc
    return out


def residual_vector(const double[:, :, ::1] forms, linear, const double[::1] v):
    """Stacked residual [quadrics; linear rows; norm constraint]."""
    lin = _as_linear(linear, forms.shape[1])
    cdef const double[:, ::1] lv = lin
    out = np.empty(forms.shape[0] + lin.shape[0] + 1, dtype=np.float64)
    cdef double[::1] mv = out
    _residual(forms, lv, &v[0], &mv[0])
    return out


cdef _as_linear(linear, Py_ssize_t n):
    if linear is None:
        return np.empty((0, n), dtype=np.float64)
    return np.ascontiguousarray(linear, dtype=np.float64)


def gauss_newton(const double[:, :, ::1] forms, linear, const double[::1] v0,
                 double tol, int max_iter, double damping=0.5, double rcond=1e-10):
    """Damped Gauss-Newton; returns ``(v, residual_inf, status, iterations)``."""
    lin_arr = _as_linear(linear, forms.shape[1])
    cdef const double[:, ::1] lin = lin_arr
    cdef Py_ssize_t C = forms.shape[0], L = lin.shape[0], n = forms.shape[1]
    cdef Py_ssize_t m = C + L + 1
    cdef int im = <int> m, in_ = <int> n, nrhs = 1, info = 0, rank = 0, lwork = -1

    v_arr = np.array(v0, dtype=np.float64, copy=True)
    cdef double[::1] v = v_arr
    trial_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] trial = trial_arr
    r_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] r = r_arr
    rt_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] rt = rt_arr
    # Jacobian in Fortran order == its transpose in C order.
    jt_arr = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] jt = jt_arr
    rhs_arr = np.empty(max(m, n), dtype=np.float64)
    cdef double[::1] rhs = rhs_arr
    sv_arr = np.empty(min(m, n), dtype=np.float64)
    cdef double[::1] sv = sv_arr
    cdef int ldb = <int> max(m, n)

    # workspace query
    cdef double wkopt = 0.0
    dgelss(&im, &in_, &nrhs, &jt[0, 0], &im, &rhs[0], &ldb, &sv[0], &rcond,
           &rank, &wkopt, &lwork, &info)
    lwork = <int> wkopt
    work_arr = np.empty(max(lwork, 1), dtype=np.float64)
    cdef double[::1] work = work_arr

    cdef Py_ssize_t it, i, j, row
    cdef double rinf, acc, f0, ft, alpha
    cdef int status = _NO_CONVERGENCE
    cdef Py_ssize_t niter = max_iter

    with nogil:
        for it in range(max_iter + 1):
            _residual(forms, lin, &v[0], &r[0])
            rinf = 0.0
            for i in range(m):
                if fabs(r[i]) > rinf:
                    rinf = fabs(r[i])
            if rinf < tol:
                status = _CONVERGED
                niter = it
                break
            if it == max_iter:
                status = _NO_CONVERGENCE
                niter = it
                break
            # rows 0..C-1: 2 Q_c v ; rows C..C+L-1: linear ; last row: 2 v
            for row in range(C):
                for i in range(n):
                    acc = 0.0
                    for j in range(n):
                        acc += forms[row, i, j] * v[j]
                    jt[i, row] = 2.0 * acc
            for row in range(L):
                for i in range(n):
                    jt[i, C + row] = lin[row, i]
            for i in range(n):
                jt[i, m - 1] = 2.0 * v[i]
            for i in range(m):
                rhs[i] = -r[i]
            dgelss(&im, &in_, &nrhs, &jt[0, 0], &im, &rhs[0], &ldb, &sv[0],
                   &rcond, &rank, &work[0], &lwork, &info)
            if info != 0 or rank == 0:
                status = _RANK_COLLAPSE
                niter = it
                break
            f0 = 0.0
            for i in range(m):
                f0 += r[i] * r[i]
            alpha = 1.0
            while True:
                for i in range(n):
                    trial[i] = v[i] + alpha * rhs[i]
                _residual(forms, lin, &trial[0], &rt[0])
                ft = 0.0
                for i in range(m):
                    ft += rt[i] * rt[i]
                if ft < f0 or alpha < _ALPHA_MIN:
                    break
                alpha *= damping
            if ft >= f0:
                status = _NO_CONVERGENCE
                niter = it
                break
            for i in range(n):
                v[i] = trial[i]

    return v_arr, rinf, status, int(niter)
