# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled history kernels; same contract as ``fracred._pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport pow, tgamma, isfinite

cnp.import_array()


def product_trapezoid(values, double alpha, double h):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] f = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t n = f.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n)
    if n < 2:
        return out
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.empty(n)
    cdef Py_ssize_t k, j, l
    cdef double s, a0, scale = pow(h, alpha) / tgamma(alpha + 2)
    w[0] = 1.0
    for l in range(1, n):
        w[l] = pow(l + 1, alpha + 1) - 2.0 * pow(l, alpha + 1) + pow(l - 1, alpha + 1)
    for k in range(1, n):
        s = f[k]
        for j in range(1, k):
            s += w[k - j] * f[j]
        a0 = pow(k - 1, alpha + 1) - (k - 1 - alpha) * pow(k, alpha)
        out[k] = scale * (s + a0 * f[0])
    return out


def l1_caputo(values, double alpha, double h):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] f = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t n = f.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] b = np.empty(n)
    cdef Py_ssize_t k, j
    cdef double s, scale = pow(h, -alpha) / tgamma(2 - alpha)
    for j in range(n):
        b[j] = pow(j + 1, 1 - alpha) - pow(j, 1 - alpha)
    for k in range(1, n):
        s = 0.0
        for j in range(k):
            s += b[j] * (f[k - j] - f[k - j - 1])
        out[k] = scale * s
    return out


def abm_solve(rhs, orders, x0, double t0, double h, Py_ssize_t nsteps,
              int corrector_iterations=1, forcing=None, matrix=None):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x0v = np.ascontiguousarray(x0, dtype=np.float64)
    cdef Py_ssize_t d = x0v.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ordv = np.ascontiguousarray(orders, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] X = np.zeros((nsteps + 1, d))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] F = np.zeros((nsteps + 1, d))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] P = np.empty((d, nsteps + 1))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] C = np.empty((d, nsteps + 1))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pscale = np.empty(d)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cscale = np.empty(d)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xp = np.empty(d)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] hist = np.empty(d)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] fx
    cdef cnp.ndarray[cnp.float64_t, ndim=2] A
    cdef cnp.ndarray[cnp.float64_t, ndim=2] G
    cdef bint linear = matrix is not None
    cdef bint forced = forcing is not None
    cdef Py_ssize_t i, j, l, m, r, it
    cdef double b, s, a0

    if linear:
        A = np.ascontiguousarray(matrix, dtype=np.float64)
        G = np.ascontiguousarray(forcing, dtype=np.float64) if forced else np.zeros((1, d))
    for i in range(d):
        b = ordv[i]
        pscale[i] = pow(h, b) / tgamma(b + 1)
        cscale[i] = pow(h, b) / tgamma(b + 2)
        for l in range(nsteps + 1):
            P[i, l] = pow(l + 1, b) - pow(l, b)
            C[i, l] = pow(l + 1, b + 1) + pow(l - 1, b + 1) - 2.0 * pow(l, b + 1) if l > 0 else 1.0

    X[0, :] = x0v
    F[0, :] = _evaluate(rhs, A, G, linear, forced, 0, t0, x0v)
    for i in range(d):
        if not isfinite(F[0, i]):
            return X, 0

    for m in range(nsteps):
        for i in range(d):
            b = ordv[i]
            s = 0.0
            for j in range(m + 1):
                s += P[i, m - j] * F[j, i]
            xp[i] = x0v[i] + pscale[i] * s
            a0 = pow(m, b + 1) - (m - b) * pow(m + 1, b)
            s = a0 * F[0, i]
            for j in range(1, m + 1):
                s += C[i, m - j + 1] * F[j, i]
            hist[i] = s
        x = xp.copy()
        for it in range(corrector_iterations):
            fx = _evaluate(rhs, A, G, linear, forced, m + 1, t0 + (m + 1) * h, x)
            xc = np.empty(d)
            for i in range(d):
                xc[i] = x0v[i] + cscale[i] * (fx[i] + hist[i])
            x = xc
        X[m + 1, :] = x
        F[m + 1, :] = _evaluate(rhs, A, G, linear, forced, m + 1, t0 + (m + 1) * h, x)
        for i in range(d):
            if not (isfinite(X[m + 1, i]) and isfinite(F[m + 1, i])):
                return X, m + 1
    return X, -1


cdef cnp.ndarray _evaluate(rhs, cnp.ndarray A, cnp.ndarray G, bint linear, bint forced,
                           Py_ssize_t m, double t, x):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Av
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Gv
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xv
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y
    cdef Py_ssize_t i, j, d
    cdef double s
    if not linear:
        return np.ascontiguousarray(rhs(t, x), dtype=np.float64)
    Av = A
    Gv = G
    xv = x
    d = xv.shape[0]
    y = np.empty(d)
    for i in range(d):
        s = Gv[m, i] if forced else 0.0
        for j in range(d):
            s += Av[i, j] * xv[j]
        y[i] = s
    return y
