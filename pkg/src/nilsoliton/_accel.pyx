# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels: moment evaluation and the normalized gradient flow.

Semantics mirror nilsoliton._reference exactly (same statuses, same Armijo
rule, same degeneracy check); only summation order and the small symmetric
eigenvalue solve (cyclic Jacobi here) differ, so results agree to rounding.
"""

import numpy as np

from libc.float cimport DBL_EPSILON
from libc.math cimport INFINITY, isfinite, sqrt

BACKEND_NAME = "compiled"

STATUS_FOUND = 0
STATUS_DEGENERATED = 1
STATUS_MAX_ITER = 2

cdef enum:
    C_FOUND = 0
    C_DEGENERATED = 1
    C_MAX_ITER = 2

# Armijo constant; when the required decrease is below the rounding
# resolution of the objective the test switches to "no increase beyond one
# rounding quantum" (see _reference for the rationale).
cdef double ARMIJO = 1e-4
cdef double FLOOR_EPS = 8.0 * DBL_EPSILON


cdef void _parts(const double[:, :, ::1] mats, double[:, ::1] m1,
                 double[:, ::1] m2, Py_ssize_t p, Py_ssize_t q) noexcept nogil:
    cdef Py_ssize_t k, l, a, b, c
    cdef double s
    for a in range(q):
        for c in range(q):
            m1[a, c] = 0.0
    for k in range(p):
        for a in range(q):
            for c in range(q):
                s = 0.0
                for b in range(q):
                    s += mats[k, a, b] * mats[k, b, c]
                m1[a, c] -= 2.0 * s
    for k in range(p):
        for l in range(p):
            s = 0.0
            for a in range(q):
                for b in range(q):
                    s += mats[k, a, b] * mats[l, a, b]
            m2[k, l] = s


cdef void _action(const double[:, :, ::1] mats, const double[:, ::1] m1,
                  const double[:, ::1] m2, double[:, :, ::1] out,
                  Py_ssize_t p, Py_ssize_t q) noexcept nogil:
    cdef Py_ssize_t k, l, a, b, c
    cdef double s
    for k in range(p):
        for a in range(q):
            for b in range(q):
                s = 0.0
                for c in range(q):
                    s += m1[a, c] * mats[k, c, b] + mats[k, a, c] * m1[c, b]
                for l in range(p):
                    s += m2[k, l] * mats[l, a, b]
                out[k, a, b] = s


cdef double _dot3(const double[:, :, ::1] x, const double[:, :, ::1] y,
                  Py_ssize_t p, Py_ssize_t q) noexcept nogil:
    cdef Py_ssize_t k, a, b
    cdef double s = 0.0
    for k in range(p):
        for a in range(q):
            for b in range(q):
                s += x[k, a, b] * y[k, a, b]
    return s


cdef double _dot2(const double[:, ::1] x, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double s = 0.0
    for i in range(n):
        for j in range(n):
            s += x[i, j] * x[i, j]
    return s


cdef void _sym_eig_bounds(const double[:, ::1] a, double[:, ::1] work,
                          Py_ssize_t n, double* lo, double* hi) noexcept nogil:
    """Min/max eigenvalue of symmetric a via cyclic Jacobi on a copy."""
    cdef Py_ssize_t i, j, k, sweep
    cdef double off, diag, apq, app, aqq, theta, t, cth, sth, tmp
    for i in range(n):
        for j in range(n):
            work[i, j] = a[i, j]
    for sweep in range(64):
        off = 0.0
        diag = 0.0
        for i in range(n):
            diag += work[i, i] * work[i, i]
            for j in range(i + 1, n):
                off += work[i, j] * work[i, j]
        if off == 0.0 or off <= 1e-30 * (diag + off):
            break
        for i in range(n):
            for j in range(i + 1, n):
                apq = work[i, j]
                if apq == 0.0:
                    continue
                app = work[i, i]
                aqq = work[j, j]
                theta = (aqq - app) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + sqrt(theta * theta + 1.0))
                cth = 1.0 / sqrt(1.0 + t * t)
                sth = t * cth
                for k in range(n):
                    tmp = work[k, i]
                    work[k, i] = cth * tmp - sth * work[k, j]
                    work[k, j] = sth * tmp + cth * work[k, j]
                for k in range(n):
                    tmp = work[i, k]
                    work[i, k] = cth * tmp - sth * work[j, k]
                    work[j, k] = sth * tmp + cth * work[j, k]
    lo[0] = work[0, 0]
    hi[0] = work[0, 0]
    for i in range(1, n):
        if work[i, i] < lo[0]:
            lo[0] = work[i, i]
        if work[i, i] > hi[0]:
            hi[0] = work[i, i]


def moment_parts(mats):
    arr = np.ascontiguousarray(mats, dtype=np.float64)
    cdef Py_ssize_t p = arr.shape[0], q = arr.shape[1]
    m1 = np.empty((q, q), dtype=np.float64)
    m2 = np.empty((p, p), dtype=np.float64)
    cdef const double[:, :, ::1] mv = arr
    cdef double[:, ::1] v1 = m1, v2 = m2
    with nogil:
        _parts(mv, v1, v2, p, q)
    return m1, m2


def moment_action(mats, m1, m2):
    arr = np.ascontiguousarray(mats, dtype=np.float64)
    a1 = np.ascontiguousarray(m1, dtype=np.float64)
    a2 = np.ascontiguousarray(m2, dtype=np.float64)
    cdef Py_ssize_t p = arr.shape[0], q = arr.shape[1]
    out = np.empty_like(arr)
    cdef const double[:, :, ::1] mv = arr
    cdef const double[:, ::1] v1 = a1, v2 = a2
    cdef double[:, :, ::1] ov = out
    with nogil:
        _action(mv, v1, v2, ov, p, q)
    return out


cdef struct FlowOut:
    int status
    long it
    long err_it
    double res
    double r
    double min_sigma
    double f


cdef FlowOut _flow_loop(double[:, :, ::1] c, double[:, ::1] m1,
                        double[:, ::1] m2, double[:, :, ::1] w,
                        double[:, :, ::1] g, double[:, :, ::1] cand,
                        double[:, ::1] m1n, double[:, ::1] m2n,
                        double[:, ::1] work, double[::1] trace, bint use_trace,
                        Py_ssize_t p, Py_ssize_t q, double tol,
                        double rank_tol, long max_iter, double eta0,
                        double shrink, long max_backtracks) noexcept nogil:
    cdef FlowOut o
    cdef Py_ssize_t k, a, b
    cdef long it = 0, bt
    cdef double f, r, gn2, res, lo, hi, sigma, eta, nrm, fn, need, floor
    cdef double min_sigma = INFINITY
    cdef bint accepted

    o.err_it = -1
    o.status = C_MAX_ITER
    f = _dot2(m1, q) + _dot2(m2, p)
    while True:
        _action(c, m1, m2, w, p, q)
        r = _dot3(w, c, p, q)
        for k in range(p):
            for a in range(q):
                for b in range(q):
                    g[k, a, b] = w[k, a, b] - r * c[k, a, b]
        gn2 = _dot3(g, g, p, q)
        res = sqrt(gn2) / (1.0 + sqrt(f))
        if not isfinite(res) or not isfinite(f):
            o.err_it = it
            break
        if use_trace:
            trace[it] = res

        _sym_eig_bounds(m2, work, p, &lo, &hi)
        if lo < 0.0:
            lo = 0.0
        sigma = sqrt(lo)
        if sigma < min_sigma:
            min_sigma = sigma
        if hi <= 0.0 or sigma < rank_tol * sqrt(hi):
            o.status = C_DEGENERATED
            break
        if res < tol:
            o.status = C_FOUND
            break
        if it >= max_iter:
            o.status = C_MAX_ITER
            break

        eta = eta0
        accepted = False
        for bt in range(max_backtracks + 1):
            for k in range(p):
                for a in range(q):
                    for b in range(q):
                        cand[k, a, b] = c[k, a, b] - eta * g[k, a, b]
            nrm = sqrt(_dot3(cand, cand, p, q))
            for k in range(p):
                for a in range(q):
                    for b in range(q):
                        cand[k, a, b] /= nrm
            _parts(cand, m1n, m2n, p, q)
            fn = _dot2(m1n, q) + _dot2(m2n, p)
            need = ARMIJO * eta * 4.0 * gn2
            floor = FLOOR_EPS * (1.0 + f)
            if fn <= (f - need if need > floor else f + floor):
                accepted = True
                break
            eta *= shrink
        if not accepted:
            o.status = C_MAX_ITER
            break
        for k in range(p):
            for a in range(q):
                for b in range(q):
                    c[k, a, b] = cand[k, a, b]
        for a in range(q):
            for b in range(q):
                m1[a, b] = m1n[a, b]
        for a in range(p):
            for b in range(p):
                m2[a, b] = m2n[a, b]
        f = fn
        it += 1

    o.it = it
    o.res = res
    o.r = r
    o.min_sigma = min_sigma
    o.f = f
    return o


def flow_run(mats, double tol, double rank_tol, long max_iter, double eta0,
             double shrink, long max_backtracks, bint want_trace=False):
    """Projected gradient descent on ||m(C)||^2 over the unit sphere.

    Same contract as the python backend: returns (C, status, iterations,
    residual, r, min_rank_sigma, objective, trace).
    """
    c = np.array(mats, dtype=np.float64, order="C")
    nrm = float(np.sqrt(np.sum(c * c)))
    if nrm == 0.0 or not np.isfinite(nrm):
        raise ValueError("flow requires a nonzero finite tensor")
    c /= nrm
    cdef Py_ssize_t p = c.shape[0], q = c.shape[1]

    m1 = np.empty((q, q), dtype=np.float64)
    m2 = np.empty((p, p), dtype=np.float64)
    w = np.empty_like(c)
    g = np.empty_like(c)
    cand = np.empty_like(c)
    m1n = np.empty((q, q), dtype=np.float64)
    m2n = np.empty((p, p), dtype=np.float64)
    work = np.empty((p, p), dtype=np.float64)
    trace = np.empty(max_iter + 1 if want_trace else 1, dtype=np.float64)

    cdef double[:, :, ::1] cv = c, wv = w, gv = g, candv = cand
    cdef double[:, ::1] v1 = m1, v2 = m2, v1n = m1n, v2n = m2n, wk = work
    cdef double[::1] tr = trace
    cdef FlowOut o

    with nogil:
        _parts(cv, v1, v2, p, q)
        o = _flow_loop(cv, v1, v2, wv, gv, candv, v1n, v2n, wk, tr,
                       want_trace, p, q, tol, rank_tol, max_iter, eta0,
                       shrink, max_backtracks)
    if o.err_it >= 0:
        raise FloatingPointError(f"flow produced a non-finite value at "
                                 f"iteration {o.err_it}")
    out_trace = trace[: o.it + 1].copy() if want_trace else None
    return c, o.status, o.it, float(o.res), o.r, float(o.min_sigma), o.f, out_trace
