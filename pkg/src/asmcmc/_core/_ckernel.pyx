# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled chain kernel; see ``_pykernel.py`` for the reference semantics."""

from libc.math cimport exp, log, log1p, sqrt, pow, INFINITY
cdef enum:
    MAXD = 64

cdef enum:
    GAUSSIAN = 0
    EXPONENTIAL_POWER = 1
    UNIFORM_BALL = 2
    UNIFORM_BOX = 3
    SMOOTH_BUMP = 4


cdef double _logpdf(int code, const double[::1] p, const double* x, int d,
                    double* w) noexcept nogil:
    cdef int i, j
    cdef double q, acc, r2, t, u
    if code == GAUSSIAN:
        q = 0.0
        for i in range(d):
            acc = x[i] - p[1 + i]
            for j in range(i):
                acc = acc - p[1 + d + i * d + j] * w[j]
            w[i] = acc / p[1 + d + i * d + i]
            q = q + w[i] * w[i]
        return p[0] - 0.5 * q
    if code == EXPONENTIAL_POWER:
        r2 = 0.0
        for i in range(d):
            r2 = r2 + x[i] * x[i]
        return p[0] - pow(sqrt(r2) / p[2], p[1])
    if code == UNIFORM_BALL:
        r2 = 0.0
        for i in range(d):
            t = x[i] - p[2 + i]
            r2 = r2 + t * t
        if r2 <= p[1]:
            return p[0]
        return -INFINITY
    if code == UNIFORM_BOX:
        for i in range(d):
            if not (p[1 + i] <= x[i] and x[i] <= p[1 + d + i]):
                return -INFINITY
        return p[0]
    if code == SMOOTH_BUMP:
        r2 = 0.0
        for i in range(d):
            t = x[i] - p[3 + i]
            r2 = r2 + t * t
        t = r2 / p[1]
        if t > 1.0:
            return -INFINITY
        u = 1.0 - t
        return p[0] + log(p[2] + (1.0 - p[2]) * (u * u))
    return -INFINITY


cdef inline double _phi(int code, double param, double s) noexcept nogil:
    cdef double sp
    if code == 0:
        return exp(s)
    if s > 0.0:
        sp = s + log1p(exp(-s))
    else:
        sp = log1p(exp(s))
    return pow(sp, param)


def logpdf(int code, const double[::1] params, const double[::1] x):
    cdef int d = x.shape[0]
    cdef double w[MAXD]
    if d > MAXD:
        raise ValueError("dimension too large for the compiled kernel")
    return _logpdf(code, params, &x[0], d, w)


def run_chain(int code, const double[::1] params, double[::1] x, double s,
              const double[:, ::1] W, const double[::1] U,
              const double[::1] eta, double alpha_star, bint adapt,
              bint binary, lo, hi, int phi_code, double phi_param,
              double[:, ::1] X_out, double[::1] S_out, double[::1] A_out,
              signed char[::1] ACC_out, log_density=None):
    if log_density is not None:
        raise ValueError("the compiled kernel only runs builtin targets")
    cdef Py_ssize_t n = W.shape[0]
    cdef int d = W.shape[1]
    if d > MAXD:
        raise ValueError("dimension too large for the compiled kernel")
    cdef const double[::1] lov
    cdef const double[::1] hiv
    cdef bint restricted = lo is not None
    if restricted:
        lov = lo
        hiv = hi
    cdef double xs[MAXD]
    cdef double ys[MAXD]
    cdef double work[MAXD]
    cdef Py_ssize_t k
    cdef int i
    cdef double lp, ly, v, a, h, s_new, theta
    cdef bint accepted
    for i in range(d):
        xs[i] = x[i]
    with nogil:
        lp = _logpdf(code, params, xs, d, work)
        theta = _phi(phi_code, phi_param, s)
        for k in range(n):
            for i in range(d):
                ys[i] = xs[i] + theta * W[k, i]
            ly = _logpdf(code, params, ys, d, work)
            v = ly - lp
            if v < 0.0:
                a = exp(v)
            else:
                a = exp(0.0)
            accepted = U[k] <= a
            if accepted:
                for i in range(d):
                    xs[i] = ys[i]
                lp = ly
            if adapt:
                if binary:
                    h = (1.0 if accepted else 0.0) - alpha_star
                else:
                    h = a - alpha_star
                s_new = s + eta[k] * h
                if restricted:
                    if lov[k] <= s_new and s_new <= hiv[k]:
                        s = s_new
                else:
                    s = s_new
                theta = _phi(phi_code, phi_param, s)
            for i in range(d):
                X_out[k, i] = xs[i]
            S_out[k] = s
            A_out[k] = a
            ACC_out[k] = 1 if accepted else 0
    for i in range(d):
        x[i] = xs[i]
    return s
