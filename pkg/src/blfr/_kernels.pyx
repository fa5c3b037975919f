# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot paths. Keep in lock-step with ``_pykernels.py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, exp, sqrt, cos, expm1, log1p, lgamma, fabs, INFINITY, NAN, M_PI, M_LN2
from libc.stdint cimport uint64_t

cnp.import_array()

cdef double CF_EPS = 1e-16
cdef double CF_FPMIN = 1e-300
cdef int CF_MAXIT = 20000
cdef double TWO_M53 = 1.0 / 9007199254740992.0
cdef uint64_t XORSHIFT_MULT = 0x2545F4914F6CDD1DULL


cdef double _digamma(double x) noexcept nogil:
    cdef double result = 0.0, inv, inv2, series
    while x < 6.0:
        result -= 1.0 / x
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    series = inv2 * (1.0 / 12 - inv2 * (1.0 / 120 - inv2 * (1.0 / 252 - inv2 * (
        1.0 / 240 - inv2 * (1.0 / 132 - inv2 * (691.0 / 32760 - inv2 / 12.0))))))
    return result + log(x) - 0.5 * inv - series


cdef double _trigamma(double x) noexcept nogil:
    cdef double result = 0.0, inv, inv2, series
    while x < 6.0:
        result += 1.0 / (x * x)
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    series = inv + 0.5 * inv2 + inv * inv2 * (1.0 / 6 - inv2 * (1.0 / 30 - inv2 * (
        1.0 / 42 - inv2 * (1.0 / 30 - inv2 * (5.0 / 66 - inv2 * (691.0 / 2730 - inv2 * 7.0 / 6))))))
    return result + series


def digamma(double x):
    return _digamma(x)


def trigamma(double x):
    return _trigamma(x)


cdef inline double _stirling_tail(double z) noexcept nogil:
    cdef double inv = 1.0 / z, inv2 = inv * inv
    return inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))


cdef double _log_beta(double a, double b) noexcept nogil:
    cdef double big = a if a > b else b, small = b if a > b else a, s
    if big < 20.0:
        return lgamma(a) + lgamma(b) - lgamma(a + b)
    # lgamma(big) - lgamma(big + small) from the difference of Stirling series
    s = big + small
    return lgamma(small) - ((big - 0.5) * log1p(small / big) + small * log(s) - small
                            + _stirling_tail(s) - _stirling_tail(big))


def log_beta(double a, double b):
    return _log_beta(a, b)


cdef double _betacf(double y, double a, double b) noexcept nogil:
    cdef double qab = a + b, qap = a + 1.0, qam = a - 1.0
    cdef double c = 1.0, d, h, aa, delta
    cdef int m, m2
    d = 1.0 - qab * y / qap
    if fabs(d) < CF_FPMIN:
        d = CF_FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, CF_MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * y / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if fabs(d) < CF_FPMIN:
            d = CF_FPMIN
        c = 1.0 + aa / c
        if fabs(c) < CF_FPMIN:
            c = CF_FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * y / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if fabs(d) < CF_FPMIN:
            d = CF_FPMIN
        c = 1.0 + aa / c
        if fabs(c) < CF_FPMIN:
            c = CF_FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if fabs(delta - 1.0) < CF_EPS:
            break
    return h


cdef void _betainc_pair(double y, double ymc, double a, double b,
                        double *val, double *comp) noexcept nogil:
    cdef double front
    if y <= 0.0:
        val[0] = 0.0
        comp[0] = 1.0
        return
    if ymc <= 0.0:
        val[0] = 1.0
        comp[0] = 0.0
        return
    if y < (a + 1.0) / (a + b + 2.0):
        front = exp(a * log(y) + b * log(ymc) - _log_beta(a, b)) / a
        val[0] = front * _betacf(y, a, b)
        comp[0] = 1.0 - val[0]
    else:
        front = exp(b * log(ymc) + a * log(y) - _log_beta(a, b)) / b
        comp[0] = front * _betacf(ymc, b, a)
        val[0] = 1.0 - comp[0]


def betainc_pair(double y, double ymc, double a, double b):
    cdef double val, comp
    _betainc_pair(y, ymc, a, b, &val, &comp)
    return val, comp


def betainc_arrays(y, ymc, double a, double b):
    yy = np.ascontiguousarray(y, dtype=np.float64).ravel()
    yc = np.ascontiguousarray(ymc, dtype=np.float64).ravel()
    cdef Py_ssize_t i, n = yy.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] outc = np.empty(n)
    cdef const double[::1] yv = yy
    cdef const double[::1] ycv = yc
    cdef double[::1] ov = out, ocv = outc
    with nogil:
        for i in range(n):
            _betainc_pair(yv[i], ycv[i], a, b, &ov[i], &ocv[i])
    shape = np.shape(y)
    return out.reshape(shape), outc.reshape(shape)


def loglik_derivs(x, double a, double b, double alpha, double beta, int order):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t i, n = xv.shape[0]
    cdef double xi, x2, lin, t, logG, q, r, inv, inv2
    cdef double s_loglin = 0, s_logG = 0, s_t = 0
    cdef double s_inv = 0, s_xinv = 0, s_xq = 0, s_x2q = 0, s_x = 0, s_x2 = 0
    cdef double s_inv2 = 0, s_xinv2 = 0, s_x2inv2 = 0, s_x2r = 0, s_x3r = 0, s_x4r = 0
    cdef double ll, am1 = alpha - 1.0, psi_ab, tri_ab
    for i in range(n):
        xi = xv[i]
        lin = a + b * xi
        if lin <= 0.0:
            if order == 0:
                return -INFINITY, None, None
            return (-INFINITY, np.full(4, NAN),
                    np.full((4, 4), NAN) if order >= 2 else None)
        x2 = xi * xi
        t = -a * xi - 0.5 * b * x2
        # log(1 - e^t) without losing the tiny e^t once G rounds to 1
        logG = log(-expm1(t)) if t > -M_LN2 else log1p(-exp(t))
        s_loglin += log(lin)
        s_logG += logG
        s_t += t
        if order >= 1:
            q = 1.0 / expm1(-t)
            inv = 1.0 / lin
            s_inv += inv
            s_xinv += xi * inv
            s_xq += xi * q
            s_x2q += x2 * q
            s_x += xi
            s_x2 += x2
            if order >= 2:
                r = q * (1.0 + q)
                inv2 = inv * inv
                s_inv2 += inv2
                s_xinv2 += xi * inv2
                s_x2inv2 += x2 * inv2
                s_x2r += x2 * r
                s_x3r += x2 * xi * r
                s_x4r += x2 * x2 * r
    ll = s_loglin - n * _log_beta(alpha, beta) + am1 * s_logG + beta * s_t
    if order == 0:
        return ll, None, None
    psi_ab = _digamma(alpha + beta)
    grad = np.empty(4)
    cdef double[::1] g = grad
    g[0] = s_inv + am1 * s_xq - beta * s_x
    g[1] = s_xinv + 0.5 * am1 * s_x2q - 0.5 * beta * s_x2
    g[2] = n * (psi_ab - _digamma(alpha)) + s_logG
    g[3] = n * (psi_ab - _digamma(beta)) + s_t
    if order == 1:
        return ll, grad, None
    tri_ab = _trigamma(alpha + beta)
    hess = np.empty((4, 4))
    cdef double[:, ::1] h = hess
    h[0, 0] = -s_inv2 - am1 * s_x2r
    h[0, 1] = -s_xinv2 - 0.5 * am1 * s_x3r
    h[1, 1] = -s_x2inv2 - 0.25 * am1 * s_x4r
    h[0, 2] = s_xq
    h[1, 2] = 0.5 * s_x2q
    h[0, 3] = -s_x
    h[1, 3] = -0.5 * s_x2
    h[2, 2] = n * (tri_ab - _trigamma(alpha))
    h[2, 3] = n * tri_ab
    h[3, 3] = n * (tri_ab - _trigamma(beta))
    h[1, 0] = h[0, 1]
    h[2, 0] = h[0, 2]
    h[2, 1] = h[1, 2]
    h[3, 0] = h[0, 3]
    h[3, 1] = h[1, 3]
    h[3, 2] = h[2, 3]
    return ll, grad, hess


cdef inline double _lfr_inverse(double y, double a, double b) noexcept nogil:
    cdef double s = -log1p(-y)
    if b > 0.0:
        return 2.0 * s / (a + sqrt(a * a + 2.0 * b * s))
    return s / a


def lfr_inverse(y, double a, double b):
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64).ravel()
    cdef Py_ssize_t i, n = yv.shape[0]
    out = np.empty(n)
    cdef double[::1] ov = out
    for i in range(n):
        ov[i] = _lfr_inverse(yv[i], a, b)
    return out.reshape(np.shape(y))


# --- xorshift64* stream -------------------------------------------------------

cdef inline uint64_t _next(uint64_t *state) noexcept nogil:
    cdef uint64_t s = state[0]
    s ^= s >> 12
    s ^= s << 25
    s ^= s >> 27
    state[0] = s
    return s * XORSHIFT_MULT


cdef inline double _uniform(uint64_t *state) noexcept nogil:
    return (<double>(_next(state) >> 11) + 0.5) * TWO_M53


cdef inline double _normal(uint64_t *state) noexcept nogil:
    cdef double u1 = _uniform(state)
    cdef double u2 = _uniform(state)
    return sqrt(-2.0 * log(u1)) * cos(2.0 * M_PI * u2)


cdef double _log_gamma_variate(double shape, uint64_t *state) noexcept nogil:
    cdef double d, c, z, v, u, z2, lg
    if shape < 1.0:
        lg = _log_gamma_variate(shape + 1.0, state)
        u = _uniform(state)
        return lg + log(u) / shape
    d = shape - 1.0 / 3.0
    c = 1.0 / sqrt(9.0 * d)
    while True:
        z = _normal(state)
        v = 1.0 + c * z
        if v <= 0.0:
            continue
        v = v * v * v
        u = _uniform(state)
        z2 = z * z
        if u < 1.0 - 0.0331 * z2 * z2:
            return log(d) + log(v)
        if log(u) < 0.5 * z2 + d - d * v + d * log(v):
            return log(d) + log(v)


cdef inline double _beta_variate(double alpha, double beta, uint64_t *state) noexcept nogil:
    cdef double lg1 = _log_gamma_variate(alpha, state)
    cdef double lg2 = _log_gamma_variate(beta, state)
    cdef double diff = lg2 - lg1
    if diff > 709.0:
        return 0.0
    return 1.0 / (1.0 + exp(diff))


def uniforms(Py_ssize_t n, uint64_t state):
    out = np.empty(n)
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    for i in range(n):
        ov[i] = _uniform(&state)
    return out, state


def sample_gamma(double shape, Py_ssize_t n, uint64_t state):
    out = np.empty(n)
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    for i in range(n):
        ov[i] = exp(_log_gamma_variate(shape, &state))
    return out, state


def sample_beta(double alpha, double beta, Py_ssize_t n, uint64_t state):
    out = np.empty(n)
    cdef double[::1] ov = out
    cdef Py_ssize_t i = 0, redraws = 0
    cdef double y
    while i < n:
        y = _beta_variate(alpha, beta, &state)
        if y <= 0.0 or y >= 1.0:
            redraws += 1
            if redraws > n:
                break
            continue
        ov[i] = y
        i += 1
    return out, redraws, state


def sample_blfr(Py_ssize_t n, double a, double b, double alpha, double beta, uint64_t state):
    out = np.empty(n)
    cdef double[::1] ov = out
    cdef Py_ssize_t i = 0, redraws = 0
    cdef double y
    while i < n:
        y = _beta_variate(alpha, beta, &state)
        if y <= 0.0 or y >= 1.0:
            redraws += 1
            if redraws > n:
                break
            continue
        ov[i] = _lfr_inverse(y, a, b)
        i += 1
    return out, redraws, state
