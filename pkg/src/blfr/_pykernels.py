"""Pure-Python implementations of the numerical hot paths.

This module mirrors ``_kernels.pyx`` function for function. It is used when
the compiled extension is unavailable or when ``BLFR_PURE_PYTHON=1`` is set.
The random-variate routines perform the same floating-point operations in
the same order as the compiled versions, so both backends emit identical
streams for a given state.
"""

import math

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
XORSHIFT_MULT = 0x2545F4914F6CDD1D
TWO_M53 = 1.0 / 9007199254740992.0

CF_EPS = 1e-16
CF_FPMIN = 1e-300
CF_MAXIT = 20000

_EULER = 0.57721566490153286061
_LN2 = math.log(2.0)


def digamma(x):
    result = 0.0
    while x < 6.0:
        result -= 1.0 / x
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    series = inv2 * (1.0 / 12 - inv2 * (1.0 / 120 - inv2 * (1.0 / 252 - inv2 * (
        1.0 / 240 - inv2 * (1.0 / 132 - inv2 * (691.0 / 32760 - inv2 / 12.0))))))
    return result + math.log(x) - 0.5 * inv - series


def trigamma(x):
    result = 0.0
    while x < 6.0:
        result += 1.0 / (x * x)
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    series = inv + 0.5 * inv2 + inv * inv2 * (1.0 / 6 - inv2 * (1.0 / 30 - inv2 * (
        1.0 / 42 - inv2 * (1.0 / 30 - inv2 * (5.0 / 66 - inv2 * (691.0 / 2730 - inv2 * 7.0 / 6))))))
    return result + series


def log1mexp(t):
    """``log(1 - e^t)`` for ``t <= 0``, accurate at both ends."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(t > -_LN2, np.log(-np.expm1(np.maximum(t, -_LN2))), np.log1p(-np.exp(np.minimum(t, -_LN2))))


def _stirling_tail(z):
    inv = 1.0 / z
    inv2 = inv * inv
    return inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))


def log_beta(a, b):
    """``log B(a, b)``, stable when one argument is huge."""
    big, small = (a, b) if a > b else (b, a)
    if big < 20.0:
        return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
    # lgamma(big) - lgamma(big + small) from the difference of Stirling series
    s = big + small
    return math.lgamma(small) - (
        (big - 0.5) * math.log1p(small / big) + small * math.log(s) - small + _stirling_tail(s) - _stirling_tail(big)
    )


def _betacf(y, a, b):
    """Modified Lentz evaluation of the incomplete-beta continued fraction."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * y / qap
    if abs(d) < CF_FPMIN:
        d = CF_FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, CF_MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * y / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < CF_FPMIN:
            d = CF_FPMIN
        c = 1.0 + aa / c
        if abs(c) < CF_FPMIN:
            c = CF_FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * y / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < CF_FPMIN:
            d = CF_FPMIN
        c = 1.0 + aa / c
        if abs(c) < CF_FPMIN:
            c = CF_FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < CF_EPS:
            break
    return h


def betainc_pair(y, ymc, a, b):
    """Return ``(I_y(a, b), 1 - I_y(a, b))`` given ``y`` and ``1 - y`` separately."""
    if y <= 0.0:
        return 0.0, 1.0
    if ymc <= 0.0:
        return 1.0, 0.0
    if y < (a + 1.0) / (a + b + 2.0):
        front = math.exp(a * math.log(y) + b * math.log(ymc) - log_beta(a, b)) / a
        val = front * _betacf(y, a, b)
        return val, 1.0 - val
    front = math.exp(b * math.log(ymc) + a * math.log(y) - log_beta(a, b)) / b
    comp = front * _betacf(ymc, b, a)
    return 1.0 - comp, comp


def betainc_arrays(y, ymc, a, b):
    y = np.asarray(y, dtype=float)
    ymc = np.asarray(ymc, dtype=float)
    out = np.empty(y.shape)
    outc = np.empty(y.shape)
    flat_y = y.ravel()
    flat_ymc = ymc.ravel()
    flat_out = out.ravel()
    flat_outc = outc.ravel()
    for i in range(flat_y.size):
        flat_out[i], flat_outc[i] = betainc_pair(float(flat_y[i]), float(flat_ymc[i]), a, b)
    return out, outc


def loglik_derivs(x, a, b, alpha, beta, order):
    """Log-likelihood and, for ``order >= 1``, score and Hessian over ``(a, b, alpha, beta)``."""
    x = np.asarray(x, dtype=float)
    n = x.size
    lin = a + b * x
    if np.any(lin <= 0.0):
        ll = -math.inf
        if order == 0:
            return ll, None, None
        nan4 = np.full(4, np.nan)
        return ll, nan4, (np.full((4, 4), np.nan) if order >= 2 else None)
    t = -a * x - 0.5 * b * x * x
    logG = log1mexp(t)
    lbeta = log_beta(alpha, beta)
    ll = float(np.sum(np.log(lin)) - n * lbeta + (alpha - 1.0) * np.sum(logG) + beta * np.sum(t))
    if order == 0:
        return ll, None, None

    with np.errstate(over="ignore", divide="ignore"):
        q = 1.0 / np.expm1(-t)
    x2 = x * x
    inv = 1.0 / lin
    psi_ab = digamma(alpha + beta)
    grad = np.empty(4)
    grad[0] = np.sum(inv) + (alpha - 1.0) * np.sum(x * q) - beta * np.sum(x)
    grad[1] = np.sum(x * inv) + 0.5 * (alpha - 1.0) * np.sum(x2 * q) - 0.5 * beta * np.sum(x2)
    grad[2] = n * (psi_ab - digamma(alpha)) + np.sum(logG)
    grad[3] = n * (psi_ab - digamma(beta)) + np.sum(t)
    if order == 1:
        return ll, grad, None

    inv2 = inv * inv
    r = q * (1.0 + q)
    tri_ab = trigamma(alpha + beta)
    am1 = alpha - 1.0
    hess = np.empty((4, 4))
    hess[0, 0] = -np.sum(inv2) - am1 * np.sum(x2 * r)
    hess[0, 1] = -np.sum(x * inv2) - 0.5 * am1 * np.sum(x2 * x * r)
    hess[1, 1] = -np.sum(x2 * inv2) - 0.25 * am1 * np.sum(x2 * x2 * r)
    hess[0, 2] = np.sum(x * q)
    hess[1, 2] = 0.5 * np.sum(x2 * q)
    hess[0, 3] = -np.sum(x)
    hess[1, 3] = -0.5 * np.sum(x2)
    hess[2, 2] = n * (tri_ab - trigamma(alpha))
    hess[2, 3] = n * tri_ab
    hess[3, 3] = n * (tri_ab - trigamma(beta))
    for i in range(4):
        for j in range(i):
            hess[i, j] = hess[j, i]
    return ll, grad, hess


def _lfr_inverse_scalar(y, a, b):
    s = -math.log1p(-y)
    if b > 0.0:
        return 2.0 * s / (a + math.sqrt(a * a + 2.0 * b * s))
    return s / a


def lfr_inverse(y, a, b):
    y = np.asarray(y, dtype=float)
    out = np.empty(y.shape)
    flat_y = y.ravel()
    flat_out = out.ravel()
    for i in range(flat_y.size):
        flat_out[i] = _lfr_inverse_scalar(float(flat_y[i]), a, b)
    return out


# --- xorshift64* stream -------------------------------------------------------

def _next(state):
    state ^= state >> 12
    state ^= (state << 25) & MASK64
    state ^= state >> 27
    return state, (state * XORSHIFT_MULT) & MASK64


def _uniform(state):
    state, r = _next(state)
    return state, ((r >> 11) + 0.5) * TWO_M53


def _normal(state):
    state, u1 = _uniform(state)
    state, u2 = _uniform(state)
    return state, math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


def _log_gamma_variate(shape, state):
    if shape < 1.0:
        state, lg = _log_gamma_variate(shape + 1.0, state)
        state, u = _uniform(state)
        return state, lg + math.log(u) / shape
    d = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    while True:
        state, z = _normal(state)
        v = 1.0 + c * z
        if v <= 0.0:
            continue
        v = v * v * v
        state, u = _uniform(state)
        z2 = z * z
        if u < 1.0 - 0.0331 * z2 * z2:
            return state, math.log(d) + math.log(v)
        if math.log(u) < 0.5 * z2 + d - d * v + d * math.log(v):
            return state, math.log(d) + math.log(v)


def _beta_variate(alpha, beta, state):
    state, lg1 = _log_gamma_variate(alpha, state)
    state, lg2 = _log_gamma_variate(beta, state)
    diff = lg2 - lg1
    if diff > 709.0:
        return state, 0.0
    return state, 1.0 / (1.0 + math.exp(diff))


def uniforms(n, state):
    out = np.empty(n)
    for i in range(n):
        state, out[i] = _uniform(state)
    return out, state


def sample_gamma(shape, n, state):
    out = np.empty(n)
    for i in range(n):
        state, lg = _log_gamma_variate(shape, state)
        out[i] = math.exp(lg)
    return out, state


def sample_beta(alpha, beta, n, state):
    out = np.empty(n)
    redraws = 0
    i = 0
    while i < n:
        state, y = _beta_variate(alpha, beta, state)
        if y <= 0.0 or y >= 1.0:
            redraws += 1
            if redraws > n:
                break
            continue
        out[i] = y
        i += 1
    return out, redraws, state


def sample_blfr(n, a, b, alpha, beta, state):
    out = np.empty(n)
    redraws = 0
    i = 0
    while i < n:
        state, y = _beta_variate(alpha, beta, state)
        if y <= 0.0 or y >= 1.0:
            redraws += 1
            if redraws > n:
                break
            continue
        out[i] = _lfr_inverse_scalar(y, a, b)
        i += 1
    return out, redraws, state
