"""Mixture-series representations of the BLFR law.

Expanding ``(1 - G)^(beta - 1)`` binomially writes the BLFR CDF as a mixture
of exponentiated-LFR CDFs::

    F(x) = sum_j p_j G(x)^(alpha + j),
    p_j  = (-1)^j Gamma(alpha + beta) / (Gamma(alpha) Gamma(beta - j) j! (alpha + j))

so that densities and raw moments are mixtures over GLFR components with
shape ``alpha + j``. For integer ``beta`` the series stops at ``j = beta - 1``.

For non-integer ``beta`` the weights decay only like ``j^(-beta - 1)``, and
with a fixed sign once ``j > beta``. Plain truncation would need on the order
of ``tol^(-1/beta)`` terms, so weight sums and moment series are evaluated as
an explicit partial sum followed by an Euler-Maclaurin estimate of the
remainder. The remainder treats the summand as a smooth function of a real
index, which the reflection form of ``p_j`` provides.
"""

import math
from dataclasses import dataclass

import numpy as np

from .distribution import _as_support, _exponent, _wrap
from .exceptions import ConvergenceError, DomainError
from .special import gauss_2f1, gauss_legendre, log_beta

MAX_TERMS = 10_000
EXPLICIT_TERMS = 40
EM_SWITCH = 1000


def _integer_beta(beta):
    return float(beta).is_integer()


def _sign_gamma(z):
    if z > 0:
        return 1.0
    return -1.0 if math.floor(-z) % 2 == 0 else 1.0


def w_coeff(j, beta):
    """Binomial coefficient of ``z^j`` in ``(1 - z)^(beta - 1)``.

    Evaluated from log-gamma magnitudes with the sign of ``Gamma(beta - j)``
    tracked separately, since ``beta - j`` goes negative for ``j > beta``.
    """
    if j < 0 or int(j) != j:
        raise DomainError(f"j must be a non-negative integer, got {j!r}")
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta!r}")
    j = int(j)
    if _integer_beta(beta):
        n = int(beta) - 1
        return float((-1) ** j * math.comb(n, j)) if j <= n else 0.0
    z = beta - j
    log_mag = math.lgamma(beta) - math.lgamma(z) - math.lgamma(j + 1.0)
    return (-1.0) ** j * _sign_gamma(z) * math.exp(log_mag)


def p_coeff(j, alpha, beta):
    """Weight of the ``G^(alpha + j)`` component in the CDF mixture."""
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha!r}")
    w = w_coeff(j, beta)
    if w == 0.0:
        return 0.0
    return w / ((alpha + j) * math.exp(log_beta(alpha, beta)))


def _p_sequence(n, alpha, beta):
    """First ``n`` mixture weights by the ratio ``w_j / w_(j-1) = (j - beta) / j``."""
    w = np.empty(n)
    w[0] = 1.0
    for j in range(1, n):
        w[j] = w[j - 1] * (j - beta) / j
    return w / ((alpha + np.arange(n)) * math.exp(log_beta(alpha, beta)))


def _stirling_tail(z):
    inv = 1.0 / z
    inv2 = inv * inv
    return inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))


def _log_gamma_ratio(j, beta):
    """``log Gamma(j + 1 - beta) - log Gamma(j + 1)`` for real ``j > beta - 1``.

    For large arguments the two Stirling expansions are subtracted term by
    term (``log1p`` for the leading part), which avoids the cancellation of
    differencing two large lgamma values.
    """
    j = np.asarray(j, dtype=float)
    z = j + 1.0
    h = -beta
    big = z + h >= 20.0
    zb = np.where(big, z, 20.0 - h)
    stirling = (zb - 0.5) * np.log1p(h / zb) + h * np.log(zb + h) - h + _stirling_tail(zb + h) - _stirling_tail(zb)
    lg = np.vectorize(math.lgamma, otypes=[float])
    zs = np.where(big, 20.0 - h, z)
    direct = lg(zs + h) - lg(zs)
    return np.where(big, stirling, direct)


def _p_real(j, alpha, beta):
    """Reflection form of ``p_j`` extended to real ``j`` (non-integer ``beta``, ``j > beta - 1``)."""
    s = math.sin(math.pi * beta)
    const = math.log(abs(s)) + math.lgamma(alpha + beta) - math.lgamma(alpha) - math.log(math.pi)
    j = np.asarray(j, dtype=float)
    return math.copysign(1.0, s) * np.exp(const + _log_gamma_ratio(j, beta) - np.log(alpha + j))


@dataclass(frozen=True)
class SeriesExpansion:
    """A truncated mixture series.

    ``coefficients`` are the weights ``p_0 .. p_(J-1)`` and ``terms`` the
    summands actually added (equal to the weights for a weight sum, or
    ``p_j E(X_j^k)`` for a moment). ``tail_estimate`` is the Euler-Maclaurin
    remainder beyond index ``J - 1`` and ``tail_bound`` the size of the first
    correction left out of it, used as the error estimate. Exact series have
    a zero tail.
    """

    coefficients: tuple
    terms: tuple
    truncation_index: int
    tail_estimate: float
    tail_bound: float
    exact: bool

    @property
    def value(self):
        return math.fsum(self.terms) + self.tail_estimate


def _em_tail(func, start, beta, explicit):
    """Euler-Maclaurin estimate of ``sum_{j >= start} T(j)``.

    ``explicit`` holds ``T(start - 3) .. T(start + 3)`` at integers. The integral
    runs over ``j = start * e^u`` with a composite Gauss-Legendre rule; the
    summand behaves like ``e^(-beta u)`` times a slowly varying factor there.
    Derivatives come from 7-point central differences; the returned error estimate
    is the first omitted correction, ``T^(5) / 30240``.
    """
    tm3, tm2, tm1, t0, tp1, tp2, tp3 = explicit
    d1 = (-tm3 + 9.0 * tm2 - 45.0 * tm1 + 45.0 * tp1 - 9.0 * tp2 + tp3) / 60.0
    d3 = (tm3 - 8.0 * tm2 + 13.0 * tm1 - 13.0 * tp1 + 8.0 * tp2 - tp3) / 8.0
    d5 = (tp3 - 4.0 * tp2 + 5.0 * tp1 - 5.0 * tm1 + 4.0 * tm2 - tm3) / 2.0
    u_max = min(50.0 / beta + 5.0, 690.0 - math.log(start))
    rule = gauss_legendre(20)
    width = 2.0
    n_panels = max(1, math.ceil(u_max / width))
    lows = np.arange(n_panels) * width
    u = (lows[:, None] + 0.5 * width * (rule.nodes[None, :] + 1.0)).ravel()
    wts = np.tile(0.5 * width * rule.weights, n_panels)
    j = start * np.exp(u)
    integral = float(np.dot(wts, func(j) * j))
    correction = -d1 / 12.0 + d3 / 720.0
    return integral + 0.5 * t0 + correction, abs(d5 / 30240.0)


def mixture_weights(alpha, beta, n_explicit=EXPLICIT_TERMS):
    """Mixture weights with their remainder; ``value`` is the weight total (1 in exact arithmetic)."""
    if not alpha > 0 or not beta > 0:
        raise DomainError("alpha and beta must be positive")
    if _integer_beta(beta):
        p = _p_sequence(int(beta), alpha, beta)
        return SeriesExpansion(tuple(p), tuple(p), int(beta), 0.0, 0.0, True)
    start = max(n_explicit, math.ceil(beta) + 3)
    p = _p_sequence(start + 4, alpha, beta)
    tail, bound = _em_tail(lambda j: _p_real(j, alpha, beta), start, beta, p[start - 3:start + 4])
    head = tuple(p[:start])
    return SeriesExpansion(head, head, start, tail, bound, False)


def _series_scalar(g, log_g, alpha, beta, tol, with_density_factor):
    """Sum of ``p_j c_j G^(alpha + j)``, with ``c_j = alpha + j`` for the density form.

    Close to ``G = 1`` the terms shrink only like ``G^j``; once ``EM_SWITCH``
    terms are in, the remainder is tried as an Euler-Maclaurin integral and
    accepted when its error estimate is below ``tol``.
    """
    if g == 0.0:
        return 0.0
    exact = _integer_beta(beta)
    n_max = int(beta) if exact else MAX_TERMS
    lb = log_beta(alpha, beta)
    total = 0.0
    w = 1.0
    passes = 0
    ratio = g / (1.0 - g) if g < 1.0 else math.inf

    def term_at(j):
        scale = 1.0 if with_density_factor else 1.0 / (alpha + j)
        return scale * math.exp((alpha + j) * log_g - lb)

    def real_term(j):
        factor = 1.0 if not with_density_factor else alpha + j
        with np.errstate(under="ignore"):
            return _p_real(j, alpha, beta) * factor * np.exp((alpha + j) * log_g)

    for j in range(n_max):
        if j > 0:
            w *= (j - beta) / j
        if w == 0.0:
            break
        term = w * term_at(j)
        total += term
        if exact:
            continue
        if j >= beta and abs(term) * max(1.0, ratio) < tol * abs(total):
            passes += 1
            if passes >= 2:
                return total
        else:
            passes = 0
        if j + 1 == EM_SWITCH:
            start = j + 1
            explicit = real_term(np.arange(start - 3, start + 4, dtype=float))
            tail, bound = _em_tail(real_term, start, beta, explicit)
            if bound < tol * abs(total + tail):
                return total + tail
    if exact:
        return total
    raise ConvergenceError(
        f"mixture series did not converge in {MAX_TERMS} terms at G={g}", partial_sum=total, n_terms=MAX_TERMS
    )


def cdf_series(x, params, tol=1e-10):
    """BLFR CDF as the mixture sum ``sum_j p_j G(x)^(alpha + j)``.

    Stops once two consecutive terms, inflated by the geometric remainder
    factor ``G / (1 - G)``, fall below ``tol`` relative to the partial sum.
    """
    arr = _as_support(x)
    t = _exponent(arr, params.a, params.b)
    g = -np.expm1(t)
    out = np.array(
        [
            _series_scalar(float(gi), math.log(gi) if gi > 0 else -math.inf, params.alpha, params.beta, tol, False)
            for gi in np.atleast_1d(g).ravel()
        ]
    ).reshape(arr.shape)
    return _wrap(out, x)


def pdf_series(x, params, tol=1e-10):
    """BLFR density as the GLFR mixture ``sum_j p_j (alpha + j) g(x) G(x)^(alpha + j - 1)``."""
    arr = _as_support(x)
    if np.any(arr == 0):
        raise DomainError("pdf_series needs x > 0")
    t = _exponent(arr, params.a, params.b)
    g = -np.expm1(t)
    lfr_density = (params.a + params.b * arr) * np.exp(t)
    flat = []
    for gi, di in zip(np.atleast_1d(g).ravel(), np.atleast_1d(lfr_density).ravel()):
        s = _series_scalar(float(gi), math.log(gi), params.alpha, params.beta, tol, True)
        flat.append(s * di / gi)
    return _wrap(np.array(flat).reshape(arr.shape), x)


def cdf_hypergeometric(x, params):
    """BLFR CDF through ``G^alpha / (alpha B(alpha, beta)) * 2F1(alpha, 1 - beta; alpha + 1; G)``."""
    arr = _as_support(x)
    al, be = params.alpha, params.beta
    g = -np.expm1(_exponent(arr, params.a, params.b))
    lb = log_beta(al, be)
    out = []
    for gi in np.atleast_1d(g).ravel():
        gi = float(gi)
        if gi == 0.0:
            out.append(0.0)
            continue
        if gi >= 1.0:
            raise DomainError("G(x) rounds to 1; the hypergeometric series does not converge there")
        out.append(math.exp(al * math.log(gi) - lb) / al * gauss_2f1(al, 1.0 - be, al + 1.0, gi))
    return _wrap(np.array(out).reshape(arr.shape), x)


# Composite Gauss-Legendre rule on r = log(w), where w ~ Exp(1) and
# X = G^{-1}(exp(-w / m)) has the GLFR(m) law.
_R_LO, _R_HI, _R_PANEL = -60.0, 5.0, 2.0


def _r_rule():
    rule = gauss_legendre(20)
    n_panels = math.ceil((_R_HI - _R_LO) / _R_PANEL)
    lows = _R_LO + np.arange(n_panels) * _R_PANEL
    r = (lows[:, None] + 0.5 * _R_PANEL * (rule.nodes[None, :] + 1.0)).ravel()
    w = np.tile(0.5 * _R_PANEL * rule.weights, n_panels)
    return r, w * np.exp(r - np.exp(r))


_R_NODES, _R_WEIGHTS = _r_rule()


def component_moments(k, shapes, a, b):
    """``E(X^k)`` for GLFR components with the given exponent ``shapes``.

    Vectorized over ``shapes``; the integral is taken in the Gumbel-like
    variable ``log w``, where the integrand is smooth for every shape.
    """
    log_m = np.log(np.asarray(shapes, dtype=float))
    log_y = _R_NODES[None, :] - log_m[..., None]
    y = np.exp(log_y)
    with np.errstate(over="ignore", under="ignore", divide="ignore", invalid="ignore"):
        log_g = np.where(
            log_y < -18.0,
            log_y - 0.5 * y,
            np.where(y > math.log(2.0), np.log1p(-np.exp(-y)), np.log(-np.expm1(-np.minimum(y, 1.0)))),
        )
    s = -log_g
    if b > 0:
        xs = 2.0 * s / (a + np.sqrt(a * a + 2.0 * b * s) + (s == 0.0))
    else:
        xs = s / a
    out = (xs ** k) @ _R_WEIGHTS
    return float(out[0]) if np.ndim(shapes) == 0 else out


def moment_series(k, params, tol=1e-10):
    """Moment mixture ``sum_j p_j E(X_j^k)`` as a :class:`SeriesExpansion`.

    The explicit part doubles in length until the tail error estimate drops
    below ``tol`` relative to the total, capped at 10,000 terms.
    """
    if k < 1 or int(k) != k:
        raise DomainError(f"k must be a positive integer, got {k!r}")
    al, be, a, b = params.alpha, params.beta, params.a, params.b
    if _integer_beta(be):
        p = _p_sequence(int(be), al, be)
        terms = p * component_moments(k, al + np.arange(p.size), a, b)
        return SeriesExpansion(tuple(p), tuple(terms), p.size, 0.0, 0.0, True)
    start = max(EXPLICIT_TERMS, math.ceil(be) + 3)
    while True:
        p = _p_sequence(start + 4, al, be)
        terms = p * component_moments(k, al + np.arange(start + 4), a, b)
        tail, bound = _em_tail(
            lambda j: _p_real(j, al, be) * component_moments(k, al + j, a, b),
            start,
            be,
            terms[start - 3:start + 4],
        )
        total = math.fsum(terms[:start]) + tail
        if bound < tol * abs(total):
            return SeriesExpansion(tuple(p[:start]), tuple(terms[:start]), start, tail, bound, False)
        if start >= MAX_TERMS:
            raise ConvergenceError("moment series tail did not settle", partial_sum=total, n_terms=start)
        start = min(2 * start, MAX_TERMS)


def raw_moment(k, params, tol=1e-10):
    """k-th raw moment ``E(X^k)`` of the BLFR law."""
    return moment_series(k, params, tol).value
