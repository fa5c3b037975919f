"""Seeded random variates: gamma, beta and BLFR.

The generator is xorshift64* (Vigna 2016), fully specified so that any port
reproduces the same stream::

    x ^= x >> 12;  x ^= (x << 25) mod 2^64;  x ^= x >> 27
    out = (x * 0x2545F4914F6CDD1D) mod 2^64
    U   = ((out >> 11) + 0.5) * 2^-53           # strictly inside (0, 1)

The 64-bit state is initialized from the user seed with one splitmix64 step
(never zero). Normals use Box-Muller (cosine branch only), gammas
Marsaglia-Tsang in the log domain, with ``log G(s) = log G(s + 1) + log(U) / s``
for shapes below one, and a beta variate is ``1 / (1 + exp(log G2 - log G1))``.
A BLFR variate applies the LFR inverse CDF to a beta variate; variates that
round to 0 or 1 are redrawn and counted.
"""

import numpy as np

from . import _backend
from .distribution import BlfrParams
from .exceptions import DomainError, GeneratorFault

ALGORITHM_ID = "xorshift64star/splitmix64-seed/v1"
MASK64 = 0xFFFFFFFFFFFFFFFF


def splitmix64(x):
    """One splitmix64 step; returns ``(next_counter, output)``."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return x, z ^ (z >> 31)


def derive_seed(seed, *indices):
    """Child seed for a stream position such as ``(cell, replication)``."""
    h = splitmix64(int(seed) & MASK64)[1]
    for idx in indices:
        h = splitmix64(h ^ splitmix64(int(idx) & MASK64)[1])[1]
    return h


class RngState:
    """Generator state owned by one caller at a time.

    Parameters
    ----------
    seed : int
        Any integer; reduced modulo 2**64.
    """

    algorithm_id = ALGORITHM_ID

    def __init__(self, seed):
        if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
            raise DomainError(f"seed must be an integer, got {seed!r}")
        self.seed = int(seed) & MASK64
        state = splitmix64(self.seed)[1]
        self.state = state if state != 0 else 0x9E3779B97F4A7C15

    def spawn(self, *indices):
        """Independent child generator keyed by ``indices``; this one is untouched."""
        return RngState(derive_seed(self.seed, *indices))

    def uniforms(self, n):
        out, self.state = _backend.uniforms(int(n), self.state)
        return out

    def __repr__(self):
        return f"RngState(seed={self.seed}, algorithm_id={self.algorithm_id!r})"


def as_rng(rng):
    return rng if isinstance(rng, RngState) else RngState(rng)


def _check_size(size):
    n = 1 if size is None else int(size)
    if n < 0:
        raise DomainError("size must be non-negative")
    return n


def sample_gamma(shape, rng, size=None):
    """Gamma(shape, 1) variates; a float when ``size`` is None."""
    if not shape > 0:
        raise DomainError(f"shape must be positive, got {shape!r}")
    rng = as_rng(rng)
    out, rng.state = _backend.sample_gamma(float(shape), _check_size(size), rng.state)
    return float(out[0]) if size is None else out


def sample_beta(alpha, beta, rng, size=None):
    """Beta(alpha, beta) variates as ``G1 / (G1 + G2)``, evaluated from the log gammas.

    Variates that round to 0 or 1 are redrawn, so every value lies strictly
    inside (0, 1); more redraws than requested values raise
    :class:`GeneratorFault`.
    """
    if not alpha > 0 or not beta > 0:
        raise DomainError("alpha and beta must be positive")
    rng = as_rng(rng)
    n = _check_size(size)
    out, redraws, rng.state = _backend.sample_beta(float(alpha), float(beta), n, rng.state)
    if redraws > n:
        raise GeneratorFault(f"{redraws} beta variates rounded to 0 or 1 while drawing {n} values")
    return float(out[0]) if size is None else out


def sample_blfr(n, params, rng):
    """``n`` BLFR variates by the LFR inverse CDF applied to beta variates.

    The inverse uses ``s = -log1p(-Y)`` and the cancellation-free
    ``2 s / (a + sqrt(a^2 + 2 b s))``, so the square root never sees a
    negative argument.

    Raises
    ------
    GeneratorFault
        When more than ``n`` beta variates had to be redrawn.
    """
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    if not isinstance(params, BlfrParams):
        raise DomainError("params must be a BlfrParams")
    rng = as_rng(rng)
    out, redraws, rng.state = _backend.sample_blfr(
        int(n), params.a, params.b, params.alpha, params.beta, rng.state
    )
    if redraws > n:
        raise GeneratorFault(f"{redraws} beta variates rounded to 0 or 1 while drawing {n} values")
    return out
