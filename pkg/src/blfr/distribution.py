"""The beta-linear failure rate (BLFR) distribution and its nested sub-models.

The baseline is the linear failure rate law with hazard ``a + b x``::

    G(x) = 1 - exp(-a x - b x^2 / 2)

and the BLFR CDF applies the regularized incomplete beta function to it,
``F(x) = I_{G(x)}(alpha, beta)``. All tail quantities are computed from
``t = -a x - b x^2 / 2`` through ``expm1``/``log1p`` so that neither ``G`` nor
``1 - G`` loses relative precision.
"""

import enum
import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import NamedTuple

import numpy as np

from . import _backend
from .exceptions import DomainError
from .special import inc_beta_pair, inv_reg_inc_beta_pair, log1mexp, log_beta

PARAM_NAMES = ("a", "b", "alpha", "beta")


@dataclass(frozen=True)
class BlfrParams:
    """Parameter vector ``(a, b, alpha, beta)``.

    ``a`` and ``b`` are the exponential and Rayleigh rates of the baseline
    (``a, b >= 0``, ``a + b > 0``); ``alpha`` and ``beta`` are the positive
    beta shapes.
    """

    a: float
    b: float
    alpha: float
    beta: float

    def __post_init__(self):
        for name in PARAM_NAMES:
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.a < 0 or self.b < 0 or self.a + self.b <= 0:
            raise DomainError(f"need a >= 0, b >= 0 and a + b > 0, got a={self.a}, b={self.b}")
        if self.alpha <= 0 or self.beta <= 0:
            raise DomainError(f"need alpha > 0 and beta > 0, got {self.alpha}, {self.beta}")

    def as_array(self):
        return np.array([self.a, self.b, self.alpha, self.beta])

    def to_dict(self):
        return {name: getattr(self, name) for name in PARAM_NAMES}

    @classmethod
    def from_array(cls, values):
        return cls(*(float(v) for v in values))


@dataclass(frozen=True, eq=True)
class Family:
    """A nested sub-model: which parameters are estimated and which are pinned."""

    tag: str
    free_params: tuple
    fixed: MappingProxyType

    def __hash__(self):
        return hash(self.tag)

    def __reduce__(self):
        # the registry holds one instance per tag, so worker processes look it up again
        return Family.get, (self.tag,)

    @property
    def k(self):
        return len(self.free_params)

    def make_params(self, values):
        """Build a full :class:`BlfrParams` from free-parameter ``values``.

        ``values`` is either a mapping keyed by parameter name or a sequence
        aligned with :attr:`free_params`.
        """
        if hasattr(values, "items"):
            free = {name: float(values[name]) for name in self.free_params}
        else:
            values = list(values)
            if len(values) != self.k:
                raise DomainError(f"{self.tag} takes {self.k} free parameters, got {len(values)}")
            free = dict(zip(self.free_params, (float(v) for v in values)))
        return BlfrParams(**{**self.fixed, **free})

    def free_values(self, params):
        return np.array([getattr(params, name) for name in self.free_params])

    def free_indices(self):
        return [PARAM_NAMES.index(name) for name in self.free_params]

    def contains(self, params, tol=0.0):
        return all(abs(getattr(params, name) - value) <= tol for name, value in self.fixed.items())

    def is_nested_in(self, other):
        """True when every restriction of ``other`` is also a restriction of ``self``."""
        return all(self.fixed.get(name) == value for name, value in other.fixed.items())

    @staticmethod
    def get(name):
        if isinstance(name, Family):
            return name
        key = str(name).strip().lower()
        key = _ALIASES.get(key, key)
        try:
            return FAMILIES[key]
        except KeyError:
            raise DomainError(f"unknown family {name!r}; expected one of {sorted(FAMILIES)}") from None

    def __repr__(self):
        return f"Family({self.tag})"


def _family(tag, free, **fixed):
    return Family(tag=tag, free_params=tuple(free), fixed=MappingProxyType(dict(fixed)))


BLFR = _family("BLFR", PARAM_NAMES)
GLFR = _family("GLFR", ("a", "b", "alpha"), beta=1.0)
LFR = _family("LFR", ("a", "b"), alpha=1.0, beta=1.0)
GR = _family("GR", ("b", "alpha"), a=0.0, beta=1.0)
GE = _family("GE", ("a", "alpha"), b=0.0, beta=1.0)
RAYLEIGH = _family("Rayleigh", ("b",), a=0.0, alpha=1.0, beta=1.0)
EXP = _family("Exp", ("a",), b=0.0, alpha=1.0, beta=1.0)

FAMILIES = {f.tag.lower(): f for f in (BLFR, GLFR, LFR, GR, GE, RAYLEIGH, EXP)}
_ALIASES = {"exponential": "exp", "exp.": "exp", "ray": "rayleigh", "burrx": "gr", "burr-x": "gr"}


class HazardShape(enum.Enum):
    INCREASING = "Increasing"
    DECREASING = "Decreasing"
    CONSTANT = "Constant"
    BATHTUB = "Bathtub"
    UPSIDE_DOWN_BATHTUB = "UpsideDownBathtub"
    UNCLASSIFIED = "Unclassified"


class Mode(NamedTuple):
    location: float
    kind: str  # "interior", "boundary-zero" or "diverges-at-zero"


def _as_support(x):
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError("x must be non-negative")
    return arr


def _wrap(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


def _exponent(x, a, b):
    # t = -a x - b x^2 / 2, the log of the LFR survival function
    if b == 0:
        return -a * x
    if a == 0:
        return -0.5 * b * x * x
    return -a * x - 0.5 * b * x * x


def lfr_cdf(x, a, b):
    """Linear failure rate CDF ``1 - exp(-a x - b x^2 / 2)``."""
    BlfrParams(a, b, 1.0, 1.0)
    arr = _as_support(x)
    return _wrap(-np.expm1(_exponent(arr, a, b)), x)


def lfr_pdf(x, a, b):
    BlfrParams(a, b, 1.0, 1.0)
    arr = _as_support(x)
    return _wrap((a + b * arr) * np.exp(_exponent(arr, a, b)), x)


def lfr_quantile(y, a, b):
    """Inverse of :func:`lfr_cdf` for ``y`` in [0, 1).

    Evaluated as ``2 s / (a + sqrt(a^2 + 2 b s))`` with ``s = -log1p(-y)``,
    the cancellation-free form of ``(-a + sqrt(a^2 - 2 b log(1 - y))) / b``.
    """
    BlfrParams(a, b, 1.0, 1.0)
    arr = np.asarray(y, dtype=float)
    if np.any(~((arr >= 0) & (arr < 1))):
        raise DomainError("y must lie in [0, 1)")
    return _wrap(_backend.lfr_inverse(arr, a, b), y)


def _logpdf_at_zero(params):
    a, b, al, be = params.a, params.b, params.alpha, params.beta
    lb = log_beta(al, be)
    if a > 0:
        # f(x) ~ a (a x)^(alpha - 1) / B
        if al == 1.0:
            return math.log(a) - lb
        return math.inf if al < 1.0 else -math.inf
    # a = 0: f(x) ~ b x (b x^2 / 2)^(alpha - 1) / B, order x^(2 alpha - 1)
    if al == 0.5:
        return math.log(b) - 0.5 * math.log(0.5 * b) - lb
    return math.inf if al < 0.5 else -math.inf


def blfr_logpdf(x, params):
    """Log density; ``+inf`` at ``x = 0`` where the density diverges."""
    arr = _as_support(x)
    a, b, al, be = params.a, params.b, params.alpha, params.beta
    t = _exponent(arr, a, b)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_g = log1mexp(t)
        shape_term = (al - 1.0) * log_g if al != 1.0 else np.zeros_like(t)
        out = np.log(a + b * arr) - log_beta(al, be) + shape_term + be * t
    zero = arr == 0
    if np.any(zero):
        out = np.where(zero, _logpdf_at_zero(params), out)
    return _wrap(out, x)


def blfr_pdf(x, params):
    """BLFR density ``(a + b x) / B(alpha, beta) * G^(alpha - 1) * (1 - G)^beta``."""
    return _wrap(np.exp(np.asarray(blfr_logpdf(x, params))), x)


def _cdf_sf(x, params):
    arr = _as_support(x)
    t = _exponent(arr, params.a, params.b)
    return inc_beta_pair(-np.expm1(t), np.exp(t), params.alpha, params.beta)


def blfr_cdf(x, params):
    """``I_{G(x)}(alpha, beta)``."""
    return _wrap(_cdf_sf(x, params)[0], x)


def blfr_sf(x, params):
    """Survival function, evaluated on the reflected incomplete beta so the upper tail keeps precision."""
    return _wrap(_cdf_sf(x, params)[1], x)


def blfr_hazard(x, params):
    """Hazard ``f / (1 - F)``; ``+inf`` once the survival function underflows."""
    logf = np.asarray(blfr_logpdf(x, params))
    sf = np.asarray(_cdf_sf(x, params)[1])
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        out = np.where(sf > 0, np.exp(logf - np.log(np.where(sf > 0, sf, 1.0))), math.inf)
    return _wrap(out, x)


def _lfr_inverse_log_sf(s, a, b):
    # LFR quantile from s = -log(1 - y)
    if b > 0:
        return 2.0 * s / (a + np.sqrt(a * a + 2.0 * b * s))
    return s / a


def blfr_quantile(p, params):
    """Quantile: the beta quantile of ``p`` mapped through the LFR inverse CDF.

    Below the beta median this is exactly the transform the sampler applies
    to a beta variate. Above it the complement ``1 - y`` from the beta
    inversion is used directly, so upper quantiles stay finite even when
    ``y`` itself rounds to 1.
    """
    arr = np.asarray(p, dtype=float)
    if np.any(~((arr > 0) & (arr < 1))):
        raise DomainError("p must lie in (0, 1)")
    out = np.empty(arr.shape)
    flat = out.reshape(-1)
    for i, v in enumerate(arr.reshape(-1)):
        y, ymc = inv_reg_inc_beta_pair(float(v), params.alpha, params.beta)
        if y <= 0.5:
            flat[i] = _backend.lfr_inverse(np.array(y), params.a, params.b)
        else:
            flat[i] = _lfr_inverse_log_sf(-math.log(ymc), params.a, params.b)
    return _wrap(out, p)


def _golden_max(f, lo, hi, tol):
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - inv_phi * (hi - lo)
    d = lo + inv_phi * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc > fd:
            hi, d, fd = d, c, fc
            c = hi - inv_phi * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + inv_phi * (hi - lo)
            fd = f(d)
    return 0.5 * (lo + hi)


def blfr_mode(params):
    """Location of the density maximum.

    Closed form for ``alpha = 1``; golden-section search on ``[0, q(0.999)]``
    for an interior maximum otherwise; ``"diverges-at-zero"`` when the
    density is unbounded at the origin.
    """
    a, b, al, be = params.a, params.b, params.alpha, params.beta
    if al == 1.0:
        c = -a + math.sqrt(b / be)
        if b > 0 and c > 0:
            return Mode(c / b, "interior")
        return Mode(0.0, "boundary-zero")
    if _logpdf_at_zero(params) == math.inf:
        return Mode(0.0, "diverges-at-zero")
    hi = float(blfr_quantile(0.999, params))
    grid = np.concatenate([np.geomspace(hi * 1e-9, hi, 400)])
    vals = np.asarray(blfr_logpdf(grid, params))
    i = int(np.argmax(vals))
    lo_b = grid[i - 1] if i > 0 else 0.0
    hi_b = grid[min(i + 1, grid.size - 1)]
    if i == 0 and vals[0] <= _logpdf_at_zero(params):
        return Mode(0.0, "boundary-zero")
    x = _golden_max(lambda v: float(blfr_logpdf(v, params)), lo_b, hi_b, 1e-13 * hi_b)
    return Mode(float(x), "interior")


def classify_hazard_shape(params):
    """Hazard shape from the analytic cases only; never inferred from evaluation.

    With ``a = 0`` the density behaves like ``x^(2 alpha - 1)`` at the origin,
    so for ``1/2 <= alpha < 1`` the hazard starts at zero instead of
    infinity and the bathtub label does not apply; that region is reported
    as unclassified.
    """
    a, b, al = params.a, params.b, params.alpha
    if b == 0:
        if al == 1.0:
            return HazardShape.CONSTANT
        return HazardShape.DECREASING if al < 1.0 else HazardShape.INCREASING
    if al >= 1.0:
        return HazardShape.INCREASING
    if a == 0 and al >= 0.5:
        return HazardShape.UNCLASSIFIED
    return HazardShape.BATHTUB


def empirical_hazard_shape(params, n_grid=500, p_lo=1e-14, p_hi=1 - 1e-14, rtol=1e-9):
    """Exploratory shape label from the sign pattern of hazard differences.

    Unlike :func:`classify_hazard_shape` this can report an upside-down
    bathtub, for parameter regions without an analytic result.
    """
    lo, hi = blfr_quantile(np.array([p_lo, p_hi]), params)
    grid = np.geomspace(max(lo, 1e-300), hi, n_grid)
    h = np.asarray(blfr_hazard(grid, params))
    d = np.diff(h)
    scale = rtol * np.maximum(np.abs(h[1:]), np.abs(h[:-1]))
    signs = np.where(d > scale, 1, np.where(d < -scale, -1, 0))
    runs = [s for s in signs if s != 0]
    pattern = [s for i, s in enumerate(runs) if i == 0 or s != runs[i - 1]]
    if not pattern:
        return HazardShape.CONSTANT
    lookup = {
        (1,): HazardShape.INCREASING,
        (-1,): HazardShape.DECREASING,
        (-1, 1): HazardShape.BATHTUB,
        (1, -1): HazardShape.UPSIDE_DOWN_BATHTUB,
    }
    return lookup.get(tuple(pattern), HazardShape.UNCLASSIFIED)
