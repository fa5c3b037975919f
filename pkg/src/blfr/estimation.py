"""Maximum-likelihood fitting of the BLFR family and its sub-models.

Free parameters are optimized on the log scale. Each start runs a
Nelder-Mead simplex, then BFGS with the analytic score, then a damped Newton
refinement with the analytic Hessian. A start counts as converged only if
the natural-scale score satisfies ``max |U| < 1e-6 n``, so drifts toward a
zero-parameter boundary (where the log-scale gradient vanishes but the score
does not) are never reported as optima. Saddles, where the observed
information has a clearly negative eigenvalue, are rejected as well. A
numerically singular information matrix still counts as converged, with the
standard errors left unavailable.
"""

import math
import statistics
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve
from scipy.optimize import minimize

from . import _backend
from .data import Dataset
from .distribution import BLFR, PARAM_NAMES, BlfrParams, Family
from .exceptions import DomainError, NonConvergenceError
from .sampling import RngState

_Z_CLIP = 700.0


def _as_dataset(data):
    return data if isinstance(data, Dataset) else Dataset(np.asarray(data, dtype=float))


def loglik(theta, data):
    """Log-likelihood of a complete sample."""
    data = _as_dataset(data)
    return _backend.loglik_derivs(data.observations, theta.a, theta.b, theta.alpha, theta.beta, 0)[0]


def _check_interior(theta, family):
    for name in family.free_params:
        if not getattr(theta, name) > 0:
            raise DomainError(f"{name} = 0 lies on the boundary; the score needs {name} > 0")


def score(theta, data, family=BLFR):
    """Score vector over ``(a, b, alpha, beta)``.

    All four components are returned; entries for a family's pinned
    parameters are still the partial derivatives at the pinned value.
    """
    family = Family.get(family)
    _check_interior(theta, family)
    data = _as_dataset(data)
    return _backend.loglik_derivs(data.observations, theta.a, theta.b, theta.alpha, theta.beta, 1)[1]


def observed_info(theta, data, family=BLFR):
    """Observed information ``-d2 l`` restricted to the family's free parameters."""
    family = Family.get(family)
    _check_interior(theta, family)
    data = _as_dataset(data)
    hess = _backend.loglik_derivs(data.observations, theta.a, theta.b, theta.alpha, theta.beta, 2)[2]
    idx = family.free_indices()
    return -hess[np.ix_(idx, idx)]


@dataclass(frozen=True)
class FitOptions:
    """Optimizer settings.

    ``n_starts`` counts the heuristic start plus ``n_starts - 1`` jittered
    restarts drawn on the log scale with standard deviation
    ``jitter_scale`` from the generator seeded with ``seed``. A start whose
    free parameter ends more than ``max_log10_drift`` decades from its
    heuristic value has run off to infinity and is not counted as converged.
    """

    n_starts: int = 8
    seed: int = 20_110_503
    jitter_scale: float = 1.0
    grad_tol_factor: float = 1e-6
    rel_loglik_tol: float = 1e-10
    simplex_maxiter: int = 4000
    bfgs_maxiter: int = 500
    newton_maxiter: int = 100
    max_log10_drift: float = 50.0
    confidence_level: float = 0.95

    def __post_init__(self):
        if self.n_starts < 1:
            raise DomainError("n_starts must be at least 1")
        if not 0 < self.confidence_level < 1:
            raise DomainError("confidence_level must lie in (0, 1)")


@dataclass
class StartRecord:
    index: int
    start: dict
    theta: dict
    loglik: float
    score_sup: float
    converged: bool
    iterations: int
    message: str


@dataclass
class FitResult:
    family: Family
    theta_hat: BlfrParams
    loglik: float
    minus2loglik: float
    score_at_optimum: np.ndarray
    observed_info: np.ndarray
    std_errors: dict = None
    conf_intervals: dict = None
    converged: bool = True
    iterations: int = 0
    boundary_flags: dict = field(default_factory=dict)
    n: int = 0
    confidence_level: float = 0.95
    starts: list = field(default_factory=list)

    @property
    def k(self):
        return self.family.k

    @property
    def std_errors_available(self):
        return self.std_errors is not None

    def to_dict(self, include_starts=False):
        def clean(v):
            return None if v is None or not math.isfinite(v) else float(v)

        out = {
            "family": self.family.tag,
            "free_params": list(self.family.free_params),
            "theta_hat": self.theta_hat.to_dict(),
            "loglik": clean(self.loglik),
            "minus2loglik": clean(self.minus2loglik),
            "score_at_optimum": {k: clean(v) for k, v in zip(self.family.free_params, self.score_at_optimum)},
            "observed_info": [[clean(v) for v in row] for row in self.observed_info],
            "std_errors": None if self.std_errors is None else {k: clean(v) for k, v in self.std_errors.items()},
            "confidence_level": self.confidence_level,
            "conf_intervals": None
            if self.conf_intervals is None
            else {p: {kind: [clean(v) for v in iv] for kind, iv in t.items()} for p, t in self.conf_intervals.items()},
            "converged": self.converged,
            "iterations": self.iterations,
            "boundary_flags": dict(self.boundary_flags),
            "n": self.n,
        }
        if include_starts:
            out["starts"] = [vars(s) for s in self.starts]
        return out


class _Objective:
    """Log-likelihood over log-scale free parameters, with pinned values filled in."""

    def __init__(self, family, x):
        self.family = family
        self.x = x
        self.idx = family.free_indices()
        base = np.array([family.fixed.get(name, 1.0) for name in PARAM_NAMES])
        self.base = base

    def theta(self, z):
        full = self.base.copy()
        full[self.idx] = np.exp(np.clip(z, -_Z_CLIP, _Z_CLIP))
        return full

    def derivs(self, z, order):
        th = self.theta(z)
        with np.errstate(all="ignore"):
            return th, _backend.loglik_derivs(self.x, th[0], th[1], th[2], th[3], order)

    def neg_ll(self, z):
        ll = self.derivs(z, 0)[1][0]
        return -ll if math.isfinite(ll) else 1e300

    def neg_ll_grad(self, z):
        th, (ll, g, _) = self.derivs(z, 1)
        if not math.isfinite(ll) or not np.all(np.isfinite(g)):
            return 1e300, np.zeros(len(self.idx))
        return -ll, -(th[self.idx] * g[self.idx])

    def z_newton(self, z):
        th, (ll, g, h) = self.derivs(z, 2)
        t = th[self.idx]
        with np.errstate(all="ignore"):
            gz = t * g[self.idx]
            hz = h[np.ix_(self.idx, self.idx)] * np.outer(t, t) + np.diag(gz)
        return ll, gz, hz, g[self.idx]


def _heuristic_start(family, x):
    mean = float(np.mean(x))
    guess = {"a": 1.0 / mean, "b": 2.0 / mean ** 2, "alpha": 1.0, "beta": 1.0}
    return np.log([guess[name] for name in family.free_params])


def _newton_refine(obj, z, opts, n):
    ll, gz, hz, g = obj.z_newton(z)
    iters = 0
    for iters in range(1, opts.newton_maxiter + 1):
        if not (math.isfinite(ll) and np.all(np.isfinite(hz))):
            break
        mu = 0.0
        eye = np.eye(len(z))
        scale = max(1e-12, float(np.max(np.abs(np.diag(hz)))))
        chol = None
        for _ in range(60):
            try:
                chol = np.linalg.cholesky(-(hz - mu * eye))
                break
            except np.linalg.LinAlgError:
                mu = scale * 1e-8 if mu == 0.0 else 10.0 * mu
        if chol is None:
            break
        step = cho_solve((chol, True), gz)
        if not np.all(np.isfinite(step)):
            break
        t = 1.0
        improved = False
        for _ in range(40):
            z_new = z + t * step
            ll_new, gz_new, hz_new, g_new = obj.z_newton(z_new)
            if math.isfinite(ll_new) and ll_new >= ll - 1e-12 * abs(ll):
                improved = True
                break
            t *= 0.5
        if not improved:
            break
        change = abs(ll_new - ll)
        z, ll, gz, hz, g = z_new, ll_new, gz_new, hz_new, g_new
        if np.max(np.abs(g)) < opts.grad_tol_factor * n and change <= opts.rel_loglik_tol * max(1.0, abs(ll)):
            break
    return z, ll, g, iters


def _run_start(obj, z0, opts, n):
    k = len(z0)
    simplex = np.vstack([z0] + [z0 + 0.5 * np.eye(k)[i] for i in range(k)])
    iters = 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = minimize(
            obj.neg_ll,
            z0,
            method="Nelder-Mead",
            options={"initial_simplex": simplex, "maxiter": opts.simplex_maxiter, "xatol": 1e-6, "fatol": 1e-9},
        )
        iters += res.nit
        z = res.x
        res = minimize(obj.neg_ll_grad, z, jac=True, method="BFGS", options={"maxiter": opts.bfgs_maxiter, "gtol": 1e-8})
        iters += res.nit
        if math.isfinite(res.fun) and res.fun <= obj.neg_ll(z):
            z = res.x
    z, ll, g, newton_iters = _newton_refine(obj, z, opts, n)
    return z, ll, g, iters + newton_iters


def _positive_definite(m):
    try:
        np.linalg.cholesky(m)
        return True
    except np.linalg.LinAlgError:
        return False


def _not_saddle(m, rtol=1e-8):
    """False only for a clearly indefinite matrix; singular ones pass."""
    if not np.all(np.isfinite(m)):
        return False
    eig = np.linalg.eigvalsh(m)
    return bool(eig[0] >= -rtol * np.max(np.abs(eig)))


def _start_message(ok, escaped, drift, limit):
    if ok:
        return "stationary point"
    if not escaped:
        return "no interior stationary point"
    return "collapsed toward the boundary" if np.min(drift) < -limit else "escaped to infinity"


def _normal_quantile(level):
    return statistics.NormalDist().inv_cdf(0.5 + 0.5 * level)


def _interval_table(theta, family, std_errors, level):
    z = _normal_quantile(level)
    table = {}
    for name in family.free_params:
        est, se = getattr(theta, name), std_errors[name]
        log_half = z * se / est
        grow = math.exp(log_half) if log_half < 700.0 else math.inf
        table[name] = {
            "wald": [est - z * se, est + z * se],
            "log_scale": [est / grow, est * grow],
        }
    return table


def fit(family, data, options=None):
    """Maximum-likelihood fit of ``family`` to ``data``.

    Returns the best converged start (highest log-likelihood, lowest start
    index on ties).

    Raises
    ------
    NonConvergenceError
        If no start reaches an interior stationary point; ``diagnostics``
        lists every start.
    """
    family = Family.get(family)
    data = _as_dataset(data)
    opts = options or FitOptions()
    if data.n < family.k:
        raise DomainError(f"{family.tag} has {family.k} free parameters but the sample has {data.n} values")
    x = data.observations
    n = data.n
    obj = _Objective(family, x)
    z_heur = _heuristic_start(family, x)
    rng = RngState(opts.seed)
    jitters = rng.uniforms(max(0, opts.n_starts - 1) * family.k)
    nd = statistics.NormalDist()
    starts = [z_heur] + [
        z_heur + opts.jitter_scale * np.array([nd.inv_cdf(u) for u in jitters[i * family.k:(i + 1) * family.k]])
        for i in range(opts.n_starts - 1)
    ]

    records = []
    best = None
    for i, z0 in enumerate(starts):
        z, ll, g, iters = _run_start(obj, z0, opts, n)
        th = obj.theta(z)
        sup = float(np.max(np.abs(g))) if np.all(np.isfinite(g)) else math.inf
        ok = math.isfinite(ll) and sup < opts.grad_tol_factor * n
        drift = (z - z_heur) / math.log(10.0)
        escaped = bool(np.any(np.abs(drift) > opts.max_log10_drift))
        ok = ok and not escaped
        if ok:
            params = BlfrParams.from_array(th)
            ok = all(getattr(params, nm) > 0 for nm in family.free_params) and _not_saddle(
                observed_info(params, data, family)
            )
        rec = StartRecord(
            index=i,
            start=dict(zip(family.free_params, np.exp(z0).tolist())),
            theta=dict(zip(PARAM_NAMES, th.tolist())),
            loglik=float(ll),
            score_sup=sup,
            converged=bool(ok),
            iterations=int(iters),
            message=_start_message(ok, escaped, drift, opts.max_log10_drift),
        )
        records.append(rec)
        if ok and (best is None or ll > best[0] + 1e-9 * abs(ll)):
            best = (ll, th, g, iters)

    if best is None:
        raise NonConvergenceError(f"no start converged for {family.tag}", diagnostics=[vars(r) for r in records])

    ll, th, g, iters = best
    theta = BlfrParams.from_array(th)
    info = observed_info(theta, data, family)
    std_errors = None
    if _positive_definite(info):
        se_vals = np.sqrt(np.diag(np.linalg.inv(info)))
        if np.all(np.isfinite(se_vals)):
            std_errors = dict(zip(family.free_params, se_vals.tolist()))
    heur = np.exp(z_heur)
    flags = {}
    for j, name in enumerate(family.free_params):
        # a start that climbed above the reported optimum while this parameter collapsed toward zero
        flags[name] = any(
            r.loglik > ll + 1e-6 and r.theta[name] < 1e-3 * heur[j] for r in records if not r.converged
        )
    conf = _interval_table(theta, family, std_errors, opts.confidence_level) if std_errors else None
    return FitResult(
        family=family,
        theta_hat=theta,
        loglik=float(ll),
        minus2loglik=-2.0 * float(ll),
        score_at_optimum=np.asarray(g, dtype=float),
        observed_info=info,
        std_errors=std_errors,
        conf_intervals=conf,
        converged=True,
        iterations=int(iters),
        boundary_flags=flags,
        n=n,
        confidence_level=opts.confidence_level,
        starts=records,
    )


def confidence_intervals(fit_result, gamma=0.05):
    """Wald intervals ``theta_hat +/- z_(gamma/2) se`` and their log-scale counterparts.

    Wald lower bounds are not truncated at zero; the log-scale intervals
    ``theta_hat * exp(+/- z se / theta_hat)`` stay positive.
    """
    if not 0 < gamma < 1:
        raise DomainError("gamma must lie in (0, 1)")
    if not fit_result.converged or fit_result.std_errors is None:
        raise DomainError("standard errors are unavailable for this fit")
    return _interval_table(fit_result.theta_hat, fit_result.family, fit_result.std_errors, 1.0 - gamma)
