"""Goodness of fit, information criteria, likelihood-ratio tests and TTT plots."""

import csv
import io
import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .distribution import FAMILIES, BlfrParams, Family, blfr_cdf
from .estimation import FitOptions, FitResult, fit
from .exceptions import BlfrError, DomainError, OptimizerFailure
from .special import chi2_sf

PIT_CLIP = 1e-15
KOLMOGOROV_TOL = 1e-12


class ClippingWarning(UserWarning):
    """Fitted CDF values hit 0 or 1 and were clipped before taking logs."""


def _as_dataset(data):
    return data if isinstance(data, Dataset) else Dataset(np.asarray(data, dtype=float))


def _cdf_callable(cdf):
    if isinstance(cdf, BlfrParams):
        return lambda x: blfr_cdf(x, cdf)
    if isinstance(cdf, FitResult):
        return lambda x: blfr_cdf(x, cdf.theta_hat)
    return cdf


def _pit(data, cdf):
    """Sorted probability-integral transforms ``u_(i) = F(x_(i))`` and a clipping flag."""
    x = _as_dataset(data).sorted()
    u = np.asarray(_cdf_callable(cdf)(x), dtype=float)
    clipped = bool(np.any((u < PIT_CLIP) | (u > 1.0 - PIT_CLIP)))
    if clipped:
        warnings.warn("fitted CDF values clipped to [1e-15, 1 - 1e-15]", ClippingWarning, stacklevel=3)
        u = np.clip(u, PIT_CLIP, 1.0 - PIT_CLIP)
    return u, clipped


def information_criteria(fit_result, n=None):
    """``(aic, aicc, bic)``; ``n`` defaults to the fitted sample size.

    AICC is infinite when ``n <= k + 1``.
    """
    m2ll, k = fit_result.minus2loglik, fit_result.family.k
    n = fit_result.n if n is None else n
    aic = m2ll + 2 * k
    aicc = aic + 2 * k * (k + 1) / (n - k - 1) if n - k - 1 > 0 else math.inf
    bic = m2ll + k * math.log(n)
    return aic, aicc, bic


def kolmogorov_sf(lam):
    """Asymptotic Kolmogorov tail ``P(sqrt(n) D > lam)``.

    Uses the alternating series ``2 sum (-1)^(k-1) exp(-2 k^2 lam^2)`` and, for
    ``lam < 1``, where that series converges slowly, the Jacobi-transformed
    form ``1 - sqrt(2 pi)/lam * sum exp(-(2k - 1)^2 pi^2 / (8 lam^2))``.
    """
    if lam <= 0:
        return 1.0
    if lam < 1.0:
        total = 0.0
        for k in range(1, 100):
            term = math.exp(-((2 * k - 1) ** 2) * math.pi ** 2 / (8.0 * lam * lam))
            total += term
            if term < KOLMOGOROV_TOL * total:
                break
        return min(1.0, max(0.0, 1.0 - math.sqrt(2.0 * math.pi) / lam * total))
    total = 0.0
    for k in range(1, 100):
        term = math.exp(-2.0 * k * k * lam * lam)
        total += term if k % 2 else -term
        if term < KOLMOGOROV_TOL:
            break
    return min(1.0, max(0.0, 2.0 * total))


def ks_test(data, cdf):
    """One-sample Kolmogorov-Smirnov statistic and asymptotic p-value.

    ``cdf`` is a callable, a :class:`BlfrParams` or a :class:`FitResult`.
    """
    x = _as_dataset(data).sorted()
    n = x.size
    u = np.asarray(_cdf_callable(cdf)(x), dtype=float)
    i = np.arange(1, n + 1)
    d = float(max(np.max(i / n - u), np.max(u - (i - 1) / n)))
    return d, kolmogorov_sf(math.sqrt(n) * d)


def ad_statistic(data, cdf):
    """Anderson-Darling ``-n - (1/n) sum (2i - 1)[ln u_(i) + ln(1 - u_(n+1-i))]``."""
    u, _ = _pit(data, cdf)
    n = u.size
    i = np.arange(1, n + 1)
    return float(-n - np.sum((2 * i - 1) * (np.log(u) + np.log1p(-u[::-1]))) / n)


def cm_statistic(data, cdf):
    """Cramer-von Mises ``1/(12n) + sum (u_(i) - (2i - 1)/(2n))^2``."""
    u, _ = _pit(data, cdf)
    n = u.size
    i = np.arange(1, n + 1)
    return float(1.0 / (12 * n) + np.sum((u - (2 * i - 1) / (2.0 * n)) ** 2))


@dataclass
class GofReport:
    family: Family
    k: int
    minus2loglik: float
    aic: float
    aicc: float
    bic: float
    ks_stat: float
    ks_pvalue: float
    ad_stat: float
    cm_stat: float
    n: int = 0
    theta_hat: BlfrParams = None
    std_errors: dict = None
    clipped: bool = False
    error: str = None
    fit: FitResult = field(default=None, repr=False, compare=False)

    @property
    def ok(self):
        return self.error is None

    def to_dict(self):
        def num(v):
            return None if v is None or not math.isfinite(v) else float(v)

        return {
            "family": self.family.tag,
            "k": self.k,
            "n": self.n,
            "minus2loglik": num(self.minus2loglik),
            "aic": num(self.aic),
            "aicc": num(self.aicc),
            "bic": num(self.bic),
            "ks_stat": num(self.ks_stat),
            "ks_pvalue": num(self.ks_pvalue),
            "ad_stat": num(self.ad_stat),
            "cm_stat": num(self.cm_stat),
            "theta_hat": None if self.theta_hat is None else self.theta_hat.to_dict(),
            "std_errors": self.std_errors,
            "clipped": self.clipped,
            "error": self.error,
        }


def gof_report(fit_result, data):
    """Bundle criteria and EDF statistics for a fitted model."""
    data = _as_dataset(data)
    aic, aicc, bic = information_criteria(fit_result, data.n)
    ks, p = ks_test(data, fit_result.theta_hat)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ClippingWarning)
        ad = ad_statistic(data, fit_result.theta_hat)
        cm = cm_statistic(data, fit_result.theta_hat)
    return GofReport(
        family=fit_result.family,
        k=fit_result.family.k,
        minus2loglik=fit_result.minus2loglik,
        aic=aic,
        aicc=aicc,
        bic=bic,
        ks_stat=ks,
        ks_pvalue=p,
        ad_stat=ad,
        cm_stat=cm,
        n=data.n,
        theta_hat=fit_result.theta_hat,
        std_errors=fit_result.std_errors,
        clipped=any(issubclass(w.category, ClippingWarning) for w in caught),
        fit=fit_result,
    )


def _failed_report(family, n, message):
    nan = math.nan
    return GofReport(family, family.k, nan, nan, nan, nan, nan, nan, nan, nan, n=n, error=message)


def compare_models(data, families=None, options=None):
    """Fit each family and rank by AIC, ties broken by the larger K-S p-value.

    A family whose fit fails is kept, with ``error`` set, at the end of the
    ranking.
    """
    data = _as_dataset(data)
    fams = [Family.get(f) for f in (list(FAMILIES.values()) if families is None else families)]
    if not fams:
        raise DomainError("at least one family is required")
    reports = []
    for fam in fams:
        try:
            reports.append(gof_report(fit(fam, data, options or FitOptions()), data))
        except BlfrError as exc:
            reports.append(_failed_report(fam, data.n, f"{type(exc).__name__}: {exc}"))
    order = sorted(
        range(len(reports)),
        key=lambda i: (
            not reports[i].ok,
            reports[i].aic if reports[i].ok else math.inf,
            -reports[i].ks_pvalue if reports[i].ok else 0.0,
            i,
        ),
    )
    return [reports[i] for i in order]


@dataclass
class LrTestResult:
    null_family: Family
    alt_family: Family
    lr_stat: float
    df: int
    pvalue: float

    def to_dict(self):
        return {
            "null_family": self.null_family.tag,
            "alt_family": self.alt_family.tag,
            "lr_stat": self.lr_stat,
            "df": self.df,
            "pvalue": self.pvalue,
        }


def lr_test(null_fit, alt_fit, tol=1e-6):
    """Likelihood-ratio test of a nested sub-model against a larger family.

    The p-value is the naive chi-square tail. When the restriction pins a
    parameter on the edge of its range (a = 0 or b = 0) the chi-square
    reference is not exact; the naive value is still what is reported.
    """
    null_fam, alt_fam = null_fit.family, alt_fit.family
    if null_fam == alt_fam or not null_fam.is_nested_in(alt_fam):
        raise DomainError(f"{null_fam.tag} is not a proper sub-model of {alt_fam.tag}")
    if null_fit.n != alt_fit.n:
        raise DomainError("fits were made on samples of different sizes")
    stat = null_fit.minus2loglik - alt_fit.minus2loglik
    if stat < -tol * max(1.0, abs(alt_fit.minus2loglik)):
        raise OptimizerFailure(
            f"-2logL of {null_fam.tag} is below that of {alt_fam.tag} by {-stat:.3g}; the larger fit missed its optimum"
        )
    stat = max(stat, 0.0)
    df = alt_fam.k - null_fam.k
    return LrTestResult(null_fam, alt_fam, stat, df, chi2_sf(stat, df))


def ttt_transform(data):
    """Empirical scaled total-time-on-test curve as an ``(n + 1, 2)`` array.

    Row ``i`` is ``(i/n, [sum_{j<=i} x_(j) + (n - i) x_(i)] / sum x)``.
    """
    x = _as_dataset(data).sorted()
    n = x.size
    if n < 2:
        raise DomainError("the TTT transform needs at least two observations")
    total = math.fsum(x)
    cum = np.concatenate([[0.0], np.cumsum(x)])
    i = np.arange(n + 1)
    xi = np.concatenate([[0.0], x])
    t = (cum + (n - i) * xi) / total
    t[0], t[-1] = 0.0, 1.0
    return np.column_stack([i / n, t])


def ttt_signature(data, window=5, tol=1e-12):
    """Sign pattern of second differences of the TTT curve after a centered moving average.

    Returns a string with one character per run of constant sign, such as
    ``"+-"`` for a convex-then-concave curve (bathtub hazard), plus the
    smoothed differences themselves.
    """
    t = ttt_transform(data)[:, 1]
    d2 = np.diff(t, 2)
    if d2.size < window:
        raise DomainError(f"need at least {window + 2} TTT points for a {window}-point smoother")
    smooth = np.convolve(d2, np.ones(window) / window, mode="valid")
    chars = ["+" if v > tol else "-" if v < -tol else "" for v in smooth]
    runs = "".join(k for k, _ in itertools.groupby(c for c in chars if c))
    return runs, smooth


def empirical_cdf(data):
    """Order statistics paired with ``i/n``, as an ``(n, 2)`` array."""
    x = _as_dataset(data).sorted()
    n = x.size
    return np.column_stack([x, np.arange(1, n + 1) / n])


REPORT_COLUMNS = ("family", "k", "n", "minus2loglik", "aic", "aicc", "bic", "ks_stat", "ks_pvalue", "ad_stat", "cm_stat", "error")


def reports_to_csv(reports):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for r in reports:
        d = r.to_dict()
        writer.writerow(["" if d[c] is None else (repr(d[c]) if isinstance(d[c], float) else d[c]) for c in REPORT_COLUMNS])
    return buf.getvalue()


def two_column_csv(rows, header):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for a, b in rows:
        writer.writerow([repr(float(a)), repr(float(b))])
    return buf.getvalue()

