import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special as sp
from scipy import stats

from blfr import BLFR, EXP, FAMILIES, BlfrParams, DomainError, RngState, blfr_logpdf, sample_blfr
from blfr.exceptions import NonConvergenceError
from blfr.estimation import (
    FitOptions,
    FitResult,
    _not_saddle,
    _Objective,
    _positive_definite,
    _run_start,
    confidence_intervals,
    fit,
    loglik,
    observed_info,
    score,
)

PARAMS = ("a", "b", "alpha", "beta")
pos = st.floats(0.05, 4.0)


def _sample(theta, n, seed):
    return sample_blfr(n, theta, RngState(seed))


def _fd_score(theta, x, k):
    v = theta.as_array()
    h = 1e-6 * max(1.0, abs(v[k]))
    up, dn = v.copy(), v.copy()
    up[k] += h
    dn[k] -= h
    return (loglik(BlfrParams.from_array(up), x) - loglik(BlfrParams.from_array(dn), x)) / (2 * h)


def test_loglik_single_exponential_observation():
    assert loglik(BlfrParams(1.0, 0.0, 1.0, 1.0), [1.0]) == pytest.approx(-1.0, abs=1e-15)


@settings(max_examples=50, deadline=None)
@given(pos, pos, pos, pos, st.integers(0, 2**32))
def test_loglik_is_sum_of_log_densities(a, b, al, be, seed):
    theta = BlfrParams(a, b, al, be)
    x = _sample(theta, 40, seed)
    assert loglik(theta, x) == pytest.approx(float(np.sum(blfr_logpdf(x, theta))), rel=1e-10, abs=1e-10)


def test_aarset_loglik_at_reported_optimum(aarset_data):
    # rows of the published table carry the baseline rates under the shape labels
    theta = BlfrParams(0.0172, 0.00348, 0.3347, 0.1243)
    assert -2 * loglik(theta, aarset_data) == pytest.approx(460.8, abs=0.5)


def test_score_beta_identity_for_exponential():
    x = _sample(BlfrParams(0.7, 0.0, 1.0, 1.0), 60, 3)
    a = 0.9
    u = score(BlfrParams(a, 0.0, 1.0, 1.0), x, EXP)
    assert u[3] == pytest.approx(len(x) - a * x.sum(), rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(pos, pos, pos, pos, st.integers(0, 2**32))
def test_score_matches_finite_differences(a, b, al, be, seed):
    theta = BlfrParams(a, b, al, be)
    x = _sample(BlfrParams(1.0, 0.5, 1.5, 1.0), 30, seed)
    u = score(theta, x)
    for k in range(4):
        fd = _fd_score(theta, x, k)
        assert abs(u[k] - fd) <= 1e-4 * max(1.0, abs(u[k]))


@settings(max_examples=100, deadline=None)
@given(pos, pos, pos, pos, st.integers(0, 2**32))
def test_observed_info_matches_finite_differences_of_score(a, b, al, be, seed):
    theta = BlfrParams(a, b, al, be)
    x = _sample(BlfrParams(1.0, 0.5, 1.5, 1.0), 30, seed)
    j = observed_info(theta, x)
    np.testing.assert_allclose(j, j.T, atol=1e-9 * max(1.0, np.abs(j).max()))
    v = theta.as_array()
    for k in range(4):
        h = 1e-6 * max(1.0, abs(v[k]))
        up, dn = v.copy(), v.copy()
        up[k] += h
        dn[k] -= h
        col = -(score(BlfrParams.from_array(up), x) - score(BlfrParams.from_array(dn), x)) / (2 * h)
        scale = max(1.0, np.abs(j[:, k]).max())
        assert np.all(np.abs(j[:, k] - col) <= 1e-3 * scale)


def test_observed_info_closed_form_entries():
    x = _sample(BlfrParams(1.0, 1.0, 1.0, 1.0), 50, 5)
    theta = BlfrParams(0.8, 0.6, 1.3, 0.7)
    j = observed_info(theta, x)
    assert -j[2, 3] == pytest.approx(50 * (math.pi**2 / 6 - 1), rel=1e-12)
    assert j[0, 3] == pytest.approx(x.sum(), rel=1e-12)
    assert j[1, 3] == pytest.approx(0.5 * np.sum(x**2), rel=1e-12)
    assert j[3, 3] == pytest.approx(50 * (sp.polygamma(1, 0.7) - sp.polygamma(1, 2.0)), rel=1e-12)


def test_observed_info_restricts_to_free_parameters():
    x = _sample(BlfrParams(1.0, 0.0, 1.0, 1.0), 20, 6)
    j = observed_info(BlfrParams(1.1, 0.0, 1.0, 1.0), x, EXP)
    assert j.shape == (1, 1) and j[0, 0] == pytest.approx(20 / 1.1**2, rel=1e-12)


def test_boundary_theta_is_rejected():
    x = [0.5, 1.0, 2.0]
    with pytest.raises(DomainError):
        score(BlfrParams(0.0, 1.0, 1.0, 1.0), x)
    with pytest.raises(DomainError):
        observed_info(BlfrParams(1.0, 0.0, 1.0, 1.0), x)


def test_aarset_blfr_fit(aarset_fits):
    r = aarset_fits["blfr"]
    assert r.converged and r.minus2loglik == pytest.approx(460.8, abs=0.5)
    th = r.theta_hat
    assert (th.a, th.b, th.alpha, th.beta) == pytest.approx((0.0172, 0.00348, 0.3347, 0.1243), rel=0.02)
    assert np.max(np.abs(r.score_at_optimum)) < 1e-6 * r.n
    assert _positive_definite(r.observed_info)


def test_aarset_standard_errors(aarset_fits):
    se = aarset_fits["blfr"].std_errors
    # printed values, relabelled the same way as the estimates
    printed = {"alpha": 0.1432, "beta": 0.0722, "a": 0.0354, "b": 0.0025}
    for name, ref in printed.items():
        assert se[name] == pytest.approx(ref, rel=0.2)


def test_aarset_exponential_closed_form(aarset_data, aarset_fits):
    r = aarset_fits["exp"]
    assert r.theta_hat.a == pytest.approx(1 / aarset_data.observations.mean(), rel=1e-8)
    assert r.theta_hat.a == pytest.approx(0.02189, abs=5e-6)
    assert r.minus2loglik == pytest.approx(482.2, abs=0.05)


def test_nesting_on_aarset(aarset_fits):
    full = aarset_fits["blfr"].loglik
    for tag, r in aarset_fits.items():
        assert r.family.is_nested_in(BLFR)
        assert full >= r.loglik - 1e-6 * max(1.0, abs(full)), tag
    assert aarset_fits["glfr"].loglik >= aarset_fits["lfr"].loglik - 1e-6
    assert aarset_fits["ge"].loglik >= aarset_fits["exp"].loglik - 1e-6


def test_nesting_on_simulated_data():
    x = _sample(BlfrParams(0.3, 0.2, 1.5, 0.8), 150, 44)
    opts = FitOptions(n_starts=3)
    full = fit("blfr", x, opts).loglik
    for tag, fam in FAMILIES.items():
        try:
            r = fit(fam, x, opts)
        except NonConvergenceError as err:
            # here the LFR optimum sits on a = 0, which is the Rayleigh fit
            assert tag == "lfr"
            assert {d["message"] for d in err.diagnostics} == {"collapsed toward the boundary"}
            best = max(d["loglik"] for d in err.diagnostics)
            assert best == pytest.approx(fit("rayleigh", x).loglik, abs=1e-6)
            continue
        assert full >= r.loglik - 1e-6 * abs(r.loglik), tag


def test_permutation_invariance(aarset_data, aarset_fits):
    shuffled = np.random.default_rng(1).permutation(aarset_data.observations)
    r = fit("blfr", shuffled)
    ref = aarset_fits["blfr"]
    assert r.loglik == pytest.approx(ref.loglik, abs=1e-8)
    assert r.theta_hat.as_array() == pytest.approx(ref.theta_hat.as_array(), rel=1e-4)


def test_refit_from_optimum_is_fixed_point(aarset_data, aarset_fits):
    ref = aarset_fits["blfr"]
    obj = _Objective(BLFR, aarset_data.observations)
    z0 = np.log(BLFR.free_values(ref.theta_hat))
    z, ll, _, _ = _run_start(obj, z0, FitOptions(), aarset_data.n)
    assert ll == pytest.approx(ref.loglik, abs=1e-8)
    np.testing.assert_allclose(np.exp(z), BLFR.free_values(ref.theta_hat), rtol=1e-4)


def test_consistency_at_large_n():
    truth = BlfrParams(0.5, 0.5, 2.0, 1.0)
    r = fit("blfr", _sample(truth, 5000, 2011), FitOptions(n_starts=2))
    assert r.std_errors_available
    for name in PARAMS:
        assert abs(getattr(r.theta_hat, name) - getattr(truth, name)) < 3 * r.std_errors[name], name


def test_exponential_fit_is_deterministic_and_exact():
    x = _sample(BlfrParams(2.0, 0.0, 1.0, 1.0), 500, 9)
    r1, r2 = fit("exp", x), fit("exp", x)
    assert r1.theta_hat == r2.theta_hat
    assert r1.theta_hat.a == pytest.approx(1 / x.mean(), rel=1e-9)
    assert r1.std_errors["a"] == pytest.approx(r1.theta_hat.a / math.sqrt(500), rel=1e-8)


def test_fit_rejects_too_few_observations():
    with pytest.raises(DomainError):
        fit("blfr", [1.0, 2.0, 3.0])
    with pytest.raises(DomainError):
        fit("weibull", [1.0, 2.0, 3.0])


def test_start_records_and_escape_rule(aarset_data, aarset_fits):
    r = aarset_fits["blfr"]
    assert len(r.starts) == FitOptions().n_starts
    for s in r.starts:
        assert s.message in {
            "stationary point",
            "escaped to infinity",
            "collapsed toward the boundary",
            "no interior stationary point",
        }
        assert s.converged == (s.message == "stationary point")
    # with a zero drift allowance only an optimum at the heuristic start could count
    strict = FitOptions(n_starts=2, max_log10_drift=0.0)
    with pytest.raises(NonConvergenceError) as info:
        fit("blfr", aarset_data, strict)
    assert all(not d["converged"] for d in info.value.diagnostics)


def test_saddle_screen():
    assert _not_saddle(np.diag([3.0, 1.0]))
    assert _not_saddle(np.diag([3.0, 0.0]))
    assert not _not_saddle(np.diag([3.0, -1.0]))
    assert not _not_saddle(np.array([[np.nan, 0], [0, 1]]))
    assert not _positive_definite(np.diag([3.0, 0.0]))


def _result_with(se, level=0.95):
    theta = BlfrParams(0.5, 0.0, 1.0, 1.0)
    return FitResult(
        family=EXP,
        theta_hat=theta,
        loglik=-1.0,
        minus2loglik=2.0,
        score_at_optimum=np.zeros(1),
        observed_info=np.eye(1),
        std_errors=se,
        confidence_level=level,
    )


def test_confidence_interval_quantile_and_scaling():
    r = _result_with({"a": 0.1})
    ci = confidence_intervals(r, 0.05)["a"]
    assert ci["wald"] == pytest.approx([0.5 - 1.959964 * 0.1, 0.5 + 1.959964 * 0.1], abs=1e-7)
    assert ci["log_scale"][0] > 0
    w1 = np.diff(confidence_intervals(r, 0.05)["a"]["wald"])[0]
    # gamma = 2 * sf(2 z) doubles the normal quantile
    g2 = 2 * stats.norm.sf(2 * stats.norm.isf(0.025))
    w2 = np.diff(confidence_intervals(r, g2)["a"]["wald"])[0]
    assert w2 == pytest.approx(2 * w1, rel=1e-10)


def test_wald_lower_bound_is_not_truncated():
    ci = confidence_intervals(_result_with({"a": 1.0}), 0.05)["a"]
    assert ci["wald"][0] < 0 < ci["log_scale"][0]


def test_zero_standard_error_gives_point_interval():
    ci = confidence_intervals(_result_with({"a": 0.0}), 0.1)["a"]
    assert ci["wald"] == [0.5, 0.5] and ci["log_scale"] == [0.5, 0.5]


def test_intervals_need_standard_errors():
    with pytest.raises(DomainError):
        confidence_intervals(_result_with(None))
    with pytest.raises(DomainError):
        confidence_intervals(_result_with({"a": 0.1}), 1.5)


def test_fit_interval_half_width_matches_standard_error(aarset_fits):
    r = aarset_fits["blfr"]
    z = stats.norm.isf(0.025)
    for name in PARAMS:
        lo, hi = r.conf_intervals[name]["wald"]
        assert (hi - lo) / 2 == pytest.approx(z * r.std_errors[name], rel=1e-12)


def test_fit_result_serializes(aarset_fits, validate_schema):
    d = aarset_fits["blfr"].to_dict(include_starts=True)
    validate_schema("fit_result.json", d)
    assert d["family"] == "BLFR" and d["converged"] is True
