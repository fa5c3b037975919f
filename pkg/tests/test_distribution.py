import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as sci_integrate
from scipy import special as sp

from blfr import (
    BLFR,
    EXP,
    FAMILIES,
    GE,
    GLFR,
    GR,
    LFR,
    RAYLEIGH,
    BlfrParams,
    DomainError,
    Family,
    HazardShape,
    aarset,
    blfr_cdf,
    blfr_hazard,
    blfr_logpdf,
    blfr_mode,
    blfr_pdf,
    blfr_quantile,
    blfr_sf,
    classify_hazard_shape,
    lfr_cdf,
    lfr_quantile,
)
from blfr.distribution import empirical_hazard_shape
from blfr.special import log_beta

SHOWCASE = BlfrParams(0.2, 0.1, 2.0, 0.3)
PARAM_SETS = [
    SHOWCASE,
    BlfrParams(1.0, 0.0, 1.0, 1.0),
    BlfrParams(0.0, 1.0, 1.0, 1.0),
    BlfrParams(1.0, 1.0, 0.5, 0.5),
    BlfrParams(3.0, 1.0, 0.5, 2.0),
    BlfrParams(1.0, 3.0, 3.0, 0.3),
    BlfrParams(0.0172, 0.0035, 0.3347, 0.1243),
]

# a rate is either absent or large enough to move the hazard in double precision
rate = st.one_of(st.just(0.0), st.floats(1e-3, 5))
rates = st.tuples(rate, rate).filter(lambda ab: ab[0] + ab[1] > 0.05)
shapes = st.floats(0.2, 6)
params_st = st.builds(lambda ab, al, be: BlfrParams(ab[0], ab[1], al, be), rates, shapes, shapes)


def test_params_validation():
    with pytest.raises(DomainError):
        BlfrParams(0.0, 0.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        BlfrParams(-1.0, 1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        BlfrParams(1.0, 1.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        BlfrParams(1.0, 1.0, 1.0, math.inf)


def test_family_pins():
    assert dict(GLFR.fixed) == {"beta": 1.0}
    assert dict(GE.fixed) == {"b": 0.0, "beta": 1.0}
    assert dict(GR.fixed) == {"a": 0.0, "beta": 1.0}
    assert dict(LFR.fixed) == {"alpha": 1.0, "beta": 1.0}
    assert dict(RAYLEIGH.fixed) == {"a": 0.0, "alpha": 1.0, "beta": 1.0}
    assert dict(EXP.fixed) == {"b": 0.0, "alpha": 1.0, "beta": 1.0}
    for fam in FAMILIES.values():
        assert set(fam.free_params) | set(fam.fixed) == {"a", "b", "alpha", "beta"}
        assert not set(fam.free_params) & set(fam.fixed)
    assert Family.get("exponential") is EXP
    with pytest.raises(DomainError):
        Family.get("weibull")


def test_nesting():
    assert EXP.is_nested_in(GE) and GE.is_nested_in(GLFR) and GLFR.is_nested_in(BLFR)
    assert RAYLEIGH.is_nested_in(GR) and LFR.is_nested_in(GLFR)
    assert not BLFR.is_nested_in(GE)


def test_lfr_cdf_examples():
    assert lfr_cdf(0.0, 0.2, 0.1) == 0.0
    assert lfr_cdf(math.log(2), 1.0, 0.0) == pytest.approx(0.5, rel=1e-15)
    assert lfr_cdf(2.0, 0.2, 0.1) == pytest.approx(-math.expm1(-0.6), rel=1e-15)
    quad, _ = sci_integrate.quad(lambda x: (0.2 + 0.1 * x) * math.exp(-0.2 * x - 0.05 * x * x), 0, 2)
    assert lfr_cdf(2.0, 0.2, 0.1) == pytest.approx(quad, rel=1e-12)
    with pytest.raises(DomainError):
        lfr_cdf(-1.0, 1.0, 1.0)


def test_lfr_cdf_accurate_near_zero():
    assert lfr_cdf(1e-12, 1.0, 0.0) == pytest.approx(1e-12, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(rates, st.floats(1e-12, 1 - 1e-12))
def test_lfr_quantile_inverts_cdf(ab, y):
    x = lfr_quantile(y, *ab)
    assert lfr_cdf(x, *ab) == pytest.approx(y, rel=1e-10)


@pytest.mark.parametrize("params", PARAM_SETS)
def test_cdf_matches_reference_incomplete_beta(params):
    x = np.asarray(blfr_quantile(np.linspace(0.01, 0.99, 30), params))
    # reflected form keeps 1 - G = e^t exact when G rounds toward 1
    comp = np.exp(-params.a * x - 0.5 * params.b * x * x)
    np.testing.assert_allclose(blfr_cdf(x, params), sp.betaincc(params.beta, params.alpha, comp), atol=1e-12)


def test_cdf_basic_cases():
    p = BlfrParams(0.4, 0.3, 1.0, 1.0)
    x = np.linspace(0, 10, 50)
    np.testing.assert_allclose(blfr_cdf(x, p), lfr_cdf(x, 0.4, 0.3), atol=1e-15)
    assert blfr_cdf(0.0, SHOWCASE) == 0.0
    with pytest.raises(DomainError):
        blfr_cdf(-0.5, SHOWCASE)


@pytest.mark.parametrize("params", PARAM_SETS)
def test_cdf_equals_integral_of_pdf(params):
    for x in np.asarray(blfr_quantile(np.array([0.05, 0.3, 0.6, 0.9]), params)):
        lo = 0.0
        quad, _ = sci_integrate.quad(lambda v: float(blfr_pdf(v, params)), lo, float(x), limit=200, epsabs=1e-13, epsrel=1e-12)
        assert float(blfr_cdf(x, params)) == pytest.approx(quad, abs=1e-8)


@pytest.mark.parametrize("params", PARAM_SETS)
def test_normalization_with_tail(params):
    x_hi = float(blfr_quantile(0.5, params))
    quad, _ = sci_integrate.quad(lambda v: float(blfr_pdf(v, params)), 0.0, x_hi, limit=200, epsabs=1e-13)
    assert quad + float(blfr_sf(x_hi, params)) == pytest.approx(1.0, abs=1e-7)


@pytest.mark.parametrize("params", PARAM_SETS)
def test_cdf_monotone_on_dense_grid(params):
    hi = float(blfr_quantile(0.9999, params))
    v = np.asarray(blfr_cdf(np.linspace(0, hi, 2000), params))
    assert np.all(np.diff(v) >= 0)


def test_pdf_limits_at_origin():
    p = BlfrParams(0.7, 0.2, 1.0, 2.5)
    assert blfr_pdf(0.0, p) == pytest.approx(0.7 * 2.5, rel=1e-14)
    assert blfr_pdf(0.0, BlfrParams(0.7, 0.2, 2.0, 2.5)) == 0.0
    assert blfr_pdf(0.0, BlfrParams(0.7, 0.2, 0.5, 2.5)) == math.inf
    assert blfr_pdf(1e4, SHOWCASE) == 0.0


def test_logpdf_examples():
    assert blfr_logpdf(1.0, BlfrParams(1.0, 0.0, 1.0, 1.0)) == pytest.approx(-1.0, abs=1e-15)
    printed = BlfrParams(0.0172, 0.0348, 0.3347, 0.1243)
    ll = float(np.sum(blfr_logpdf(np.asarray(aarset().observations), printed)))
    # the published column has b = 0.0348 where the refit gives 0.00348; only the latter reaches 460.8
    refit = BlfrParams(0.0172, 0.00348, 0.3347, 0.1243)
    ll_refit = float(np.sum(blfr_logpdf(np.asarray(aarset().observations), refit)))
    assert -2 * ll_refit == pytest.approx(460.8, abs=0.5)
    assert ll < ll_refit


@settings(max_examples=100, deadline=None)
@given(params_st, st.floats(1e-3, 20))
def test_exp_logpdf_is_pdf(params, x):
    f = float(blfr_pdf(x, params))
    lf = float(blfr_logpdf(x, params))
    if f > 0 and math.isfinite(f):
        assert math.exp(lf) == pytest.approx(f, rel=1e-12)


def test_logpdf_reference_formula():
    p = BlfrParams(0.3, 0.8, 2.2, 0.7)
    x = np.linspace(0.01, 3, 40)
    t = -p.a * x - 0.5 * p.b * x * x
    ref = np.log(p.a + p.b * x) - log_beta(p.alpha, p.beta) + (p.alpha - 1) * np.log(-np.expm1(t)) + p.beta * t
    np.testing.assert_allclose(blfr_logpdf(x, p), ref, rtol=1e-13)


def test_logpdf_far_tail_stays_finite():
    p = BlfrParams(1.0, 0.0, 0.5, 2.0)
    assert blfr_logpdf(500.0, p) == pytest.approx(math.log(1.0) - log_beta(0.5, 2.0) - 1000.0, rel=1e-14)


@pytest.mark.parametrize(
    "family,pdf",
    [
        (EXP, lambda x: 0.7 * np.exp(-0.7 * x)),
        (RAYLEIGH, lambda x: 0.7 * x * np.exp(-0.35 * x * x)),
        (GE, lambda x: 2.5 * 0.7 * np.exp(-0.7 * x) * (1 - np.exp(-0.7 * x)) ** 1.5),
    ],
)
def test_sub_model_closed_forms(family, pdf):
    values = {"a": 0.7, "b": 0.7, "alpha": 2.5}
    params = family.make_params({k: values[k] for k in family.free_params})
    x = np.linspace(0.01, 8, 60)
    np.testing.assert_allclose(blfr_pdf(x, params), pdf(x), rtol=1e-12)


@settings(max_examples=60, deadline=None)
@given(params_st, st.floats(0.001, 0.999))
def test_transformation_to_beta(params, p):
    x = blfr_quantile(p, params)
    y = float(lfr_cdf(x, params.a, params.b))
    assert sp.betainc(params.alpha, params.beta, y) == pytest.approx(p, abs=1e-9)


def test_hazard_alpha_one_is_scaled_linear():
    p = BlfrParams(0.4, 1.3, 1.0, 2.7)
    x = np.linspace(0, 5, 50)
    np.testing.assert_allclose(blfr_hazard(x, p), 2.7 * (0.4 + 1.3 * x), rtol=1e-11)


def test_hazard_constant_for_exponential():
    p = BlfrParams(0.9, 0.0, 1.0, 1.0)
    np.testing.assert_allclose(blfr_hazard(np.linspace(0, 30, 40), p), 0.9, rtol=1e-12)


@pytest.mark.parametrize("params", PARAM_SETS)
def test_hazard_matches_direct_ratio(params):
    x = np.asarray(blfr_quantile(np.linspace(0.05, 0.95, 19), params))
    comp = np.exp(-params.a * x - 0.5 * params.b * x * x)
    pdf = np.asarray(blfr_pdf(x, params))
    # B(alpha, beta) - B_G(alpha, beta), with the difference taken on the reflected side
    denom = sp.beta(params.alpha, params.beta) * sp.betainc(params.beta, params.alpha, comp)
    np.testing.assert_allclose(blfr_hazard(x, params), pdf * sp.beta(params.alpha, params.beta) / denom, rtol=1e-10)
    np.testing.assert_allclose(blfr_hazard(x, params), pdf / np.asarray(blfr_sf(x, params)), rtol=1e-14)


def test_sf_keeps_precision_in_tail():
    p = BlfrParams(1.0, 0.0, 1.0, 1.0)
    assert blfr_sf(40.0, p) == pytest.approx(math.exp(-40.0), rel=1e-12)
    assert blfr_hazard(40.0, p) == pytest.approx(1.0, rel=1e-10)


def test_quantile_examples():
    assert blfr_quantile(0.5, BlfrParams(1.0, 0.0, 1.0, 1.0)) == pytest.approx(math.log(2), rel=1e-14)
    assert blfr_quantile(-math.expm1(-1.0), BlfrParams(0.0, 2.0, 1.0, 1.0)) == pytest.approx(1.0, rel=1e-13)
    for bad in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(DomainError):
            blfr_quantile(bad, SHOWCASE)


@settings(max_examples=100, deadline=None)
@given(params_st, st.floats(1e-6, 1 - 1e-6))
def test_quantile_round_trip(params, p):
    assert float(blfr_cdf(blfr_quantile(p, params), params)) == pytest.approx(p, abs=1e-9)


def test_mode_examples():
    m = blfr_mode(BlfrParams(0.0, 1.0, 1.0, 1.0))
    assert m.kind == "interior" and m.location == pytest.approx(1.0, rel=1e-14)
    assert blfr_mode(BlfrParams(2.0, 1.0, 1.0, 1.0)).kind == "boundary-zero"
    assert blfr_mode(BlfrParams(1.0, 1.0, 0.5, 1.0)).kind == "diverges-at-zero"


@pytest.mark.parametrize("params", [SHOWCASE, BlfrParams(1.0, 1.0, 3.0, 2.0), BlfrParams(0.5, 0.0, 4.0, 0.4)])
def test_interior_mode_is_stationary(params):
    m = blfr_mode(params)
    assert m.kind == "interior"
    h = 1e-6 * max(1.0, m.location)
    d = (float(blfr_logpdf(m.location + h, params)) - float(blfr_logpdf(m.location - h, params))) / (2 * h)
    assert abs(d) < 1e-6


def test_hazard_shape_examples():
    assert classify_hazard_shape(BlfrParams(1, 1, 2, 0.5)) is HazardShape.INCREASING
    assert classify_hazard_shape(BlfrParams(1, 0, 1, 3)) is HazardShape.CONSTANT
    assert classify_hazard_shape(BlfrParams(1, 1, 0.3, 1)) is HazardShape.BATHTUB
    assert classify_hazard_shape(BlfrParams(1, 0, 0.4, 3)) is HazardShape.DECREASING
    assert classify_hazard_shape(BlfrParams(1, 0, 2.4, 3)) is HazardShape.INCREASING


def test_hazard_shape_gap_without_linear_term():
    # with a = 0 and 1/2 <= alpha < 1 the hazard starts at zero and only increases
    p = BlfrParams(0.0, 1.0, 0.8, 1.0)
    assert classify_hazard_shape(p) is HazardShape.UNCLASSIFIED
    assert empirical_hazard_shape(p) is HazardShape.INCREASING


@settings(max_examples=60, deadline=None)
@given(params_st)
def test_analytic_and_empirical_shapes_agree(params):
    label = classify_hazard_shape(params)
    if label is HazardShape.UNCLASSIFIED:
        return
    assert empirical_hazard_shape(params) is label
