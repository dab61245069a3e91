import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, optimize
from scipy.special import lambertw

from pvswipt.circuit import SINGLE_DIODE, CircuitParams, mpp_power, solve_dc_operating_point
from pvswipt.eh_models import (
    BaselineCalibration,
    EhModelParams,
    baseline_mpp,
    baseline_single_diode,
    calibrate_baseline_mpp,
    eh_current_closed_form,
    eh_current_derivative,
    fit_equivalent_saturation_current,
    harvested_power_closed_form,
    harvested_power_derivative,
    input_voltage_approx,
)


def single_diode_bisection(j, Is, VT, Rsig):
    # j = i + Is (exp(i Rsig / VT) - 1), solved for the load current i
    # the diode term alone caps i at VT/Rsig * ln(j/Is + 1)
    hi = min(j, VT / Rsig * math.log1p(j / Is))
    return optimize.brentq(
        lambda i: j - i - Is * math.expm1(i * Rsig / VT), 0.0, hi, xtol=1e-300, rtol=1e-15, maxiter=1000
    )


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=0.0, max_value=0.2))
def test_closed_form_solves_single_diode_equation(j):
    m = EhModelParams()
    c = m.circuit
    i = eh_current_closed_form(j, m)
    ref = single_diode_bisection(j, m.Is_eff, c.VT, c.r_sigma) if j > 0 else 0.0
    assert i == pytest.approx(ref, rel=1e-11, abs=1e-24)


@pytest.mark.parametrize("j", [1e-9, 1e-6, 1e-4])
def test_closed_form_matches_scipy_lambert(model, j):
    c = model.circuit
    Is = model.Is_eff
    z = Is * c.r_sigma / c.VT * math.exp(c.r_sigma / c.VT * (j + Is))
    ref = j + Is - c.VT / c.r_sigma * lambertw(z).real
    assert eh_current_closed_form(j, model) == pytest.approx(ref, rel=1e-9)


def test_closed_form_array_and_zero(model):
    j = np.array([[0.0, 1e-6], [1e-3, 1e-1]])
    out = eh_current_closed_form(j, model)
    assert out.shape == (2, 2)
    assert out[0, 0] == pytest.approx(0.0, abs=1e-22)
    assert isinstance(eh_current_closed_form(1e-3, model), float)


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=1e-9, max_value=0.1))
def test_derivative_against_finite_difference(j):
    m = EhModelParams()
    h = 1e-5 * j
    fd = (eh_current_closed_form(j + h, m) - eh_current_closed_form(j - h, m)) / (2 * h)
    d = eh_current_derivative(j, m)
    assert 0 < d <= 1
    assert d == pytest.approx(fd, rel=1e-6)


@pytest.mark.parametrize("p", np.logspace(-6, -1, 20))
def test_power_derivative(model, r950, p):
    h = 1e-4 * p
    fd = (harvested_power_closed_form(p + h, 0.0, model, r950) - harvested_power_closed_form(p - h, 0.0, model, r950)) / (2 * h)
    assert harvested_power_derivative(p, 0.0, model, r950) == pytest.approx(fd, rel=1e-6)


def test_power_derivative_vanishes_at_origin(model, r950):
    # i_EH(0) = 0, so the slope of RL i^2 is zero there
    assert harvested_power_derivative(0.0, 0.0, model, r950) == 0.0
    assert harvested_power_derivative(1e-9, 0.0, model, r950) > 0.0


def test_anchor_values(model, r950):
    assert harvested_power_closed_form(1e-6, 0.0, model, r950) == pytest.approx(2.8743e-9, rel=1e-4)
    assert harvested_power_closed_form(10e-3, 0.0, model, r950) == pytest.approx(1.571280e-5, rel=1e-6)


def test_exactness_identity(model, r950):
    for p in np.logspace(-6, -1, 50):
        closed = harvested_power_closed_form(p, 0.0, model, r950)
        exact = solve_dc_operating_point(r950 * p, model.circuit, SINGLE_DIODE).p_harv
        assert closed == pytest.approx(exact, rel=1e-10)


def test_ambient_shift(model, r950):
    # pa enters only through j = r0 p + pa
    a = harvested_power_closed_form(1e-3, 1e-5, model, r950)
    b = harvested_power_closed_form(1e-3 + 1e-5 / r950, 0.0, model, r950)
    assert a == pytest.approx(b, rel=1e-12)


def test_input_voltage(model):
    c = model.circuit
    j = 5e-3
    i = eh_current_closed_form(j, model)
    v = input_voltage_approx(j, i, model.Is_eff, c.VT)
    # single-diode KCL with the output at v = i * R_sigma
    assert v == pytest.approx(i * c.r_sigma, rel=1e-9)
    with pytest.raises(ValueError):
        input_voltage_approx(1e-6, 2e-6, model.Is_eff, c.VT)


def fit_oracle(Is1, Is2, v_range, VT):
    a, b = v_range

    def cost(t):
        Is = math.exp(t)
        f = lambda v: abs(Is1 * math.exp(v / VT) + Is2 * math.exp(v / (2 * VT)) - Is * (math.exp(v / VT) + math.exp(v / (2 * VT))))
        return integrate.quad(f, a, b, limit=500, epsrel=1e-12)[0]

    res = optimize.minimize_scalar(cost, bounds=(math.log(min(Is1, Is2)), math.log(max(Is1, Is2))), method="bounded", options={"xatol": 1e-6})
    return math.exp(res.x)


def test_fit_matches_quad_oracle():
    got = fit_equivalent_saturation_current(1e-12, 1e-9, (0.0, 0.5))
    assert got == pytest.approx(fit_oracle(1e-12, 1e-9, (0.0, 0.5), 25.85e-3), rel=2e-3)
    assert got == pytest.approx(1.0891e-12, rel=2e-3)


def test_fit_equal_currents_and_validation():
    assert fit_equivalent_saturation_current(1e-9, 1e-9) == 1e-9
    with pytest.raises(ValueError):
        fit_equivalent_saturation_current(0.0, 1e-9)
    with pytest.raises(ValueError):
        fit_equivalent_saturation_current(1e-9, 1e-8, (0.5, 0.2))


@settings(max_examples=10, deadline=None)
@given(st.floats(min_value=1e-13, max_value=1e-7), st.floats(min_value=1e-13, max_value=1e-7))
def test_fit_bracketed_and_scale_equivariant(a, b):
    Is = fit_equivalent_saturation_current(a, b)
    assert min(a, b) * (1 - 1e-9) <= Is <= max(a, b) * (1 + 1e-9)
    scaled = fit_equivalent_saturation_current(10 * a, 10 * b)
    assert scaled == pytest.approx(10 * Is, rel=3e-3)


def test_model_fits_when_unequal():
    m = EhModelParams(CircuitParams(Is1=1e-12, Is2=1e-9))
    assert m.Is_eff == pytest.approx(1.0891e-12, rel=2e-3)
    with pytest.raises(ValueError):
        EhModelParams(Is_eff=-1.0)


def test_baseline_mpp_anchored(model, r950):
    cal = calibrate_baseline_mpp(model, r950)
    assert cal.kappa == pytest.approx(0.0094944, rel=1e-4)
    closed = harvested_power_closed_form(10e-3, 0.0, model, r950)
    assert baseline_mpp(10e-3, 0.0, model.circuit, cal, r950) == pytest.approx(closed, rel=1e-12)
    assert baseline_mpp(1e-3, 0.0, model.circuit, cal, r950) == pytest.approx(cal.kappa * mpp_power(r950 * 1e-3, model.circuit), rel=1e-15)
    with pytest.raises(ValueError):
        BaselineCalibration(kappa=0.0)


def test_baseline_single_diode(model, r950):
    closed = harvested_power_closed_form(1e-3, 0.0, model, r950)
    assert baseline_single_diode(1e-3, 0.0, model.circuit, r950) == pytest.approx(closed, rel=1e-10)
    # a larger saturation current lowers the harvested power
    assert baseline_single_diode(1e-3, 0.0, model.circuit, r950, Is=1e-8) < closed
