import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq, minimize_scalar

from pvswipt.circuit import (
    SINGLE_DIODE,
    TWO_DIODE,
    CircuitParams,
    OpticalDrive,
    cell_current,
    diode_currents,
    induced_current,
    mpp_point,
    solve_dc_operating_point,
    spectral_response,
    voltage_bracket,
)


def brentq_dc(j, p, kind=TWO_DIODE):
    f = lambda v: cell_current(v, j, p, kind) - v / p.r_sigma
    v = brentq(f, 0.0, voltage_bracket(j, p, kind), xtol=1e-16, rtol=1e-15, maxiter=500)
    return v, v / p.r_sigma


def test_responsivity_values():
    assert spectral_response(950e-9) == pytest.approx(0.53635867, rel=1e-8)
    assert spectral_response(400e-9) == pytest.approx(0.22583523, rel=1e-8)
    assert spectral_response(950e-9, qe=1.0) == pytest.approx(
        950e-9 * 1.602176634e-19 / (6.62607015e-34 * 2.99792458e8), rel=1e-15
    )
    with pytest.raises(ValueError):
        spectral_response(0.0)


def test_induced_current():
    d = OpticalDrive(p=1e-3, pa=2e-6)
    assert induced_current(d) == pytest.approx(d.responsivity * 1e-3 + 2e-6, rel=1e-15)
    assert induced_current(d, r0=1.0) == pytest.approx(1e-3 + 2e-6)


@pytest.mark.parametrize("field", ["Is1", "Is2", "VT", "Rs", "Rsh", "RL", "Rd", "Cd", "L"])
def test_params_reject_nonpositive(field):
    with pytest.raises(ValueError):
        CircuitParams(**{field: 0.0})
    with pytest.raises(ValueError):
        CircuitParams(**{field: -1.0})


def test_param_properties(params):
    assert params.r_sigma == 10100.0
    assert params.tau_eh == pytest.approx(1e-6)
    assert params.tau_id == pytest.approx(25e-3)


def test_drive_validation():
    for bad in (dict(lambda0=0), dict(h=0), dict(h=1.5), dict(p=-1), dict(pa=-1), dict(quantum_efficiency=2)):
        with pytest.raises(ValueError):
            OpticalDrive(**bad)


def test_diode_currents_zero_bias(params):
    assert diode_currents(0.0, params) == (0.0, 0.0, 0.0)
    assert cell_current(0.0, 1e-3, params) == 1e-3
    with pytest.raises(OverflowError):
        diode_currents(30.0, params)


def test_cell_current_at_high_bias(params):
    # at 0.409 V the diodes sink far more than 5.362 mA; frozen value
    assert cell_current(0.409, 5.362e-3, params) == pytest.approx(-2.078e-3, rel=1e-3)


@settings(max_examples=150, deadline=None)
@given(st.floats(min_value=1e-12, max_value=0.1))
def test_dc_solve_matches_brentq(j):
    p = CircuitParams()
    for kind in (TWO_DIODE, SINGLE_DIODE):
        op = solve_dc_operating_point(j, p, kind)
        v_ref, i_ref = brentq_dc(j, p, kind)
        assert op.v_in == pytest.approx(v_ref, rel=1e-12, abs=1e-18)
        assert op.i_eh == pytest.approx(i_ref, rel=1e-12, abs=1e-22)
        assert abs(op.kcl_residual) <= 1e-15 + 1e-12 * j


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=1e-9, max_value=0.1))
def test_dc_kcl_balance(j):
    p = CircuitParams()
    op = solve_dc_operating_point(j, p)
    assert j - op.i_d1 - op.i_d2 - op.i_sh - op.i_eh == pytest.approx(0.0, abs=1e-15 + 1e-12 * j)
    assert op.p_harv == pytest.approx(p.RL * op.i_eh**2, rel=1e-15)


def test_dc_anchor(params, r950):
    op = solve_dc_operating_point(r950 * 10e-3, params)
    assert op.i_eh == pytest.approx(3.9638e-5, rel=1e-4)
    assert op.v_in == pytest.approx(0.40035, rel=1e-4)


def test_dc_zero_and_negative(params):
    op = solve_dc_operating_point(0.0, params)
    assert op.v_in == 0.0 and op.p_harv == 0.0
    with pytest.raises(ValueError):
        solve_dc_operating_point(-1e-9, params)


def test_dc_monotone_in_j(params):
    js = np.logspace(-10, -1, 40)
    i = [solve_dc_operating_point(j, params).i_eh for j in js]
    assert np.all(np.diff(i) > 0)


@pytest.mark.parametrize("j", [1e-7, 1e-5, 5.36e-3, 0.05])
def test_mpp_matches_scipy(params, j):
    v, pmax = mpp_point(j, params)
    ref = minimize_scalar(
        lambda x: -x * cell_current(x, j, params), bounds=(0.0, voltage_bracket(j, params)),
        method="bounded", options={"xatol": 1e-12},
    )
    assert pmax == pytest.approx(-ref.fun, rel=1e-9)
    assert v == pytest.approx(ref.x, rel=1e-5)
    # the load operating point never beats the MPP
    assert params.RL / params.r_sigma * solve_dc_operating_point(j, params).p_harv <= pmax


def test_mpp_anchor(params, r950):
    v, pmax = mpp_point(r950 * 10e-3, params)
    assert v == pytest.approx(0.33256, rel=1e-4)
    assert pmax == pytest.approx(1.65496e-3, rel=1e-5)
    assert mpp_point(0.0, params) == (0.0, 0.0)


def test_shunt_matters_only_at_low_drive(params):
    no_shunt = replace(params, Rsh=1e30)
    j = 1e-3
    a = solve_dc_operating_point(j, params).i_eh
    b = solve_dc_operating_point(j, no_shunt).i_eh
    assert a == pytest.approx(b, rel=1e-6)
