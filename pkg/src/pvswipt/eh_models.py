"""Closed-form harvested-power model and the two reference baselines.

With identical diode saturation currents, the two-diode junction relation is
approximated by a single ideality-1 law, which together with the resistive
load gives the output current in terms of W0:

    i_EH = j + Is - (VT / R) * W0(Is * R / VT * exp(R / VT * (j + Is)))

where R = RL + Rs. The W0 argument is handled in log space throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ._numerics import adaptive_simpson, golden_section_min
from .circuit import (
    SINGLE_DIODE,
    TWO_DIODE,
    CircuitParams,
    DiodeModelKind,
    mpp_power,
    solve_dc_operating_point,
)
from .lambert import lambert_w0_of_exp

DEFAULT_FIT_RANGE = (0.0, 0.5)


@dataclass(frozen=True)
class EhModelParams:
    circuit: CircuitParams = field(default_factory=CircuitParams)
    Is_eff: float | None = None

    def __post_init__(self):
        if self.Is_eff is None:
            c = self.circuit
            if c.Is1 == c.Is2:
                value = c.Is1
            else:
                value = fit_equivalent_saturation_current(c.Is1, c.Is2, DEFAULT_FIT_RANGE, c.VT)
            object.__setattr__(self, "Is_eff", value)
        if not self.Is_eff > 0:
            raise ValueError("Is_eff must be positive")


@dataclass(frozen=True)
class BaselineCalibration:
    kappa: float
    p_ref: float = 10e-3

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")


def input_voltage_approx(j: float, i_eh: float, Is_eff: float, VT: float) -> float:
    """Junction voltage VT * ln((j - i_eh) / Is + 1) of the one-exponential law."""
    if j < i_eh:
        raise ValueError(f"load current {i_eh!r} exceeds photocurrent {j!r}")
    return VT * math.log1p((j - i_eh) / Is_eff)


def _lambert_term(j, model: EhModelParams):
    c = model.circuit
    Is = model.Is_eff
    k = c.r_sigma / c.VT
    y = math.log(Is * k) + k * (np.asarray(j, dtype=float) + Is)
    return lambert_w0_of_exp(y)


def eh_current_closed_form(j, model: EhModelParams):
    """Load current for photocurrent j (scalar or array)."""
    c = model.circuit
    w = _lambert_term(j, model)
    i = np.asarray(j, dtype=float) + model.Is_eff - c.VT / c.r_sigma * w
    return i if np.ndim(i) else float(i)


def eh_current_derivative(j, model: EhModelParams):
    """d i_EH / d j = 1 / (1 + W0(z))."""
    return 1.0 / (1.0 + _lambert_term(j, model))


def harvested_power_closed_form(p, pa, model: EhModelParams, r0: float):
    """P_harv(p, pa) = RL * i_EH(r0 * p + pa)**2."""
    i = eh_current_closed_form(r0 * np.asarray(p, dtype=float) + pa, model)
    out = model.circuit.RL * np.square(i)
    return out if np.ndim(out) else float(out)


def harvested_power_derivative(p, pa, model: EhModelParams, r0: float):
    """dP_harv/dp, by the chain rule through the W0 derivative identity."""
    j = r0 * np.asarray(p, dtype=float) + pa
    i = eh_current_closed_form(j, model)
    out = 2.0 * model.circuit.RL * i * eh_current_derivative(j, model) * r0
    return out if np.ndim(out) else float(out)


def _fit_objective(Is: float, Is1: float, Is2: float, v_range: tuple[float, float], VT: float) -> float:
    a, b = v_range

    def integrand(v: float) -> float:
        e1 = math.exp(v / VT)
        e2 = math.exp(0.5 * v / VT)
        return abs(Is1 * e1 + Is2 * e2 - Is * (e1 + e2))

    # the integrand has a single kink where (Is1 - Is) e^{v/VT} = (Is - Is2) e^{v/2VT}
    cuts = [a, b]
    if Is != Is1:
        ratio = (Is - Is2) / (Is1 - Is)
        if ratio > 0:
            v_kink = 2.0 * VT * math.log(ratio)
            if a < v_kink < b:
                cuts.insert(1, v_kink)
    return sum(adaptive_simpson(integrand, lo, hi, atol=1e-15) for lo, hi in zip(cuts, cuts[1:]))


def fit_equivalent_saturation_current(
    Is1: float,
    Is2: float,
    v_range: tuple[float, float] = DEFAULT_FIT_RANGE,
    VT: float = 25.85e-3,
    rtol: float = 1e-3,
) -> float:
    """Single saturation current that best matches both diodes over v_range.

    Minimises the integrated absolute mismatch between the two-diode current
    and Is * (e^{v/VT} + e^{v/2VT}); the objective is convex in Is, so a
    golden-section search on [min(Is1, Is2), max(Is1, Is2)] is enough.
    """
    if not (Is1 > 0 and Is2 > 0):
        raise ValueError("saturation currents must be positive")
    a, b = v_range
    if not 0.0 <= a < b <= 1.0:
        raise ValueError("v_range must be an interval inside [0, 1] V")
    if Is1 == Is2:
        return Is1
    lo, hi = min(Is1, Is2), max(Is1, Is2)
    # search in log(Is): the bracket spans decades
    x, _ = golden_section_min(
        lambda t: _fit_objective(math.exp(t), Is1, Is2, (a, b), VT),
        math.log(lo),
        math.log(hi),
        rtol=0.0,
        atol=rtol,
    )
    return math.exp(x)


def calibrate_baseline_mpp(
    model: EhModelParams,
    r0: float,
    p_ref: float = 10e-3,
    kind: DiodeModelKind = TWO_DIODE,
) -> BaselineCalibration:
    """Scale the exact MPP power so it equals the closed form at p_ref."""
    target = harvested_power_closed_form(p_ref, 0.0, model, r0)
    return BaselineCalibration(kappa=target / mpp_power(r0 * p_ref, model.circuit, kind), p_ref=p_ref)


def baseline_mpp(
    p: float,
    pa: float,
    params: CircuitParams,
    cal: BaselineCalibration,
    r0: float,
    kind: DiodeModelKind = TWO_DIODE,
) -> float:
    """Baseline 1: maximum-power-point tracking receiver, scaled by kappa."""
    return cal.kappa * mpp_power(r0 * p + pa, params, kind)


def baseline_single_diode(
    p: float,
    pa: float,
    params: CircuitParams,
    r0: float,
    Is: float | None = None,
) -> float:
    """Baseline 2: exact solve of a single ideality-1 diode without shunt.

    ``Is`` overrides the diode saturation current (defaults to ``params.Is1``).
    """
    if Is is not None:
        params = replace(params, Is1=Is)
    return solve_dc_operating_point(r0 * p + pa, params, SINGLE_DIODE).p_harv
