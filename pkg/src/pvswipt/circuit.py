"""Photovoltaic receiver circuit: parameters, photocurrent, exact DC solves.

The receiver is a photocurrent source feeding two junction diodes (ideality
1 and 2) and a shunt resistor, followed by a series resistor and the load.
In steady state the inductor is a short and the capacitor an open, so the
load seen by the cell is ``RL + Rs``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from enum import Enum

from ._numerics import golden_section_max

EXP_CLAMP = 700.0


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class PhysicalConstants:
    q0: float = 1.602176634e-19  # C
    eta: float = 6.62607015e-34  # J s
    cl: float = 2.99792458e8  # m/s


CODATA = PhysicalConstants()


@dataclass(frozen=True)
class CircuitParams:
    """Receiver circuit constants in SI units. Defaults reproduce the
    reference receiver (1 nA diodes, 10 kOhm load, 25 ms info-path time
    constant)."""

    Is1: float = 1e-9
    Is2: float = 1e-9
    VT: float = 25.85e-3
    Rs: float = 100.0
    Rsh: float = 100e6
    RL: float = 10e3
    Rd: float = 10e3
    Cd: float = 2.5e-6
    L: float = 10e-3

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"CircuitParams.{f.name} must be positive and finite, got {value!r}")

    @property
    def r_sigma(self) -> float:
        return self.RL + self.Rs

    @property
    def tau_eh(self) -> float:
        return self.L / self.RL

    @property
    def tau_id(self) -> float:
        return self.Rd * self.Cd


@dataclass(frozen=True)
class OpticalDrive:
    lambda0: float = 950e-9
    h: float = 1.0
    p: float = 0.0
    pa: float = 0.0
    quantum_efficiency: float = 0.7

    def __post_init__(self):
        if not self.lambda0 > 0:
            raise ValueError("lambda0 must be positive")
        if not 0 < self.h <= 1:
            raise ValueError("channel gain h must lie in (0, 1]")
        if self.p < 0 or self.pa < 0:
            raise ValueError("optical power and ambient current must be nonnegative")
        if not 0 <= self.quantum_efficiency <= 1:
            raise ValueError("quantum_efficiency must lie in [0, 1]")

    @property
    def responsivity(self) -> float:
        return spectral_response(self.lambda0, self.quantum_efficiency)


class DiodeTopology(Enum):
    TWO_DIODE = "two_diode"
    SINGLE_IDEALITY1 = "single_ideality1"


@dataclass(frozen=True)
class DiodeModelKind:
    topology: DiodeTopology = DiodeTopology.TWO_DIODE
    include_shunt: bool = True


TWO_DIODE = DiodeModelKind()
SINGLE_DIODE = DiodeModelKind(DiodeTopology.SINGLE_IDEALITY1, include_shunt=False)


@dataclass(frozen=True)
class DcOperatingPoint:
    v_in: float
    i_eh: float
    i_d1: float
    i_d2: float
    i_sh: float
    p_harv: float
    kcl_residual: float


def spectral_response(lambda0: float, qe: float = 0.7, consts: PhysicalConstants = CODATA) -> float:
    """Responsivity r(lambda) = lambda * qe * q0 / (eta * cl) in A/W."""
    if not lambda0 > 0:
        raise ValueError("wavelength must be positive")
    return lambda0 * qe * consts.q0 / (consts.eta * consts.cl)


def induced_current(drive: OpticalDrive, r0: float | None = None) -> float:
    """Photocurrent j = r0 * p + pa; receiver noise is not part of it."""
    if r0 is None:
        r0 = drive.responsivity
    return r0 * drive.p + drive.pa


def _check_exponent(x: float) -> float:
    if x > EXP_CLAMP:
        raise OverflowError(f"diode exponent {x:.1f} exceeds {EXP_CLAMP}: non-physical node voltage")
    return x


def diode_currents(v: float, params: CircuitParams, kind: DiodeModelKind = TWO_DIODE) -> tuple[float, float, float]:
    """(i_d1, i_d2, i_sh) at junction voltage v."""
    i1 = params.Is1 * math.expm1(_check_exponent(v / params.VT))
    if kind.topology is DiodeTopology.TWO_DIODE:
        i2 = params.Is2 * math.expm1(0.5 * v / params.VT)
    else:
        i2 = 0.0
    ish = v / params.Rsh if kind.include_shunt else 0.0
    return i1, i2, ish


def _diode_conductance(v: float, params: CircuitParams, kind: DiodeModelKind) -> float:
    g = params.Is1 / params.VT * math.exp(_check_exponent(v / params.VT))
    if kind.topology is DiodeTopology.TWO_DIODE:
        g += 0.5 * params.Is2 / params.VT * math.exp(0.5 * v / params.VT)
    if kind.include_shunt:
        g += 1.0 / params.Rsh
    return g


def cell_current(v: float, j: float, params: CircuitParams, kind: DiodeModelKind = TWO_DIODE) -> float:
    """Current leaving the cell terminals at junction voltage v."""
    i1, i2, ish = diode_currents(v, params, kind)
    return j - i1 - i2 - ish


def voltage_bracket(j: float, params: CircuitParams, kind: DiodeModelKind = TWO_DIODE) -> float:
    """Upper voltage at which the diode current alone exceeds j."""
    if kind.topology is DiodeTopology.TWO_DIODE:
        is_min = min(params.Is1, params.Is2)
    else:
        is_min = params.Is1
    return 2.0 * params.VT * math.log(j / is_min + 2.0) + 0.1


def solve_dc_operating_point(
    j: float,
    params: CircuitParams,
    kind: DiodeModelKind = TWO_DIODE,
    max_iter: int = 200,
) -> DcOperatingPoint:
    """Exact steady state of the cell driving the resistive load RL + Rs.

    Safeguarded Newton on the strictly decreasing residual
    ``cell_current(v) - v / R_sigma`` inside the bracket [0, v_max].
    """
    if j < 0:
        raise ValueError("photocurrent must be nonnegative")
    rsig = params.r_sigma

    def residual(v: float) -> float:
        return cell_current(v, j, params, kind) - v / rsig

    tol = 1e-15 + 1e-12 * j
    lo, hi = 0.0, voltage_bracket(j, params, kind)
    f_hi = residual(hi)
    if not f_hi < 0:
        raise SolverError(f"invalid bracket at j={j!r}: residual {f_hi!r} at v_max={hi!r}")

    v = 0.0
    f = residual(v)
    # keep polishing past `tol` until the Newton step hits float resolution
    for _ in range(max_iter):
        if f == 0.0:
            break
        if f > 0:
            lo = v
        else:
            hi = v
        slope = -(_diode_conductance(v, params, kind) + 1.0 / rsig)
        step = -f / slope
        v_new = v + step
        if not lo < v_new < hi:
            v_new = 0.5 * (lo + hi)
        elif abs(f) <= tol and abs(step) <= 4.0 * math.ulp(v):
            break
        if v_new == v or hi - lo <= 4.0 * math.ulp(hi):
            break
        v = v_new
        f = residual(v)
    else:
        raise SolverError(f"DC solve did not converge for j={j!r} (residual {f!r})")
    if abs(f) > tol:
        raise SolverError(f"DC solve stalled for j={j!r} (residual {f!r} > {tol!r})")

    i1, i2, ish = diode_currents(v, params, kind)
    i_eh = v / rsig
    return DcOperatingPoint(
        v_in=v,
        i_eh=i_eh,
        i_d1=i1,
        i_d2=i2,
        i_sh=ish,
        p_harv=i_eh * i_eh * params.RL,
        kcl_residual=f,
    )


def mpp_point(j: float, params: CircuitParams, kind: DiodeModelKind = TWO_DIODE) -> tuple[float, float]:
    """(v_mpp, P_mpp) of the cell terminals, by golden-section search."""
    if j < 0:
        raise ValueError("photocurrent must be nonnegative")
    if j == 0:
        return 0.0, 0.0
    v_max = voltage_bracket(j, params, kind)
    v, p = golden_section_max(lambda v: v * cell_current(v, j, params, kind), 0.0, v_max, rtol=1e-10)
    return v, p


def mpp_power(j: float, params: CircuitParams, kind: DiodeModelKind = TWO_DIODE) -> float:
    return mpp_point(j, params, kind)[1]
