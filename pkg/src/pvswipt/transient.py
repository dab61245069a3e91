"""Transient simulation of the full receiver circuit.

Topology: photocurrent j(t) into node a, which carries both diodes and the
shunt; Rs joins node a to node b; from node b an L-RL branch (energy path)
and a Cd-Rd branch (information path) return to ground.

States are the inductor current i_L and the capacitor voltage v_C. Each step
eliminates them with the trapezoidal rule and solves the two nodal equations
for (v_a, v_b) by Newton's method.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circuit import (
    TWO_DIODE,
    CircuitParams,
    OpticalDrive,
    solve_dc_operating_point,
)

CSV_COLUMNS = ("t", "s", "v_a", "v_b", "i_out", "i_EH", "i_ID", "v_C", "i_L")

NEWTON_MAX_ITER = 50
MAX_HALVINGS = 20
# per-iteration cap on the junction-voltage update (junction limiting)
DV_LIMIT = 0.1
_EPS = float(np.finfo(float).eps)


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class SymbolFrame:
    symbols: Sequence[float]
    T: float
    A2: float

    def __post_init__(self):
        s = np.asarray(self.symbols, dtype=float)
        if s.ndim != 1 or len(s) == 0:
            raise ValueError("need a nonempty 1-D symbol sequence")
        if not self.T > 0:
            raise ValueError("symbol duration must be positive")
        if np.any(s < 0) or np.any(s > self.A2):
            raise ValueError(f"symbols must lie in [0, A2={self.A2!r}]")
        object.__setattr__(self, "symbols", tuple(float(v) for v in s))


@dataclass(frozen=True)
class SimState:
    i_L: float = 0.0
    v_C: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.i_L) and math.isfinite(self.v_C)):
            raise ValueError("state must be finite")


@dataclass
class Waveform:
    """Sampled transient record.

    Symbol edges appear twice: once with the outgoing symbol's drive and once
    with the incoming one, so the discontinuity in the algebraic variables is
    kept and trapezoidal integrals over the record are exact for the states.
    """

    t: np.ndarray
    s: np.ndarray
    j: np.ndarray
    v_a: np.ndarray
    v_b: np.ndarray
    i_L: np.ndarray
    v_C: np.ndarray
    params: CircuitParams = field(repr=False)
    symbol_index: np.ndarray = field(repr=False, default=None)

    @property
    def i_out(self) -> np.ndarray:
        return (self.v_a - self.v_b) / self.params.Rs

    @property
    def i_EH(self) -> np.ndarray:
        return self.i_L

    @property
    def i_ID(self) -> np.ndarray:
        return (self.v_b - self.v_C) / self.params.Rd

    def columns(self) -> dict[str, np.ndarray]:
        return {
            "t": self.t,
            "s": self.s,
            "v_a": self.v_a,
            "v_b": self.v_b,
            "i_out": self.i_out,
            "i_EH": self.i_EH,
            "i_ID": self.i_ID,
            "v_C": self.v_C,
            "i_L": self.i_L,
        }

    def to_csv(self, path) -> None:
        cols = self.columns()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_COLUMNS)
            for row in zip(*(cols[c] for c in CSV_COLUMNS)):
                w.writerow([f"{v:.12e}" for v in row])


def _newton_step(j, va, vb, iL0, vC0, vb0, dt, p: CircuitParams, tol_scale):
    """Solve the nodal equations at t + dt. Returns (va, vb, iL, vC) or None.

    Each node is converged to 1e-13 of the sum of its branch current
    magnitudes, or ``tol_scale`` at node a if that is looser. Neither target
    goes below what a few ulps of the node voltages can resolve.
    """
    a = dt / (2.0 * p.L)
    c = dt / (2.0 * p.Rd * p.Cd)
    # i_L(n+1) = kL0 + kL1 * vb ; v_C(n+1) = kC0 + kC1 * vb
    den_l = 1.0 + a * p.RL
    kL0 = (iL0 * (1.0 - a * p.RL) + a * vb0) / den_l
    kL1 = a / den_l
    kC0 = (vC0 * (1.0 - c) + c * vb0) / (1.0 + c)
    kC1 = c / (1.0 + c)
    gs, gd, gsh = 1.0 / p.Rs, 1.0 / p.Rd, 1.0 / p.Rsh
    inv_vt = 1.0 / p.VT

    for _ in range(NEWTON_MAX_ITER):
        x1 = va * inv_vt
        if x1 > 700.0:
            return None
        e1 = math.exp(x1)
        e2 = math.exp(0.5 * x1)
        iL = kL0 + kL1 * vb
        vC = kC0 + kC1 * vb
        i_d = p.Is1 * (e1 - 1.0) + p.Is2 * (e2 - 1.0)
        i_s = (va - vb) * gs
        f1 = j - i_d - va * gsh - i_s
        i_id = (vb - vC) * gd
        f2 = i_s - iL - i_id
        j11 = -(p.Is1 * e1 + 0.5 * p.Is2 * e2) * inv_vt - gsh - gs
        j12 = gs
        j21 = gs
        j22 = -gs - kL1 - gd * (1.0 - kC1)
        # residual floor set by the float spacing of the node voltages
        v_ulp = 4.0 * _EPS * max(abs(va), abs(vb))
        tol_a = max(tol_scale, 1e-13 * (j + abs(i_d) + abs(i_s)), v_ulp * -j11)
        tol_b = max(1e-13 * max(abs(iL) + abs(i_id), 1e-18), v_ulp * -j22)
        if abs(f1) <= tol_a and abs(f2) <= tol_b:
            return va, vb, iL, vC
        det = j11 * j22 - j12 * j21
        dva = (-f1 * j22 + f2 * j12) / det
        dvb = (-f2 * j11 + f1 * j21) / det
        if abs(dva) > DV_LIMIT:
            scale = DV_LIMIT / abs(dva)
            dva *= scale
            dvb *= scale
        va_new, vb_new = va + dva, vb + dvb
        if va_new == va and vb_new == vb:
            # float resolution reached
            return va, vb, iL, vC
        va, vb = va_new, vb_new
    return None


def info_path_time_constant(j: float, params: CircuitParams) -> float:
    """Small-signal time constant of the Cd branch at photocurrent j.

    The capacitor discharges through Rd in series with RL parallel to
    (Rs + junction). The junction's small-signal resistance is large at low
    drive, so this runs from about Rd*Cd up to (Rd + RL)*Cd.
    """
    op = solve_dc_operating_point(j, params, TWO_DIODE)
    g = (params.Is1 * math.exp(op.v_in / params.VT) + 0.5 * params.Is2 * math.exp(0.5 * op.v_in / params.VT)) / params.VT
    r_junction = 1.0 / (g + 1.0 / params.Rsh)
    r_src = params.Rs + r_junction
    return params.Cd * (params.Rd + params.RL * r_src / (params.RL + r_src))


def settling_time(j: float, params: CircuitParams, n_tau: float = 10.0) -> float:
    return n_tau * max(params.tau_eh, info_path_time_constant(j, params))


def dc_state(j: float, params: CircuitParams) -> tuple[SimState, float, float]:
    """Steady state for constant photocurrent j: (state, v_a, v_b)."""
    op = solve_dc_operating_point(j, params, TWO_DIODE)
    vb = op.i_eh * params.RL
    return SimState(i_L=op.i_eh, v_C=vb), op.v_in, vb


def simulate(
    frame: SymbolFrame,
    drive: OpticalDrive,
    params: CircuitParams,
    dt: float | None = None,
    state0: SimState | None = None,
    *,
    dt_min: float | None = None,
    growth: float = 1.1,
    cold_start: bool = False,
    check_step: bool = True,
) -> Waveform:
    """Integrate the receiver over the symbol sequence.

    Args:
        frame: transmit symbols s[k] (W) held for T seconds each.
        drive: wavelength, channel gain h, ambient current pa. ``drive.p`` is
            ignored; the received power is h * s(t).
        params: circuit constants.
        dt: largest step (s). Defaults to T / 5000.
        state0: initial (i_L, v_C). Defaults to the steady state of the first
            symbol, or zero when ``cold_start`` is set.
        dt_min: step used right after every symbol edge; the step then grows
            geometrically by ``growth`` up to ``dt``. Defaults to a tenth of
            the faster circuit time constant, capped at ``dt``.
        check_step: enforce dt <= T / 1000.
    """
    T = frame.T
    if dt is None:
        dt = T / 5000.0
    if check_step and dt > T / 1000.0 * (1 + 1e-12):
        raise ValueError(f"dt={dt!r} exceeds T/1000")
    if dt_min is None:
        dt_min = 0.1 * min(params.tau_eh, params.tau_id)
    dt_min = min(dt_min, dt)
    if not growth >= 1.0:
        raise ValueError("growth must be >= 1")

    r0 = drive.responsivity
    j_of = [r0 * drive.h * s + drive.pa for s in frame.symbols]

    if state0 is None:
        if cold_start:
            state0 = SimState()
        else:
            state0 = dc_state(j_of[0], params)[0]

    # consistent algebraic values at t = 0 for the given state
    iL, vC = state0.i_L, state0.v_C
    vb_guess = iL * params.RL
    start = _newton_step(
        j_of[0], _junction_guess(j_of[0], params), vb_guess, iL, vC, vb_guess, 0.0, params, _tol(j_of[0])
    )
    if start is None:
        raise SimulationError("could not find consistent initial node voltages")
    va, vb, _, _ = start
    # dt = 0 pins the states; keep the given ones exactly
    t = 0.0

    ts, ss, js, vas, vbs, iLs, vCs, ks = [], [], [], [], [], [], [], []

    def record(k):
        ts.append(t)
        ss.append(frame.symbols[k])
        js.append(j_of[k])
        vas.append(va)
        vbs.append(vb)
        iLs.append(iL)
        vCs.append(vC)
        ks.append(k)

    for k, j in enumerate(j_of):
        if k > 0:
            # re-solve the algebraic variables for the new drive at the same instant
            res = _newton_step(j, va, vb, iL, vC, vb, 0.0, params, _tol(j))
            if res is None:
                raise SimulationError(f"edge re-solve failed at t={t!r}, symbol {k}")
            va, vb = res[0], res[1]
        record(k)
        t_end = (k + 1) * T
        h = dt_min
        while t < t_end - 1e-15 * T:
            step = min(h, t_end - t)
            tol = _tol(j)
            res = None
            for _ in range(MAX_HALVINGS):
                res = _newton_step(j, va, vb, iL, vC, vb, step, params, tol)
                if res is not None:
                    break
                step *= 0.5
            if res is None:
                raise SimulationError(
                    f"Newton failed at t={t!r} (symbol {k}, j={j!r}, v_a={va!r}, v_b={vb!r}, i_L={iL!r}, v_C={vC!r})"
                )
            va, vb, iL, vC = res
            t = t + step if t + step < t_end - 1e-15 * T else t_end
            record(k)
            h = min(h * growth, dt)

    return Waveform(
        t=np.array(ts),
        s=np.array(ss),
        j=np.array(js),
        v_a=np.array(vas),
        v_b=np.array(vbs),
        i_L=np.array(iLs),
        v_C=np.array(vCs),
        params=params,
        symbol_index=np.array(ks),
    )


def _tol(j: float) -> float:
    return 1e-12 * max(j, 1e-9)


def _junction_guess(j: float, params: CircuitParams) -> float:
    return params.VT * math.log1p(j / params.Is1)


@dataclass(frozen=True)
class SymbolMetrics:
    k: int
    t: float
    i_EH: float
    i_ID: float
    v_C: float
    abs_i_ID: float
    abs_vc_mismatch: float
    rel_i_ID: float
    rel_vc_mismatch: float


def steady_state_metrics(w: Waveform, frame: SymbolFrame) -> list[SymbolMetrics]:
    """Per-symbol check of the two steady-state assumptions at the end of
    each symbol: i_ID ~ 0 and v_C ~ i_EH * RL.

    Relative values use the symbol's own signal scale (i_EH and i_EH * RL),
    floored at 1e-15 so a zero symbol does not divide by zero.
    """
    RL = w.params.RL
    i_ID = w.i_ID
    out = []
    for k in range(len(frame.symbols)):
        idx = np.flatnonzero(w.symbol_index == k)
        if len(idx) == 0:
            continue
        n = idx[-1]
        i_eh = w.i_L[n]
        a = abs(i_ID[n])
        b = abs(w.v_C[n] - i_eh * RL)
        scale_i = max(abs(i_eh), 1e-15)
        out.append(
            SymbolMetrics(
                k=k,
                t=float(w.t[n]),
                i_EH=float(i_eh),
                i_ID=float(i_ID[n]),
                v_C=float(w.v_C[n]),
                abs_i_ID=float(a),
                abs_vc_mismatch=float(b),
                rel_i_ID=float(a / scale_i),
                rel_vc_mismatch=float(b / (scale_i * RL)),
            )
        )
    return out


def symbol_readout(w: Waveform, frame: SymbolFrame) -> list[tuple[float, float]]:
    """Per symbol: (trapezoidal integral of Rd * i_ID, Rd * Cd * delta v_C)."""
    p = w.params
    i_ID = w.i_ID
    out = []
    for k in range(len(frame.symbols)):
        idx = np.flatnonzero(w.symbol_index == k)
        tt = w.t[idx]
        integral = p.Rd * float(np.sum(0.5 * (i_ID[idx][1:] + i_ID[idx][:-1]) * np.diff(tt)))
        dv = p.Rd * p.Cd * float(w.v_C[idx[-1]] - w.v_C[idx[0]])
        out.append((integral, dv))
    return out
