"""Principal branch of the Lambert-W function for real arguments.

Two entry points:

* :func:`lambert_w0` evaluates W0(x) for x >= -1/e.
* :func:`lambert_w0_of_exp` evaluates W0(exp(y)) without ever forming exp(y),
  which is what the harvesting model needs: its argument is an exponential of
  a number in the thousands at milliwatt input powers.

Both accept scalars or numpy arrays and return the same shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

INV_E = np.exp(-1.0)
BRANCH_TOL = 1e-15
MAX_ITER = 50
_EPS = np.finfo(float).eps


class LambertDomainError(ValueError):
    pass


@dataclass(frozen=True)
class LambertResult:
    value: float
    iterations: int
    residual: float


def _initial_guess(x: np.ndarray) -> np.ndarray:
    w = np.empty_like(x)

    near = x < -0.32
    # branch-point series in p = sqrt(2(ex + 1))
    p = np.sqrt(np.maximum(2.0 * (np.e * x[near] + 1.0), 0.0))
    w[near] = -1.0 + p - p**2 / 3.0 + 11.0 / 72.0 * p**3

    mid = (~near) & (x <= 3.0)
    # Winitzki's approximation
    l1 = np.log1p(x[mid])
    w[mid] = l1 * (1.0 - np.log1p(l1) / (2.0 + l1))

    big = (x > 3.0) & np.isfinite(x)
    w[np.isposinf(x)] = np.inf
    l1 = np.log(x[big])
    l2 = np.log(l1)
    w[big] = l1 - l2 + l2 / l1
    return w


def _halley_direct(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w = _initial_guess(x)
    iters = np.zeros(x.shape, dtype=int)
    active = np.isfinite(x) & (x != 0.0) & (x != -INV_E)
    w[x == 0.0] = 0.0
    w[x == -INV_E] = -1.0
    w[np.isposinf(x)] = np.inf
    for _ in range(MAX_ITER):
        if not active.any():
            break
        wa, xa = w[active], x[active]
        ew = np.exp(wa)
        f = wa * ew - xa
        wp1 = wa + 1.0
        denom = ew * wp1 - (wa + 2.0) * f / (2.0 * wp1)
        with np.errstate(divide="ignore", invalid="ignore"):
            dw = np.where(denom != 0.0, f / denom, 0.0)
        wn = np.maximum(wa - dw, -1.0)
        w[active] = wn
        iters[active] += 1
        done = np.abs(dw) <= 4.0 * _EPS * (1.0 + np.abs(wn))
        idx = np.flatnonzero(active)
        active[idx[done]] = False
    return w, iters


def _as_array(x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    return arr.ravel().copy(), arr.ndim == 0


def _check_domain(x: np.ndarray) -> np.ndarray:
    if np.isnan(x).any():
        raise LambertDomainError("lambert_w0: NaN argument")
    bad = x < -INV_E - BRANCH_TOL
    if bad.any():
        raise LambertDomainError(
            f"lambert_w0: argument {x[bad][0]!r} below the branch point -1/e"
        )
    return np.maximum(x, -INV_E)


def _log_scalar(y: float) -> float:
    ly = math.log(y)
    w = y - ly + ly / y
    for _ in range(MAX_ITER):
        g = w + math.log(w) - y
        g1 = 1.0 + 1.0 / w
        dw = g / (g1 + 0.5 * g / (w * w * g1))
        w = max(w - dw, 0.5 * w)
        if abs(dw) <= 4.0 * _EPS * w:
            break
    return w


def lambert_w0(x):
    """W0(x), the solution w >= -1 of w * exp(w) = x.

    Arguments within 1e-15 below -1/e are clamped to the branch point.
    Raises ``LambertDomainError`` for anything further below.
    """
    xa, scalar = _as_array(x)
    xa = _check_domain(xa)
    w, _ = _halley_direct(xa)
    return float(w[0]) if scalar else w.reshape(np.shape(x))


def lambert_w0_result(x: float) -> LambertResult:
    """Scalar W0 with iteration count and residual |w e^w - x|."""
    xa = _check_domain(np.array([float(x)]))
    w, iters = _halley_direct(xa)
    value = float(w[0])
    residual = abs(value * np.exp(value) - xa[0]) if np.isfinite(value) else 0.0
    return LambertResult(value=value, iterations=int(iters[0]), residual=float(residual))


def _halley_log(y: np.ndarray) -> np.ndarray:
    # solve g(w) = w + ln w - y = 0 for y > 1 (so w > 1)
    active = np.isfinite(y)
    w = np.full_like(y, np.inf)
    ly = np.log(y[active])
    w[active] = y[active] - ly + ly / y[active]
    for _ in range(MAX_ITER):
        if not active.any():
            break
        wa, ya = w[active], y[active]
        g = wa + np.log(wa) - ya
        g1 = 1.0 + 1.0 / wa
        g2 = -1.0 / wa**2
        dw = g / (g1 - 0.5 * g * g2 / g1)
        wn = np.maximum(wa - dw, 0.5 * wa)
        w[active] = wn
        done = np.abs(dw) <= 4.0 * _EPS * np.abs(wn)
        idx = np.flatnonzero(active)
        active[idx[done]] = False
    return w


def lambert_w0_of_exp(y):
    """W0(exp(y)) evaluated in log space; total on the real line.

    For y <= 1 the argument exp(y) is harmless and the direct iteration is
    used. Above that the equation w + ln(w) = y is solved instead, seeded
    with the asymptotic expansion y - ln y + ln(y)/y.
    """
    if isinstance(y, (float, int, np.floating)) and 1.0 < y < math.inf:
        return _log_scalar(float(y))
    ya, scalar = _as_array(y)
    if np.isnan(ya).any():
        raise LambertDomainError("lambert_w0_of_exp: NaN argument")
    out = np.empty_like(ya)
    low = ya <= 1.0
    if low.any():
        out[low], _ = _halley_direct(np.exp(ya[low]))
    if (~low).any():
        out[~low] = _halley_log(ya[~low])
    return float(out[0]) if scalar else out.reshape(np.shape(y))
