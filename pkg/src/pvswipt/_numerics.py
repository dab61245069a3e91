"""Small scalar numerical helpers shared across modules."""

from __future__ import annotations

import math
from typing import Callable

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(
    f: Callable[[float], float],
    a: float,
    b: float,
    rtol: float = 1e-10,
    atol: float = 0.0,
    max_iter: int = 500,
) -> tuple[float, float]:
    """Maximise a unimodal function on [a, b].

    Stops once the bracket is narrower than ``rtol * max(|a|, |b|) + atol``.

    Returns:
        (x_best, f(x_best))
    """
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= rtol * max(abs(a), abs(b)) + atol + 1e-300:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    # endpoints are candidates too (monotone objectives)
    best = max((fc, c), (fd, d), (f(a), a), (f(b), b))
    return best[1], best[0]


def golden_section_min(
    f: Callable[[float], float],
    a: float,
    b: float,
    rtol: float = 1e-10,
    atol: float = 0.0,
    max_iter: int = 500,
) -> tuple[float, float]:
    x, fx = golden_section_max(lambda t: -f(t), a, b, rtol=rtol, atol=atol, max_iter=max_iter)
    return x, -fx


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    atol: float = 1e-15,
    max_depth: int = 50,
) -> float:
    """Adaptive Simpson quadrature with Richardson correction."""
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_rec(f, a, b, fa, fm, fb, whole, atol, max_depth)


def _simpson_rec(f, a, b, fa, fm, fb, whole, atol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if depth <= 0 or abs(delta) <= 15.0 * atol:
        return left + right + delta / 15.0
    return _simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * atol, depth - 1) + _simpson_rec(
        f, m, b, fm, frm, fb, right, 0.5 * atol, depth - 1
    )
