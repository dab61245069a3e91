"""Information transfer over the nonlinear amplitude channel y = x(s) + n.

The receiver output amplitude is x(s) = sqrt(P_harv(h s, pa)), a concave
saturating map of the transmit power s in [0, A2], observed in additive white
Gaussian noise of variance sigma2. An entropy-power lower bound gives the
achievable rate

    R = 0.5 * ln(1 + exp(2 u(x)) / (2 pi e sigma2))

where u(x) is the differential entropy of x. It is maximised by making x
uniform on [x(0), x(A2)].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import integrate, special

from .circuit import spectral_response
from .eh_models import (
    EhModelParams,
    eh_current_closed_form,
    eh_current_derivative,
    harvested_power_closed_form,
)

TWO_PI_E = 2.0 * math.pi * math.e


class RateError(RuntimeError):
    pass


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class RateConfig:
    A2: float = 10e-3
    sigma2: float = 1e-9
    h: float = 1.0
    pa: float = 0.0
    eh: EhModelParams = field(default_factory=EhModelParams)
    r0: float = field(default_factory=lambda: spectral_response(950e-9))

    def __post_init__(self):
        if not self.A2 >= 0:
            raise ValueError("A2 must be nonnegative")
        if not self.sigma2 >= 0:
            raise ValueError("sigma2 must be nonnegative")
        if not 0 < self.h <= 1:
            raise ValueError("h must lie in (0, 1]")
        if not self.pa >= 0:
            raise ValueError("pa must be nonnegative")

    @property
    def x_min(self) -> float:
        return float(output_amplitude(0.0, self))

    @property
    def x_max(self) -> float:
        return float(output_amplitude(self.A2, self))


class Distribution(Enum):
    AMPLITUDE_UNIFORM = "amplitude_uniform"
    POWER_PROPORTIONAL = "power_proportional"
    UNIFORM_S = "uniform_s"


@dataclass(frozen=True)
class TransmitDistribution:
    variant: Distribution
    config: RateConfig

    def __post_init__(self):
        if not self.config.A2 > 0:
            raise ValueError("a transmit distribution needs A2 > 0")


@dataclass(frozen=True)
class ChannelSample:
    s: float
    x: float
    y: float
    n: float


@dataclass(frozen=True)
class ChannelSamples:
    """Struct-of-arrays batch of channel uses; index it for ChannelSample."""

    index: np.ndarray
    u: np.ndarray
    s: np.ndarray
    x: np.ndarray
    y: np.ndarray
    n: np.ndarray

    def __len__(self) -> int:
        return len(self.s)

    def __getitem__(self, k: int) -> ChannelSample:
        return ChannelSample(float(self.s[k]), float(self.x[k]), float(self.y[k]), float(self.n[k]))

    def __iter__(self):
        return (self[k] for k in range(len(self)))


def _check_power(s, cfg: RateConfig) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    slack = 1e-12 * cfg.A2
    if np.any(s < -slack) or np.any(s > cfg.A2 + slack) or np.any(np.isnan(s)):
        raise ValueError(f"transmit power outside [0, {cfg.A2!r}]")
    return np.clip(s, 0.0, cfg.A2)


def _amplitude(s: np.ndarray, cfg: RateConfig) -> np.ndarray:
    i = eh_current_closed_form(cfg.r0 * cfg.h * s + cfg.pa, cfg.eh)
    return math.sqrt(cfg.eh.circuit.RL) * np.maximum(i, 0.0)


def output_amplitude(s, cfg: RateConfig):
    """x(s) = sqrt(P_harv(h s, pa)) for s in [0, A2]."""
    x = _amplitude(_check_power(s, cfg), cfg)
    return x if np.ndim(x) else float(x)


def output_amplitude_derivative(s, cfg: RateConfig):
    """dx/ds = sqrt(RL) * r0 * h * d i_EH / dj."""
    s = _check_power(s, cfg)
    d = math.sqrt(cfg.eh.circuit.RL) * cfg.r0 * cfg.h * eh_current_derivative(cfg.r0 * cfg.h * s + cfg.pa, cfg.eh)
    return d if np.ndim(d) else float(d)


def _harvested(s, cfg: RateConfig):
    return harvested_power_closed_form(cfg.h * np.asarray(s, dtype=float), cfg.pa, cfg.eh, cfg.r0)


def cdf(dist: TransmitDistribution, s):
    """Distribution function of the transmit power; total on the real line."""
    cfg = dist.config
    s_arr = np.asarray(s, dtype=float)
    inside = np.clip(s_arr, 0.0, cfg.A2)
    if dist.variant is Distribution.UNIFORM_S:
        F = inside / cfg.A2
    elif dist.variant is Distribution.AMPLITUDE_UNIFORM:
        x = _amplitude(inside, cfg)
        x0, x1 = _amplitude(np.array([0.0, cfg.A2]), cfg)
        F = (x - x0) / (x1 - x0)
    else:
        P = _harvested(inside, cfg)
        P0, P1 = _harvested(np.array([0.0, cfg.A2]), cfg)
        F = (P - P0) / (P1 - P0)
    F = np.where(s_arr < 0.0, 0.0, np.where(s_arr >= cfg.A2, 1.0, np.clip(F, 0.0, 1.0)))
    return F if np.ndim(F) else float(F)


def pdf(dist: TransmitDistribution, s):
    """Density of the transmit power on [0, A2]."""
    cfg = dist.config
    s = _check_power(s, cfg)
    if dist.variant is Distribution.UNIFORM_S:
        f = np.full_like(s, 1.0 / cfg.A2)
    else:
        dx = output_amplitude_derivative(s, cfg)
        x0, x1 = _amplitude(np.array([0.0, cfg.A2]), cfg)
        if dist.variant is Distribution.AMPLITUDE_UNIFORM:
            f = dx / (x1 - x0)
        else:
            f = 2.0 * _amplitude(s, cfg) * dx / (x1**2 - x0**2)
    return f if np.ndim(f) else float(f)


def sample(dist: TransmitDistribution, u, tol: float = 1e-12, max_iter: int = 200):
    """Inverse-CDF transform of uniform variates by vectorised bisection."""
    u_arr = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any((u_arr < 0.0) | (u_arr > 1.0)) or np.any(np.isnan(u_arr)):
        raise ValueError("uniform variates must lie in [0, 1]")
    A2 = dist.config.A2
    lo = np.zeros_like(u_arr)
    hi = np.full_like(u_arr, A2)
    s = 0.5 * (lo + hi)
    active = (u_arr > 0.0) & (u_arr < 1.0)
    s[u_arr <= 0.0] = 0.0
    s[u_arr >= 1.0] = A2
    for _ in range(max_iter):
        if not active.any():
            break
        mid = 0.5 * (lo[active] + hi[active])
        err = cdf(dist, mid) - u_arr[active]
        s[active] = mid
        below = err < 0.0
        idx = np.flatnonzero(active)
        lo[idx[below]] = mid[below]
        hi[idx[~below]] = mid[~below]
        finished = (np.abs(err) <= tol) | (hi[idx] - lo[idx] <= 2.0 * np.spacing(hi[idx]))
        active[idx[finished]] = False
    out = s.reshape(np.shape(u))
    return out if np.ndim(out) else float(out)


def _segments(A2: float, decades: int = 10) -> list[tuple[float, float]]:
    # log-spaced breakpoints resolve the linear-to-logarithmic knee of x(s)
    edges = [0.0] + [A2 * 10.0 ** (-k) for k in range(decades, 0, -1)] + [A2]
    return list(zip(edges, edges[1:]))


def differential_entropy(dist: TransmitDistribution, atol: float = 1e-6, max_evals: int = 1_000_000) -> float:
    """u(x) = -int f_s(s) ln(f_s(s) / x'(s)) ds by adaptive quadrature."""
    cfg = dist.config

    def integrand(s: float) -> float:
        f = pdf(dist, s)
        if f <= 0.0:
            return 0.0
        return -f * (math.log(f) - math.log(output_amplitude_derivative(s, cfg)))

    segs = _segments(cfg.A2)
    limit = max(50, max_evals // (21 * len(segs)))
    total, err_total = 0.0, 0.0
    for a, b in segs:
        val, err, info = integrate.quad(
            integrand, a, b, epsabs=atol / len(segs), epsrel=1e-10, limit=limit, full_output=True
        )[:3]
        total += val
        err_total += err
    if not math.isfinite(total) or err_total > 10 * atol:
        raise RateError(f"entropy quadrature failed: value={total!r}, error estimate={err_total!r}")
    return total


def _rate_from_entropy(u: float, sigma2: float) -> float:
    if not sigma2 > 0:
        raise ValueError("rate needs sigma2 > 0")
    return 0.5 * float(np.logaddexp(0.0, 2.0 * u - math.log(TWO_PI_E * sigma2)))


def achievable_rate(dist: TransmitDistribution) -> float:
    """Entropy-power achievable rate in nats per channel use."""
    return _rate_from_entropy(differential_entropy(dist), dist.config.sigma2)


def max_achievable_rate(cfg: RateConfig) -> float:
    """Rate of the uniform-amplitude optimum, in closed form."""
    if not cfg.sigma2 > 0:
        raise ValueError("rate needs sigma2 > 0")
    if cfg.A2 == 0:
        return 0.0
    dx = cfg.x_max - cfg.x_min
    return 0.5 * math.log1p(dx * dx / (TWO_PI_E * cfg.sigma2))


def uniform_stream(seed: int, start: int, count: int) -> np.ndarray:
    """Counter-based uniforms in (0, 1), shape (count, 2).

    Row k depends only on (seed, start + k), so chunked generation matches a
    single pass.
    """
    bg = np.random.Philox(key=seed, counter=start)
    raw = bg.random_raw(4 * count).reshape(count, 4)[:, :2]
    return ((raw >> np.uint64(11)).astype(float) + 0.5) * 2.0**-53


def simulate_channel(dist: TransmitDistribution, k: int, seed: int, start: int = 0) -> ChannelSamples:
    """Draw k channel uses: s by inverse CDF, x = x(s), y = x + n."""
    if k < 1:
        raise ValueError("need at least one channel use")
    uu = uniform_stream(seed, start, k)
    s = sample(dist, uu[:, 0])
    x = _amplitude(np.asarray(s), dist.config)
    n = math.sqrt(dist.config.sigma2) * special.ndtri(uu[:, 1])
    return ChannelSamples(
        index=np.arange(start, start + k),
        u=uu[:, 0],
        s=np.asarray(s),
        x=x,
        y=x + n,
        n=n,
    )
