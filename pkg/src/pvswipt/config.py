"""Run configuration: defaults, plain-text ``key = value`` files, overrides.

Recognised keys (SI units unless the name says otherwise)::

    Is1 Is2 VT Rs Rsh RL Rd Cd L        circuit constants
    quantum_efficiency h                 optics
    lambda_nm                            wavelength list for eh-sweep (nm)
    rate_lambda_nm                       wavelength for cdf/rate/sample/waveform (nm)
    p_min p_max p_points p_scale         received-power grid (scale: log|linear)
    pa                                   ambient photocurrent list (A)
    a2                                   peak transmit power list (W)
    sigma2_dbm                           noise variance (dBm)
    seed                                 RNG seed
    cdf_points                           s-grid size per A2 in cdf-table
    symbols T dt dt_min cold_start       waveform settings (dt defaults to T/5000)
    variant count                        sample settings
    jobs                                 worker processes for sweeps

Lists are comma-separated. ``#`` starts a comment.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .circuit import CircuitParams

CIRCUIT_KEYS = tuple(f.name for f in fields(CircuitParams))


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    circuit: CircuitParams = field(default_factory=CircuitParams)
    quantum_efficiency: float = 0.7
    h: float = 1.0
    lambda_nm: tuple[float, ...] = (400.0, 950.0)
    rate_lambda_nm: float = 950.0
    p_min: float = 1e-6
    p_max: float = 0.1
    p_points: int = 50
    p_scale: str = "log"
    pa: tuple[float, ...] = (0.0,)
    a2: tuple[float, ...] = (1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1)
    sigma2_dbm: float = -60.0
    seed: int = 0
    cdf_points: int = 201
    symbols: tuple[float, ...] = (2e-3, 8e-3, 2e-3, 8e-3)
    T: float = 0.5
    dt: float | None = None
    dt_min: float | None = None
    cold_start: bool = False
    variant: str = "amplitude_uniform"
    count: int = 1000
    jobs: int = 1

    def validate(self) -> "RunConfig":
        if self.p_points < 1:
            raise ConfigError("power grid is empty (p_points < 1)")
        if not 0 < self.p_min <= self.p_max:
            raise ConfigError("need 0 < p_min <= p_max")
        if self.p_scale not in ("log", "linear"):
            raise ConfigError("p_scale must be 'log' or 'linear'")
        for name in ("lambda_nm", "pa", "a2", "symbols"):
            if len(getattr(self, name)) == 0:
                raise ConfigError(f"{name} list is empty")
        if any(v <= 0 for v in self.lambda_nm) or self.rate_lambda_nm <= 0:
            raise ConfigError("wavelengths must be positive")
        if any(v < 0 for v in self.pa):
            raise ConfigError("ambient currents must be nonnegative")
        if any(v <= 0 for v in self.a2):
            raise ConfigError("A2 values must be positive")
        if self.cdf_points < 2:
            raise ConfigError("cdf_points must be at least 2")
        if self.count < 1:
            raise ConfigError("count must be at least 1")
        if self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        return self

    def power_grid(self) -> np.ndarray:
        if self.p_scale == "log":
            return np.logspace(np.log10(self.p_min), np.log10(self.p_max), self.p_points)
        return np.linspace(self.p_min, self.p_max, self.p_points)

    @property
    def sigma2(self) -> float:
        return 10.0 ** ((self.sigma2_dbm - 30.0) / 10.0)

    def echo(self) -> list[str]:
        """``key = value`` lines that parse back to this configuration."""
        lines = [f"{k} = {_fmt(v)}" for k, v in asdict(self.circuit).items()]
        for f in fields(self):
            if f.name == "circuit":
                continue
            lines.append(f"{f.name} = {_fmt(getattr(self, f.name))}")
        return lines


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ", ".join(_fmt(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, raw: str):
    raw = raw.strip()
    if key in CIRCUIT_KEYS:
        return float(raw)
    kind = _TYPES[key]
    if kind.startswith("tuple"):
        return tuple(float(x) for x in raw.split(",") if x.strip())
    if kind == "bool":
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    if kind == "float | None":
        return None if raw.lower() in ("", "none") else float(raw)
    return raw


def apply_overrides(cfg: RunConfig, values: dict[str, str]) -> RunConfig:
    circuit_updates, updates = {}, {}
    for key, raw in values.items():
        if key in CIRCUIT_KEYS:
            target = circuit_updates
        elif key in _TYPES and key != "circuit":
            target = updates
        else:
            raise ConfigError(f"unknown configuration key {key!r}")
        try:
            target[key] = _coerce(key, raw)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from exc
    if circuit_updates:
        try:
            updates["circuit"] = replace(cfg.circuit, **circuit_updates)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    return replace(cfg, **updates)


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from exc
    return apply_overrides(RunConfig(), parse_config_text(text, str(path)))
