"""Command-line front end: sweeps, tables and checks written as CSV.

Every command that writes to ``--out PATH`` also writes ``PATH.manifest.txt``
holding the resolved configuration, the toolkit version, a timestamp and the
SHA-256 of each emitted CSV. Without ``--out`` the main table goes to stdout.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .circuit import TWO_DIODE, OpticalDrive, solve_dc_operating_point, spectral_response
from .config import ConfigError, RunConfig, apply_overrides, load_config
from .eh_models import (
    EhModelParams,
    baseline_mpp,
    baseline_single_diode,
    calibrate_baseline_mpp,
    harvested_power_closed_form,
)
from .info_rate import (
    Distribution,
    RateConfig,
    TransmitDistribution,
    achievable_rate,
    cdf,
    max_achievable_rate,
    simulate_channel,
)
from .transient import CSV_COLUMNS, SymbolFrame, simulate, steady_state_metrics
from .validation import ValidationSetup, run_all

EH_HEADER = (
    "p_W", "lambda_nm", "pa_A", "P_closed_W", "P_oracle2d_W",
    "P_baseline_mpp_W", "P_baseline_1d_W", "rel_err_closed_vs_oracle",
)
CDF_HEADER = ("A2_W", "s_W", "F_amplitude_uniform", "F_paper_eq12", "F_uniform")
RATE_HEADER = ("A2_W", "pa_A", "R_optimal_nats", "R_uniform_nats", "R_closed_form_nats")
SAMPLE_HEADER = ("k", "u", "s_W", "x_sqrtW", "n_sqrtW", "y_sqrtW")
METRICS_HEADER = (
    "k", "t_s", "i_EH_A", "i_ID_A", "v_C_V",
    "abs_i_ID_A", "abs_vc_mismatch_V", "rel_i_ID", "rel_vc_mismatch",
)
VALIDATE_HEADER = ("check", "passed", "worst", "tolerance")

# steady-state assumption is flagged when a per-symbol metric exceeds this
STEADY_STATE_TOL = 0.01


class CommandError(RuntimeError):
    pass


# ---------------------------------------------------------------- tables


class Table:
    def __init__(self, header):
        self.header = tuple(header)
        self.rows: list[tuple] = []

    def add(self, row):
        row = tuple(row)
        if len(row) != len(self.header):
            raise ValueError("row width does not match header")
        for v in row:
            if isinstance(v, float) and not np.isfinite(v):
                raise CommandError(f"non-finite value in row {row!r}")
        self.rows.append(row)

    def render(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for row in self.rows:
            w.writerow([_cell(v) for v in row])
        return buf.getvalue()


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.12e}"


def _pmap(fn, items, jobs: int):
    """Ordered map, optionally across processes."""
    items = list(items)
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


# -------------------------------------------------------------- commands


def _eh_row(task):
    p, lam_nm, pa, cfg, cal = task
    circuit = cfg.circuit
    r0 = spectral_response(lam_nm * 1e-9, cfg.quantum_efficiency)
    model = EhModelParams(circuit)
    j = r0 * cfg.h * p + pa
    closed = float(harvested_power_closed_form(cfg.h * p, pa, model, r0))
    oracle = solve_dc_operating_point(j, circuit, TWO_DIODE).p_harv
    base_mpp = baseline_mpp(cfg.h * p, pa, circuit, cal, r0)
    base_1d = baseline_single_diode(cfg.h * p, pa, circuit, r0, Is=model.Is_eff)
    return (p, lam_nm, pa, closed, oracle, base_mpp, base_1d, (closed - oracle) / oracle)


def cmd_eh_sweep(cfg: RunConfig) -> Table:
    model = EhModelParams(cfg.circuit)
    tasks = []
    for lam_nm in cfg.lambda_nm:
        r0 = spectral_response(lam_nm * 1e-9, cfg.quantum_efficiency)
        # Baseline 1 is anchored to the closed form at 10 mW with no ambient light
        cal = calibrate_baseline_mpp(model, r0)
        for pa in cfg.pa:
            for p in cfg.power_grid():
                tasks.append((float(p), float(lam_nm), float(pa), cfg, cal))
    table = Table(EH_HEADER)
    for row in _pmap(_eh_row, tasks, cfg.jobs):
        table.add(row)
    return table


def _rate_config(cfg: RunConfig, A2: float, pa: float) -> RateConfig:
    return RateConfig(
        A2=A2,
        sigma2=cfg.sigma2,
        h=cfg.h,
        pa=pa,
        eh=EhModelParams(cfg.circuit),
        r0=spectral_response(cfg.rate_lambda_nm * 1e-9, cfg.quantum_efficiency),
    )


def cmd_cdf_table(cfg: RunConfig) -> Table:
    """CDF of each transmit distribution on a uniform s grid per A2.

    Uses the first entry of the ``pa`` list.
    """
    table = Table(CDF_HEADER)
    for A2 in cfg.a2:
        rc = _rate_config(cfg, A2, cfg.pa[0])
        s = np.linspace(0.0, A2, cfg.cdf_points)
        cols = [cdf(TransmitDistribution(v, rc), s) for v in
                (Distribution.AMPLITUDE_UNIFORM, Distribution.POWER_PROPORTIONAL, Distribution.UNIFORM_S)]
        for k in range(len(s)):
            table.add((A2, s[k], *(float(c[k]) for c in cols)))
    return table


def _rate_row(task):
    cfg, A2, pa = task
    rc = _rate_config(cfg, A2, pa)
    r_opt = achievable_rate(TransmitDistribution(Distribution.AMPLITUDE_UNIFORM, rc))
    r_uni = achievable_rate(TransmitDistribution(Distribution.UNIFORM_S, rc))
    return (A2, pa, r_opt, r_uni, max_achievable_rate(rc))


def cmd_rate_sweep(cfg: RunConfig) -> tuple[Table, list[str]]:
    tasks = [(cfg, float(A2), float(pa)) for pa in cfg.pa for A2 in cfg.a2]
    table = Table(RATE_HEADER)
    for row in _pmap(_rate_row, tasks, cfg.jobs):
        table.add(row)
    return table, rate_observations(table)


def rate_observations(table: Table) -> list[str]:
    """Notes on where R_uniform falls while A2 grows at fixed pa."""
    notes = []
    by_pa: dict[float, list[tuple]] = {}
    for row in table.rows:
        by_pa.setdefault(row[1], []).append(row)
    for pa, rows in by_pa.items():
        rows = sorted(rows, key=lambda r: r[0])
        for a, b in zip(rows, rows[1:]):
            if b[3] < a[3]:
                notes.append(
                    f"R_uniform decreases with A2 at pa={pa:.3e} A: "
                    f"{a[3]:.6f} nats at A2={a[0]:.3e} W -> {b[3]:.6f} nats at A2={b[0]:.3e} W"
                )
    return notes


def cmd_waveform(cfg: RunConfig, symbols=None) -> tuple[Table, Table, list[str]]:
    symbols = tuple(cfg.symbols if symbols is None else symbols)
    if not symbols:
        raise ConfigError("need at least one symbol")
    frame = SymbolFrame(symbols, T=cfg.T, A2=max(max(symbols), 0.0))
    drive = OpticalDrive(
        lambda0=cfg.rate_lambda_nm * 1e-9, h=cfg.h, pa=cfg.pa[0], quantum_efficiency=cfg.quantum_efficiency
    )
    w = simulate(frame, drive, cfg.circuit, dt=cfg.dt, dt_min=cfg.dt_min, cold_start=cfg.cold_start)
    wave = Table(CSV_COLUMNS)
    cols = w.columns()
    for row in zip(*(cols[c] for c in CSV_COLUMNS)):
        wave.add(tuple(float(v) for v in row))
    metrics = Table(METRICS_HEADER)
    warnings = []
    for m in steady_state_metrics(w, frame):
        metrics.add((m.k, m.t, m.i_EH, m.i_ID, m.v_C, m.abs_i_ID, m.abs_vc_mismatch, m.rel_i_ID, m.rel_vc_mismatch))
        worst = max(m.rel_i_ID, m.rel_vc_mismatch)
        if worst > STEADY_STATE_TOL:
            warnings.append(
                f"symbol {m.k}: steady-state assumption fails "
                f"(rel i_ID={m.rel_i_ID:.3e}, rel v_C mismatch={m.rel_vc_mismatch:.3e}); "
                f"T={cfg.T:.3e} s is too short"
            )
    return wave, metrics, warnings


def cmd_sample(cfg: RunConfig) -> Table:
    """Channel uses drawn from the chosen distribution (first A2 and pa)."""
    try:
        variant = Distribution(cfg.variant)
    except ValueError:
        raise ConfigError(
            f"unknown variant {cfg.variant!r}; choose from {', '.join(d.value for d in Distribution)}"
        ) from None
    rc = _rate_config(cfg, cfg.a2[0], cfg.pa[0])
    ch = simulate_channel(TransmitDistribution(variant, rc), cfg.count, cfg.seed)
    table = Table(SAMPLE_HEADER)
    for k in range(len(ch)):
        table.add((int(ch.index[k]), ch.u[k], ch.s[k], ch.x[k], ch.n[k], ch.y[k]))
    return table


def cmd_validate(cfg: RunConfig) -> tuple[Table, list[str], bool]:
    setup = ValidationSetup(
        circuit=cfg.circuit,
        lambdas_m=tuple(l * 1e-9 for l in cfg.lambda_nm),
        sigma2=cfg.sigma2,
        seed=cfg.seed,
        p_grid=tuple(cfg.power_grid()),
        quantum_efficiency=cfg.quantum_efficiency,
    )
    results = run_all(setup)
    table = Table(VALIDATE_HEADER)
    for r in results:
        table.rows.append((r.name, r.passed, r.worst, r.tolerance))
    return table, [r.line() for r in results], all(r.passed for r in results)


# ------------------------------------------------------------- output


def _render_validate(table: Table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.header)
    for name, passed, worst, tol in table.rows:
        w.writerow([name, _cell(passed), _cell(worst), _cell(tol)])
    return buf.getvalue()


def _write(path: Path, text: str) -> str:
    try:
        path.write_text(text)
    except OSError as exc:
        raise CommandError(f"cannot write {path}: {exc.strerror}") from exc
    return hashlib.sha256(text.encode()).hexdigest()


def write_outputs(out: Path | None, command: str, cfg: RunConfig, files: dict[str, str], notes=()) -> None:
    """Write CSVs (first one at ``out``, others beside it) and the manifest."""
    if out is None:
        sys.stdout.write(next(iter(files.values())))
        return
    digests = {}
    for suffix, text in files.items():
        path = out if suffix == "" else out.with_name(out.name + suffix)
        digests[path.name] = _write(path, text)
    lines = [
        f"command = {command}",
        f"version = {__version__}",
        f"timestamp = {_dt.datetime.now(_dt.timezone.utc).isoformat(timespec='seconds')}",
        "",
        "[config]",
        *cfg.echo(),
        "",
        "[sha256]",
        *(f"{name} = {digest}" for name, digest in digests.items()),
    ]
    if notes:
        lines += ["", "[notes]", *notes]
    _write(out.with_name(out.name + ".manifest.txt"), "\n".join(lines) + "\n")


# ---------------------------------------------------------------- parser


def _float_list(text: str) -> str:
    try:
        [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    return text


def _u64(text: str) -> str:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2**64)")
    return text


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key = value configuration file")
    common.add_argument("--out", type=Path, help="CSV output path (default: stdout)")
    common.add_argument("--seed", type=_u64)
    common.add_argument("--sigma2-dbm", dest="sigma2_dbm", type=float)
    common.add_argument("--lambda-nm", dest="lambda_nm", type=_float_list, help="comma-separated wavelengths (nm)")
    common.add_argument("--pa", type=_float_list, help="comma-separated ambient currents (A)")
    common.add_argument("--a2", type=_float_list, help="comma-separated peak transmit powers (W)")
    common.add_argument("--jobs", type=int, help="worker processes for sweeps")
    common.add_argument(
        "--set", dest="sets", action="append", default=[], metavar="KEY=VALUE",
        help="override any configuration key (repeatable)",
    )

    parser = argparse.ArgumentParser(prog="pvswipt", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("eh-sweep", parents=[common], help="harvested power: closed form, oracle, baselines")
    wf = sub.add_parser("waveform", parents=[common], help="transient simulation of a symbol sequence")
    wf.add_argument("--symbols", type=_float_list, help="comma-separated transmit powers (W)")
    wf.add_argument("--T", dest="T", type=float, help="symbol duration (s)")
    sub.add_parser("cdf-table", parents=[common], help="transmit CDFs per A2")
    sub.add_parser("rate-sweep", parents=[common], help="achievable rates over A2 and pa")
    sub.add_parser("validate", parents=[common], help="run the invariant suite")
    sp = sub.add_parser("sample", parents=[common], help="draw channel uses")
    sp.add_argument("--variant", choices=[d.value for d in Distribution])
    sp.add_argument("--count", type=int)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    values = {}
    for key in ("seed", "sigma2_dbm", "lambda_nm", "pa", "a2", "jobs", "symbols", "T", "variant", "count"):
        v = getattr(args, key, None)
        if v is not None:
            values[key] = str(v)
    for item in args.sets:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        values[k.strip()] = v
    return apply_overrides(cfg, values).validate()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        parser.error(str(exc))
    out = args.out
    try:
        if args.command == "eh-sweep":
            write_outputs(out, args.command, cfg, {"": cmd_eh_sweep(cfg).render()})
        elif args.command == "cdf-table":
            write_outputs(out, args.command, cfg, {"": cmd_cdf_table(cfg).render()})
        elif args.command == "rate-sweep":
            table, notes = cmd_rate_sweep(cfg)
            for n in notes:
                print("observed: " + n, file=sys.stderr)
            write_outputs(out, args.command, cfg, {"": table.render()}, notes)
        elif args.command == "waveform":
            wave, metrics, warnings = cmd_waveform(cfg)
            for msg in warnings:
                print("warning: " + msg, file=sys.stderr)
            if out is None:
                sys.stdout.write(wave.render())
                sys.stderr.write(metrics.render())
            else:
                write_outputs(
                    out, args.command, cfg,
                    {"": wave.render(), ".metrics.csv": metrics.render()}, warnings,
                )
        elif args.command == "sample":
            write_outputs(out, args.command, cfg, {"": cmd_sample(cfg).render()})
        elif args.command == "validate":
            table, lines, ok = cmd_validate(cfg)
            for line in lines:
                print(line, file=sys.stderr if out is None else sys.stdout)
            if out is not None:
                write_outputs(out, args.command, cfg, {"": _render_validate(table)})
            else:
                sys.stdout.write(_render_validate(table))
            return 0 if ok else 1
    except ConfigError as exc:
        parser.error(str(exc))
    except CommandError as exc:
        print(f"pvswipt: error: {exc}", file=sys.stderr)
        return 2
    return 0
