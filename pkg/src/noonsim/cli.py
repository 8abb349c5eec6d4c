"""Command-line interface: config ingestion, run dispatch, CSV/JSON output.

Commands: ``ideal``, ``run``, ``sweep-n``, ``optimize-g``, ``sweep-tg``.
Config files are JSON with two sections, "device" and "integrator"; keys
carry their unit as a suffix (``_ghz``, ``_mhz``, ``_inv_us``, ``_ns``,
``_ff``, ``_ps``) and unknown keys are rejected so unit typos fail loudly.
All output is deterministic: no timestamps, fixed row order, 9 significant
digits.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .device import (
    DEVICE_CONFIG_DEFAULTS,
    ConfigError,
    DeviceParams,
    derive_couplings,
    device_params_from_config,
    mhz,
    tau_total,
)
from .experiments import (
    DEFAULT_G_MHZ,
    ResultRow,
    SweepSpec,
    fidelity,
    optimize_g,
    sweep_n,
    sweep_t_g,
)
from .lindblad import (
    INTEGRATOR_CONFIG_DEFAULTS,
    IntegratorConfig,
    integrator_config_from_config,
)
from .protocol import (
    ideal_intermediate_state,
    ideal_noon_state,
    protocol_space,
    run_protocol,
)
from .qspace import HilbertSpace

CSV_HEADER = "n,gab_ratio,g_mhz,t_us,fidelity,tau_ns,trace_drift,min_eig"
TWO_PI = 2.0 * math.pi


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad usage; the convention here is
    # exit 1 for usage errors and 2 for physics-diagnostic failures.
    def error(self, message):
        raise UsageError(message)


def load_config(path: str | None) -> dict:
    """Read and validate a JSON config file; None means all defaults."""
    if path is None:
        return {}
    p = Path(path)
    if not p.exists():
        raise UsageError(f"config file not found: {path}")
    try:
        cfg = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"config file {path} must contain a JSON object")
    unknown = sorted(set(cfg) - {"device", "integrator"})
    if unknown:
        raise ConfigError(f"unknown config sections: {', '.join(unknown)}")
    return cfg


def resolve_config(cfg: dict) -> tuple[DeviceParams, IntegratorConfig, dict]:
    """DeviceParams + IntegratorConfig + a fully-resolved config echo."""
    params = device_params_from_config(cfg.get("device"))
    integ = integrator_config_from_config(cfg.get("integrator"))
    echo = {
        "device": {**DEVICE_CONFIG_DEFAULTS, **cfg.get("device", {})},
        "integrator": {**INTEGRATOR_CONFIG_DEFAULTS, **cfg.get("integrator", {})},
    }
    return params, integ, echo


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def _row_to_csv(row: ResultRow) -> str:
    return ",".join([
        str(row.n),
        _fmt(row.gab_ratio),
        _fmt(row.g / (TWO_PI * 1e6)),
        _fmt(row.t * 1e6),
        _fmt(row.fidelity),
        _fmt(row.tau * 1e9),
        _fmt(row.trace_drift),
        _fmt(row.min_eig),
    ])


def write_csv(rows: list[ResultRow], out_path: str, meta: str) -> None:
    lines = [f"# {meta}", CSV_HEADER]
    lines.extend(_row_to_csv(r) for r in rows)
    failed = [r for r in rows if r.error is not None]
    for r in failed:
        lines.append(f"# error n={r.n} gab_ratio={_fmt(r.gab_ratio)} "
                     f"g_mhz={_fmt(r.g / (TWO_PI * 1e6))}: {r.error}")
    Path(out_path).write_text("\n".join(lines) + "\n")


def _parse_float_list(text: str, flag: str) -> tuple[float, ...]:
    try:
        values = tuple(float(v) for v in text.split(",") if v.strip() != "")
    except ValueError as exc:
        raise UsageError(f"{flag} expects a comma-separated list of numbers") from exc
    if not values:
        raise UsageError(f"{flag} list is empty")
    return values


def cmd_ideal(args) -> int:
    n = args.n
    if n < 1:
        raise UsageError(f"--n must be >= 1, got {n}")
    space = HilbertSpace(n + 2, n + 2)
    psi = ideal_noon_state(n, space)
    print(f"ideal {n}-photon target state (amplitudes, basis |qutrit,n_a,n_b>):")
    _print_ket(psi, space)
    if args.checkpoints:
        for stage, step, point in _checkpoint_order(n):
            psi_c = ideal_intermediate_state(n, space, stage, step, point)
            print(f"after stage {stage} step {step} {point}:")
            _print_ket(psi_c, space)
    return 0


def _checkpoint_order(n: int):
    for j in range(1, n + 1):
        yield 1, j, "swap"
        if j < n:
            yield 1, j, "pulse"
    for j in range(1, n):
        yield 2, j, "swap"
        yield 2, j, "pulse"
    yield 2, n, "pulse"
    yield 2, n, "swap"


def _print_ket(psi: np.ndarray, space: HilbertSpace) -> None:
    for idx in range(space.total_dim):
        amp = psi[idx]
        if abs(amp) > 1e-12:
            print(f"  {space.basis_label(idx)}  {_fmt(amp.real)}  {_fmt(amp.imag)}")


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    params, integ, echo = resolve_config(cfg)
    if args.gab_ratio is not None:
        params = params.with_overrides(gab_ratio=args.gab_ratio)
        echo["device"]["gab_ratio"] = args.gab_ratio
    if args.g_mhz is not None:
        params = params.with_overrides(g=mhz(args.g_mhz))
        echo["device"]["g_mhz"] = args.g_mhz
    n = args.n
    if n < 1:
        raise UsageError(f"--n must be >= 1, got {n}")

    result = run_protocol(n, params, integ, mode=args.mode)
    space = protocol_space(n, params)
    fid = fidelity(result.rho_final, ideal_noon_state(n, space))
    d = derive_couplings(params)
    tau = tau_total(n, d, params)

    doc = {
        "command": "run",
        "n": n,
        "mode": args.mode,
        "config": echo,
        "resolved_rad_s": _resolved_parameters(params, d),
        "schedule": [
            {
                "kind": s.kind,
                "stage": s.stage,
                "step": s.step_index,
                "duration_ns": s.duration * 1e9,
                "n_steps": s.n_steps,
            }
            for s in result.segments
        ],
        "fidelity": fid,
        "tau_ns": tau * 1e9,
        "trace_drift": result.max_trace_drift,
        "min_eig": result.min_eig,
        "top_pop_a": result.max_top_pop_a,
        "top_pop_b": result.max_top_pop_b,
        "wall_time_s": round(result.wall_time, 3),
    }
    problems = result.physicality_problems()
    if problems:
        doc["physicality_problems"] = problems

    text = json.dumps(doc, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    if problems:
        print("physicality check failed: " + "; ".join(problems), file=sys.stderr)
        return 2
    return 0


def _resolved_parameters(params: DeviceParams, d) -> dict:
    out = {
        "omega_a": params.omega_a,
        "omega_b": params.omega_b,
        "delta1": params.delta1,
        "delta2": params.delta2,
        "delta3": params.delta3,
        "delta4": params.delta4,
        "g": params.g,
        "Omega": params.Omega,
        "g_ab": d.g_ab,
        "gamma_phi_f": params.gamma_phi_f,
        "gamma_phi_e": params.gamma_phi_e,
        "gamma_fe": params.gamma_fe,
        "gamma_eg": params.gamma_eg,
        "kappa_a": params.kappa_a,
        "kappa_b": params.kappa_b,
        "t_d": params.t_d,
    }
    out.update({
        "g_fe": d.g_fe,
        "mu_eg": d.mu_eg,
        "mu_fe": d.mu_fe,
        "mut_eg": d.mut_eg,
        "mut_fe": d.mut_fe,
        "Omegat_fe": d.Omegat_fe,
        "Omegat_eg": d.Omegat_eg,
        "delta_eg": d.delta_eg,
        "delta_fe": d.delta_fe,
        "deltat_eg": d.deltat_eg,
        "deltat_fe": d.deltat_fe,
        "Delta": d.Delta,
    })
    return out


def _sweep_spec_common(args, params, integ, **kwargs) -> SweepSpec:
    return SweepSpec(params=params, integrator=integ, workers=args.workers, **kwargs)


def cmd_sweep_n(args) -> int:
    cfg = load_config(args.config)
    params, integ, _ = resolve_config(cfg)
    if args.n_values:
        n_values = tuple(int(v) for v in args.n_values.split(","))
    else:
        n_values = tuple(range(1, args.n_max + 1))
    gab_ratios = _parse_float_list(args.gab_ratios, "--gab-ratios")
    if args.g == "default":
        g_values: str | tuple[float, ...] = "default"
    elif args.g == "optimize":
        rows = []
        for n in sorted(n_values):
            for ratio in sorted(gab_ratios):
                opt = optimize_g(n, (mhz(args.g_min_mhz), mhz(args.g_max_mhz)),
                                 mhz(args.tol_mhz), params, integ, gab_ratio=ratio)
                rows.extend(r for r in sweep_n(_sweep_spec_common(
                    args, params, integ, n_values=(n,), gab_ratios=(ratio,),
                    g_values=(opt.g_opt,))))
        write_csv(rows, args.out, f"sweep-n optimize n={sorted(n_values)} "
                                  f"gab={sorted(gab_ratios)}")
        return 0
    else:
        g_values = tuple(mhz(v) for v in _parse_float_list(args.g, "--g"))
    spec = _sweep_spec_common(args, params, integ, n_values=n_values,
                              gab_ratios=gab_ratios, g_values=g_values)
    table = sweep_n(spec)
    write_csv(list(table), args.out,
              f"sweep-n n={sorted(n_values)} gab={sorted(gab_ratios)} g={args.g}")
    return 0


def cmd_optimize_g(args) -> int:
    cfg = load_config(args.config)
    params, integ, _ = resolve_config(cfg)
    opt = optimize_g(args.n, (mhz(args.g_min_mhz), mhz(args.g_max_mhz)),
                     mhz(args.tol_mhz), params, integ, gab_ratio=args.gab_ratio)
    spec = _sweep_spec_common(args, params, integ, n_values=(args.n,),
                              gab_ratios=(args.gab_ratio if args.gab_ratio is not None
                                          else params.gab_ratio,),
                              g_values=(opt.g_opt,))
    table = sweep_n(spec)
    write_csv(list(table), args.out,
              f"optimize-g n={args.n} bracket_mhz=[{args.g_min_mhz},{args.g_max_mhz}] "
              f"tol_mhz={args.tol_mhz} evals={len(opt.evaluations)}")
    return 0


def cmd_sweep_tg(args) -> int:
    cfg = load_config(args.config)
    params, integ, _ = resolve_config(cfg)
    t_values = tuple(v * 1e-6 for v in _parse_float_list(args.t_us, "--t-us"))
    g_values = tuple(mhz(v) for v in _parse_float_list(args.g_mhz, "--g-mhz"))
    spec = _sweep_spec_common(args, params, integ, n_values=(args.n,),
                              g_values=g_values, t_values=t_values,
                              gab_ratios=(params.gab_ratio,))
    table = sweep_t_g(spec)
    write_csv(list(table), args.out,
              f"sweep-tg n={args.n} t_us={sorted(v * 1e6 for v in t_values)} "
              f"g_mhz={sorted(v / (TWO_PI * 1e6) for v in g_values)}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="noonsim",
                     description="Deterministic simulator of a two-resonator "
                                 "photonic NOON-state protocol")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ideal", help="print the ideal target state")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--checkpoints", action="store_true",
                   help="also print the state after every protocol step")
    p.set_defaults(fn=cmd_ideal)

    p = sub.add_parser("run", help="single protocol run")
    p.add_argument("--config")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--gab-ratio", type=float, default=None)
    p.add_argument("--g-mhz", type=float, default=None)
    p.add_argument("--mode", choices=("full", "ideal"), default="full")
    p.add_argument("--out", default=None, help="result JSON path (default: stdout)")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("sweep-n", help="fidelity vs photon number")
    p.add_argument("--config")
    p.add_argument("--n-max", type=int, default=5)
    p.add_argument("--n-values", default=None, help="comma list, overrides --n-max")
    p.add_argument("--gab-ratios", default="0,1,2")
    p.add_argument("--g", default="default",
                   help="'default', 'optimize', or comma list in MHz")
    p.add_argument("--g-min-mhz", type=float, default=0.5)
    p.add_argument("--g-max-mhz", type=float, default=5.0)
    p.add_argument("--tol-mhz", type=float, default=0.4)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_sweep_n)

    p = sub.add_parser("optimize-g", help="golden-section search for the best g")
    p.add_argument("--config")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--g-min-mhz", type=float, default=0.5)
    p.add_argument("--g-max-mhz", type=float, default=5.0)
    p.add_argument("--tol-mhz", type=float, default=0.4)
    p.add_argument("--gab-ratio", type=float, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_optimize_g)

    p = sub.add_parser("sweep-tg", help="fidelity vs coherence time and coupling")
    p.add_argument("--config")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--t-us", default="3,5,10")
    p.add_argument("--g-mhz", default="1.4,1.8,2.2")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_sweep_tg)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
