"""Command-line front end: canned experiments and config-driven runs.

Each subcommand writes plot-ready CSV/JSON into ``--out`` (or prints its
main table to stdout when ``--out`` is omitted). Exit status is 0 on
success, 1 for invalid configuration or arguments that reach the models,
and 2 for usage errors. Seeds resolve as ``--seed``, then the config's
``[experiment] seed``, then the ``MEMSIM_SEED`` environment variable,
then 0.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import crossbar, device, dpi, engine, mesh, stdp
from .config import ConfigError
from .output import csv_text, json_text, write_text


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def resolve_seed(args, cfg: cfgmod.Config) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    if cfg.has("experiment", "seed"):
        return cfg.get("experiment", "seed", int)
    env = os.environ.get("MEMSIM_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError("MEMSIM_SEED", f"not an integer: {env!r}") from None
    return 0


def _emit(args, files: dict[str, str], main: str) -> None:
    if args.out is None:
        sys.stdout.write(files[main])
        return
    for name, text in files.items():
        write_text(Path(args.out) / name, text)


# --- subcommands -------------------------------------------------------------


def cmd_iv_sweep(args, cfg):
    params = cfgmod.device_params(cfg)
    g0 = args.g0 if args.g0 is not None else 0.5 * (params.g_min + params.g_max)
    make = device.triangle_wave if args.shape == "triangle" else device.sine_wave
    wave = make(args.amp, args.cycles, args.samples)
    dt = args.period / args.samples
    final, rows = device.iv_sweep(device.MemristorState(g0), params, wave, dt)
    summary = {
        "loop_area_VA": device.hysteresis_area(rows[:, 1], rows[:, 2]),
        "g_initial_S": g0,
        "g_final_S": final.g,
    }
    files = {
        "iv_sweep.csv": csv_text(("t_s", "v_V", "i_A", "g_S"), rows.tolist()),
        "iv_sweep.json": json_text(summary),
    }
    _emit(args, files, "iv_sweep.csv")


def cmd_pulse_program(args, cfg):
    params = cfgmod.device_params(cfg)
    g0 = args.g0
    if g0 is None:
        # depression starts from LRS, potentiation from HRS
        g0 = params.g_max if args.amp < 0 else params.g_min
    _, readings = device.apply_pulse_train(
        device.MemristorState(g0), params, args.amp, args.width, args.n, args.v_read
    )
    rows = [(k + 1, r) for k, r in enumerate(readings)]
    _emit(args, {"pulse_program.csv": csv_text(("pulse", "resistance_ohm"), rows)}, "pulse_program.csv")


def cmd_epsc(args, cfg):
    params = cfgmod.dpi_params(cfg)
    spikes = _floats(args.spikes)
    horizon = args.horizon if args.horizon is not None else 5.0 * params.tau + (max(spikes) if spikes else 0.0)
    sample_dt = args.sample_dt if args.sample_dt is not None else params.tau / 100.0
    trace = dpi.epsc_trace(params, spikes, horizon, sample_dt, [args.g_scale] * len(spikes))
    _emit(args, {"epsc.csv": csv_text(("t_s", "i_syn_A"), trace.tolist())}, "epsc.csv")


def cmd_stdp_curve(args, cfg):
    params = cfgmod.device_params(cfg)
    pre, post = cfgmod.waveforms(cfg)
    probe = stdp.StdpProbe(
        pre_wave=pre,
        post_wave=post,
        dt_int=cfg.get("stdp", "dt_int_s", float, 10e-9),
        delta_t_grid=cfgmod.delta_t_grid(cfg),
    )
    curve = stdp.stdp_curve(probe, params, cfg.get("stdp", "g_init_S", float))
    _emit(args, {"stdp_curve.csv": csv_text(("delta_t_s", "xi_S"), curve.tolist())}, "stdp_curve.csv")


def cmd_crossbar_read(args, cfg):
    params = cfgmod.device_params(cfg)
    bank = crossbar.HybridSynapseBank.from_conductances(
        [params.g_max], device=params, dpi_params=cfgmod.dpi_params(cfg)
    )
    rows = crossbar.epsc_vs_resistance(bank, _floats(args.r_values))
    _emit(args, {"crossbar_read.csv": csv_text(("r_ohm", "peak_epsc_A"), rows)}, "crossbar_read.csv")


def cmd_write_offset(args, cfg):
    xb = cfgmod.crossbar_config(cfg)
    grid = crossbar.write_offset_map(xb, args.v_applied)
    header = ["row"] + [str(j) for j in range(xb.cols)]
    rows = ([i, *row] for i, row in enumerate(grid.tolist()))
    _emit(args, {"write_offset.csv": csv_text(header, rows)}, "write_offset.csv")


def cmd_mesh_traffic(args, cfg):
    spec = cfgmod.board_spec(cfg)
    if args.n_ch is not None and args.n_ch != spec.n_ch:
        side = int(round(np.sqrt(args.n_ch)))
        dims = (side, side) if side * side == args.n_ch else (1, args.n_ch)
        spec = replace(spec, n_ch=args.n_ch, mesh_dims=dims)
    if args.e_pp is not None:
        spec = replace(spec, e_pp=args.e_pp, edge_port_bw=None)
    power = mesh.comm_power(spec, args.rate)
    out = {
        "n_ch": spec.n_ch,
        "e_pp_eps": spec.e_pp,
        "e_v": mesh.board_traffic(spec.n_ch, spec.e_pp),
        "per_neuron_eps": mesh.per_neuron_share(spec.n_ch, spec.e_pp, spec.neurons_per_board),
        "avg_rate_hz": args.rate,
        "chip_current_A": power.chip_current,
        "chip_power_W": list(power.chip_power),
        "board_power_W": list(power.board_power),
        "mesh_link_capacity_eps": spec.n_mesh_links() * spec.e_pp,
        "edge_aware_capacity_eps": spec.edge_aware_capacity(),
    }
    _emit(args, {"mesh_traffic.json": json_text(out)}, "mesh_traffic.json")


def cmd_mesh_sim(args, cfg):
    spec = cfgmod.board_spec(cfg)
    if args.events:
        events = mesh.read_events_csv(args.events)
    else:
        events = mesh.uniform_traffic(spec, args.n_events, args.load, resolve_seed(args, cfg), args.pattern)
    horizon = args.horizon if args.horizon is not None else float("inf")
    stats = mesh.route_events(spec, events, horizon)
    files = {
        "mesh_stats.json": json_text(stats.to_json()),
        "events.csv": csv_text(mesh.EVENT_HEADER, events.rows()),
    }
    _emit(args, files, "mesh_stats.json")


def cmd_mismatch_epsp(args, cfg):
    base = cfgmod.dpi_params(cfg)
    spec = engine.MismatchSpec(args.param, args.cv, args.n, args.distribution)
    pop = engine.draw_population(base, spec, resolve_seed(args, cfg))
    horizon = args.horizon if args.horizon is not None else 5.0 * base.tau
    sample_dt = args.sample_dt if args.sample_dt is not None else base.tau / 100.0
    t, mean, std = engine.population_epsp(pop, [0.0], horizon, sample_dt)
    values = [getattr(p, args.param) for p in pop]
    summary = {
        "param": args.param,
        "distribution": spec.resolved_distribution(),
        "n": args.n,
        "cv_target": args.cv,
        "cv_empirical": engine.empirical_cv(values) if args.n > 1 else 0.0,
    }
    files = {
        "mismatch_epsp.csv": csv_text(("t_s", "mean_A", "std_A"), zip(t, mean, std)),
        "mismatch_epsp.json": json_text(summary),
    }
    _emit(args, files, "mismatch_epsp.csv")


def cmd_run(args, cfg):
    exp = engine.experiment_from_config(cfg, seed=resolve_seed(args, cfg))
    res = engine.run(exp)
    files = res.files()
    _emit(args, files, "summary.json")


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="sectioned key-value config file (INI syntax)")
    common.add_argument("--out", help="output directory; stdout when omitted")
    common.add_argument("--seed", type=int, help="random seed (overrides config and MEMSIM_SEED)")
    common.add_argument(
        "--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE",
        help="override one config value; repeatable",
    )

    p = argparse.ArgumentParser(prog="memsim", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    s = sub.add_parser("iv-sweep", parents=[common], help="I-V hysteresis sweep of one device")
    s.add_argument("--amp", type=float, default=3.0)
    s.add_argument("--shape", choices=("triangle", "sine"), default="triangle")
    s.add_argument("--cycles", type=int, default=2)
    s.add_argument("--samples", type=int, default=400, help="samples per cycle (multiple of 4)")
    s.add_argument("--period", type=float, default=20e-6, help="cycle period, s")
    s.add_argument("--g0", type=float, help="initial conductance, S")
    s.set_defaults(func=cmd_iv_sweep)

    s = sub.add_parser("pulse-program", parents=[common], help="pulse train with reads after each pulse")
    s.add_argument("--amp", type=float, default=-3.0)
    s.add_argument("--width", type=float, default=1e-6)
    s.add_argument("--n", type=int, default=4)
    s.add_argument("--v-read", type=float, default=0.9)
    s.add_argument("--g0", type=float, help="initial conductance, S")
    s.set_defaults(func=cmd_pulse_program)

    s = sub.add_parser("epsc", parents=[common], help="DPI synaptic current for input spikes")
    s.add_argument("--spikes", default="0", help="comma-separated spike times, s")
    s.add_argument("--g-scale", type=float, default=1.0)
    s.add_argument("--horizon", type=float)
    s.add_argument("--sample-dt", type=float)
    s.set_defaults(func=cmd_epsc)

    s = sub.add_parser("stdp-curve", parents=[common], help="learning window from spike waveforms")
    s.set_defaults(func=cmd_stdp_curve)

    s = sub.add_parser("crossbar-read", parents=[common], help="peak EPSC versus branch resistance")
    s.add_argument("--r-values", default="1000,3000,5000,7000", help="comma-separated resistances, ohm")
    s.set_defaults(func=cmd_crossbar_read)

    s = sub.add_parser("write-offset", parents=[common], help="effective write voltage over the array")
    s.add_argument("--v-applied", type=float, default=3.0)
    s.set_defaults(func=cmd_write_offset)

    s = sub.add_parser("mesh-traffic", parents=[common], help="closed-form board traffic and power")
    s.add_argument("--n-ch", type=int)
    s.add_argument("--e-pp", type=float)
    s.add_argument("--rate", type=float, default=1.0, help="mean firing rate per neuron, Hz")
    s.set_defaults(func=cmd_mesh_traffic)

    s = sub.add_parser("mesh-sim", parents=[common], help="discrete-event mesh routing")
    s.add_argument("--events", help="input event CSV; generated traffic when omitted")
    s.add_argument("--n-events", type=int, default=100_000)
    s.add_argument("--load", type=float, default=0.1, help="fraction of the board's peak traffic")
    s.add_argument("--pattern", choices=("neighbor", "uniform"), default="neighbor")
    s.add_argument("--horizon", type=float)
    s.set_defaults(func=cmd_mesh_sim)

    s = sub.add_parser("mismatch-epsp", parents=[common], help="population EPSC under device mismatch")
    s.add_argument("--param", default="I_w")
    s.add_argument("--cv", type=float, default=0.2)
    s.add_argument("--n", type=int, default=124)
    s.add_argument("--distribution", choices=("normal", "lognormal"))
    s.add_argument("--horizon", type=float)
    s.add_argument("--sample-dt", type=float)
    s.set_defaults(func=cmd_mismatch_epsp)

    s = sub.add_parser("run", parents=[common], help="run a config-described experiment")
    s.set_defaults(func=cmd_run)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = cfgmod.load(args.config, args.overrides)
        args.func(args, cfg)
    except ConfigError as exc:
        print(f"memsim: error: config key {exc.key}: {exc.message}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, IndexError, engine.CausalityError) as exc:
        msg = exc.args[0] if exc.args else str(exc)
        print(f"memsim: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
