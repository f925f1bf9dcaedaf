"""One check per headline criterion; each prints a PASS/FAIL line.

The collected lines are repeated in the terminal summary.
"""

import subprocess
import sys
from pathlib import Path

import numpy as np

from memsim.crossbar import HybridSynapseBank, bank_epsc_trace, epsc_vs_resistance
from memsim.device import (
    MemristorParams,
    MemristorState,
    apply_pulse_train,
    hysteresis_area,
    iv_sweep,
    step,
    triangle_wave,
)
from memsim.dpi import DpiParams, DpiState, current_at, decay, time_constant
from memsim.engine import MismatchSpec, draw_population, empirical_cv, population_epsp
from memsim.mesh import BoardSpec, board_traffic, comm_power, max_window_count, per_neuron_share, route_events, uniform_traffic
from memsim.stdp import StdpProbe, stdp_curve, zero_crossings
from oracles import euler_dpi_trace

ROOT = Path(__file__).resolve().parents[1]


def test_aer_arithmetic(criterion):
    spec = BoardSpec()
    e_v = board_traffic(100, 1e8)
    share = per_neuron_share(100, 1e8, 100 * 10**6)
    p = comm_power(spec, 1.0)
    ok = (
        e_v == 4e10
        and share == 400.0
        and np.isclose(p.chip_current, 4e-3, rtol=1e-15, atol=0)
        and np.allclose(p.chip_power, (4e-3, 8e-3), rtol=1e-15, atol=0)
        and np.allclose(p.board_power, (0.4, 0.8), rtol=1e-15, atol=0)
    )
    criterion(
        ok,
        f"E_v={e_v:.6g} eps, share={share:.6g} eps/neuron, I_chip={p.chip_current:.6g} A, "
        f"P_chip={p.chip_power[0]:.3g}-{p.chip_power[1]:.3g} W, P_board={p.board_power[0]:.3g}-{p.board_power[1]:.3g} W",
    )


def test_dpi_exactness(criterion):
    params = DpiParams(C=1e-12, U_T=25e-3, kappa=0.5, I_tau=5e-12)
    tau = time_constant(params)
    t, ref = euler_dpi_trace(params, [0.0], [1.0], 5 * tau)
    sel = slice(0, None, 1000)
    closed = current_at(params, [0.0], t[sel])
    pos = ref[sel] > 0
    err = float(np.max(np.abs(closed[pos] - ref[sel][pos]) / ref[sel][pos]))
    zero_ok = bool(np.all(closed[~pos] == 0.0))

    rng = np.random.default_rng(0)
    semi = 0.0
    for a, b, i0 in zip(rng.uniform(0, 0.1, 2000), rng.uniform(0, 0.1, 2000), rng.uniform(1e-13, 1e-9, 2000)):
        two = decay(decay(DpiState(i0), params, a), params, b).i_syn
        one = decay(DpiState(i0), params, a + b).i_syn
        semi = max(semi, abs(two - one) / one)
    ok = tau == 0.01 and err <= 1e-4 and zero_ok and semi <= 1e-12
    criterion(ok, f"tau={tau!r} s, max rel err vs Euler(tau/1e6)={err:.2e} (<=1e-4), semigroup={semi:.1e} (<=1e-12)")


def test_memristor_properties(criterion):
    p = MemristorParams()
    _, open_rows = iv_sweep(MemristorState(4e-4), p, triangle_wave(3.0, 2, 400), 20e-6 / 400)
    _, flat_rows = iv_sweep(MemristorState(4e-4), p, triangle_wave(1.0, 2, 400), 20e-6 / 400)
    pinched = all(np.all(r[r[:, 1] == 0.0, 2] == 0.0) for r in (open_rows, flat_rows))
    a_open = hysteresis_area(open_rows[:, 1], open_rows[:, 2])
    a_flat = hysteresis_area(flat_rows[:, 1], flat_rows[:, 2])
    # zero to floating point: compared with the v * i scale of the sweep
    flat_scale = np.abs(flat_rows[:, 1]).max() * np.abs(flat_rows[:, 2]).max()

    _, reads = apply_pulse_train(MemristorState(p.g_max), p, -3.0, 1e-6, 4, 0.9)
    staircase = len(reads) >= 4 and all(b > a for a, b in zip(reads, reads[1:]))

    rng = np.random.default_rng(1)
    s, violations = MemristorState(float(rng.uniform(p.g_min, p.g_max))), 0
    for v, dt in zip(rng.uniform(-10, 10, 10**5), 10 ** rng.uniform(-9, -3, 10**5)):
        s = step(s, p, float(v), float(dt))
        violations += not (p.g_min <= s.g <= p.g_max)
    ok = pinched and a_open > 0.0 and a_flat <= 1e-12 * flat_scale and staircase and violations == 0
    criterion(
        ok,
        f"pinched={pinched}, area(3 V)={a_open:.3e}, area(1 V)/scale={a_flat / flat_scale:.1e}, "
        f"staircase R={[round(r, 1) for r in reads]} ohm, bound violations in 1e5 steps={violations}",
    )


def test_stdp_curve(criterion):
    p = MemristorParams()
    probe = StdpProbe()
    coarse = stdp_curve(probe, p)
    fine = stdp_curve(StdpProbe(dt_int=probe.dt_int / 100), p)
    dT, xi = coarse[:, 0], coarse[:, 1]
    reach = max(probe.pre_wave.duration, probe.post_wave.duration)
    outside = np.abs(dT) >= reach
    zero_out = bool(np.all(xi[outside] == 0.0) and np.all(fine[outside, 1] == 0.0))
    crossings = zero_crossings(xi)
    signs = xi[dT > 0].max() > 0 and xi[dT < 0].min() < 0
    nz = fine[:, 1] != 0.0
    err = float(np.max(np.abs(xi[nz] - fine[nz, 1]) / np.abs(fine[nz, 1])))
    same_support = bool(np.array_equal(xi == 0.0, fine[:, 1] == 0.0))
    ok = zero_out and crossings == 1 and signs and err <= 0.01 and same_support
    criterion(ok, f"zero outside |dT|>={reach * 1e6:.1f} us: {zero_out}, crossings={crossings}, max rel err vs dt/100={err:.2e} (<=1e-2)")


def test_hybrid_bank(criterion):
    bank = HybridSynapseBank.from_conductances([1e-3, 5e-4, 2e-4])
    r = np.linspace(1000.0, 7000.0, 13)
    peaks = [pk for _, pk in epsc_vs_resistance(bank, r)]
    decreasing = all(b < a for a, b in zip(peaks, peaks[1:]))
    both = bank_epsc_trace(bank, [(1e-3, 1), (1.004e-3, 2)], 0.05, 1e-5)[:, 1]
    ref = bank_epsc_trace(bank, [(1e-3, 1)], 0.05, 1e-5)[:, 1] + bank_epsc_trace(bank, [(1.004e-3, 2)], 0.05, 1e-5)[:, 1]
    nz = ref > 0
    err = float(np.max(np.abs(both[nz] - ref[nz]) / ref[nz]))
    ok = decreasing and err <= 1e-9 and bool(np.all(both[~nz] == 0.0))
    criterion(ok, f"peak {peaks[0]:.3e} A at 1 kohm -> {peaks[-1]:.3e} A at 7 kohm, strictly decreasing={decreasing}, superposition err={err:.1e} (<=1e-9)")


def test_mesh_simulator(criterion):
    spec = BoardSpec()
    batch = uniform_traffic(spec, 10**6, 0.1, seed=0)
    full = route_events(spec, batch, record_departures=True)
    worst_window = max(max_window_count(d, 1.0) for d in full.departures.values())
    # the run spans well under 1 s, so also check at the per-event service scale
    w = 100 / spec.e_pp
    worst_short = max(max_window_count(d, w) for d in full.departures.values())
    conserved = full.injected == full.delivered + full.in_flight == 10**6
    t_end = float(batch.t[-1])
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        s = route_events(spec, batch, horizon=frac * t_end)
        conserved &= s.injected == s.delivered + s.in_flight
    stable = full.delivered == 10**6 and full.max_link_util < 1.0 and full.max_queue < 50
    ok = conserved and worst_window <= spec.e_pp and worst_short <= 101 and stable
    criterion(
        ok,
        f"conservation at 6 horizons={conserved}, max events/link in 1 s={worst_window} (<=e_pp), in 1 us={worst_short} (<=100+1), "
        f"1e6 events at 10% E_v: max util={full.max_link_util:.3f}, max queue={full.max_queue}",
    )


def test_mismatch(criterion):
    pop = draw_population(DpiParams(), MismatchSpec("I_w", 0.2, 124), seed=0)
    cv = empirical_cv([p.I_w for p in pop])
    same = draw_population(DpiParams(), MismatchSpec("I_w", 0.0, 124), seed=0)
    _, _, std = population_epsp(same, [1e-3], 0.05, 1e-4)
    ok = abs(cv - 0.2) <= 0.02 and bool(np.all(std == 0.0))
    criterion(ok, f"n=124 cv=0.2 -> empirical cv={cv:.4f} (within 10%), cv=0 max std={float(std.max())}")


CLI_RUNS = [
    ["iv-sweep"],
    ["pulse-program"],
    ["epsc", "--spikes", "0.001,0.003"],
    ["stdp-curve"],
    ["crossbar-read"],
    ["write-offset", "--set", "crossbar.rows=32", "--set", "crossbar.cols=32"],
    ["mesh-traffic"],
    ["mesh-sim", "--n-events", "20000"],
    ["mismatch-epsp"],
    ["run", "--config", str(ROOT / "configs" / "feedforward.ini")],
]


def test_determinism(criterion, tmp_path):
    differing = []
    for k, argv in enumerate(CLI_RUNS):
        outs = []
        for rep in range(2):
            out = tmp_path / f"{k}_{rep}"
            cmd = [sys.executable, "-m", "memsim", *argv, "--seed", "11", "--out", str(out)]
            subprocess.run(cmd, check=True, capture_output=True)
            outs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        if not outs[0] or outs[0] != outs[1]:
            differing.append(argv[0])
    criterion(not differing, f"{len(CLI_RUNS)} subcommands run twice with --seed 11, differing outputs: {differing or 'none'}")
