"""Deterministic event-driven composition of neurons, synapse banks,
waveform plasticity and mesh transport, plus device-mismatch populations."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import config as cfgmod
from . import dpi
from .crossbar import HybridSynapseBank
from .device import MemristorParams, MemristorState
from .dpi import DpiParams, DpiState
from .mesh import BoardSpec
from .neuron import IfNeuronParams, NeuronState, SpikeWaveform, membrane_step
from .output import csv_text, json_text, write_text
from .stdp import check_dt, weight_update


class CausalityError(RuntimeError):
    """An event was scheduled before a component's current local time."""


@dataclass(frozen=True)
class NeuronSpec:
    params: IfNeuronParams = field(default_factory=IfNeuronParams)
    post_wave: SpikeWaveform = field(default_factory=SpikeWaveform.biphasic)
    chip: tuple[int, int] = (0, 0)


@dataclass(frozen=True)
class BankSpec:
    target: str
    conductances: tuple[float, ...]
    device: MemristorParams = field(default_factory=MemristorParams)
    dpi: DpiParams = field(default_factory=DpiParams)
    g_ref: float | None = None
    plastic: bool = False
    pre_wave: SpikeWaveform = field(default_factory=SpikeWaveform.biphasic)
    chip: tuple[int, int] = (0, 0)

    def make_bank(self) -> HybridSynapseBank:
        return HybridSynapseBank.from_conductances(
            self.conductances, device=self.device, dpi_params=self.dpi, g_ref=self.g_ref
        )


@dataclass(frozen=True)
class Connection:
    source: str  # neuron id
    bank: str
    branch: int
    delay: float = 0.0


@dataclass(frozen=True)
class Experiment:
    neurons: dict[str, NeuronSpec]
    banks: dict[str, BankSpec]
    duration: float
    connections: tuple[Connection, ...] = ()
    stimulus: tuple[tuple[float, str, int], ...] = ()
    poisson: tuple[tuple[str, int, float], ...] = ()  # (bank, branch, rate_hz)
    dt: float = 10e-6
    seed: int = 0
    record: tuple[str, ...] = ()
    board: BoardSpec | None = None
    stdp_dt: float = 10e-9

    def validate(self) -> None:
        if not self.duration > 0.0:
            raise ValueError("duration must be positive")
        if not self.dt > 0.0:
            raise ValueError("dt must be positive")
        for bid, b in self.banks.items():
            if b.target not in self.neurons:
                raise KeyError(f"bank {bid!r} targets unknown neuron {b.target!r}")
            b.make_bank()
            if b.plastic:
                check_dt(self.stdp_dt, b.pre_wave, self.neurons[b.target].post_wave)

        def check_branch(bank, branch, what):
            if bank not in self.banks:
                raise KeyError(f"{what} refers to unknown bank {bank!r}")
            if not 0 <= branch < len(self.banks[bank].conductances):
                raise KeyError(f"{what} refers to missing branch {branch} of bank {bank!r}")

        for c in self.connections:
            if c.source not in self.neurons:
                raise KeyError(f"connection from unknown neuron {c.source!r}")
            check_branch(c.bank, c.branch, "connection")
            if c.delay < 0.0:
                raise CausalityError(f"connection {c.source}->{c.bank}:{c.branch} has negative delay")
        for t, bank, branch in self.stimulus:
            check_branch(bank, branch, "stimulus")
            if t < 0.0:
                raise CausalityError(f"stimulus spike at t={t} precedes the simulation start")
        for bank, branch, rate in self.poisson:
            check_branch(bank, branch, "poisson stimulus")
            if rate < 0.0:
                raise ValueError("poisson rate must be >= 0")
        for name in self.record:
            kind, _, ident = name.partition(":")
            pool = {"bank": self.banks, "neuron": self.neurons}.get(kind)
            if pool is None or ident not in pool:
                raise KeyError(f"record entry {name!r} refers to no component")


@dataclass
class Results:
    traces: dict[str, np.ndarray]
    spikes: dict[str, list[float]]
    weights: dict[str, list[float]]
    events_processed: int
    seed: int
    duration: float

    def summary(self) -> dict:
        return {
            "seed": self.seed,
            "duration_s": self.duration,
            "events_processed": self.events_processed,
            "spike_counts": {k: len(v) for k, v in self.spikes.items()},
            "final_weights_S": self.weights,
        }

    def files(self) -> dict[str, str]:
        """File name to contents, everything the run emits."""
        out = {}
        for name, arr in self.traces.items():
            kind, _, ident = name.partition(":")
            header = ("t_s", "i_syn_A") if kind == "bank" else ("t_s", "v_V")
            out[f"{kind}_{ident}.csv"] = csv_text(header, arr.tolist())
        rows = sorted((t, n) for n, ts in self.spikes.items() for t in ts)
        out["spikes.csv"] = csv_text(("t_s", "neuron"), rows)
        out["summary.json"] = json_text(self.summary())
        return out

    def write(self, outdir) -> list[Path]:
        return [write_text(Path(outdir) / name, text) for name, text in self.files().items()]


# event kinds; the integer also fixes nothing about ordering, which is by (time, seq)
_PRE, _PULSE_END, _TICK = range(3)


class _BankRuntime:
    def __init__(self, spec: BankSpec):
        self.spec = spec
        self.bank = spec.make_bank()
        self.state = DpiState()
        self.drive = 0.0
        self.active = 0
        self.last_pre: dict[int, float] = {}

    def advance(self, t: float) -> None:
        if t < self.state.t:
            raise CausalityError(f"bank event at t={t} precedes local time {self.state.t}")
        self.state = dpi.evolve(self.state, self.spec.dpi, t - self.state.t, self.drive)


def _hops(a: tuple[int, int], b: tuple[int, int]) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def run(exp: Experiment) -> Results:
    """Process the global event queue up to ``exp.duration``.

    Synapse banks are integrated exactly between events; neurons advance on
    a fixed tick of ``exp.dt``, reading the bank currents at each tick.
    Every queue entry carries a global insertion counter, so simultaneous
    events are handled in insertion order and the run is fully determined
    by the experiment and its seed.
    """
    exp.validate()
    rng = np.random.default_rng(exp.seed)
    banks = {bid: _BankRuntime(spec) for bid, spec in exp.banks.items()}
    neurons = {nid: NeuronState(v=spec.params.v_reset) for nid, spec in exp.neurons.items()}
    last_post: dict[str, float] = {}
    spikes: dict[str, list[float]] = {nid: [] for nid in exp.neurons}
    inputs_of: dict[str, list[str]] = {nid: [] for nid in exp.neurons}
    for bid, spec in exp.banks.items():
        inputs_of[spec.target].append(bid)
    fanout: dict[str, list[Connection]] = {nid: [] for nid in exp.neurons}
    for c in exp.connections:
        fanout[c.source].append(c)

    heap: list = []
    seq = 0

    def push(t, kind, payload):
        nonlocal seq
        heapq.heappush(heap, (t, seq, kind, payload))
        seq += 1

    for t, bank, branch in sorted(exp.stimulus, key=lambda s: s[0]):
        push(t, _PRE, (bank, branch))
    for bank, branch, rate in exp.poisson:
        if rate > 0.0:
            n = rng.poisson(rate * exp.duration)
            for t in np.sort(rng.uniform(0.0, exp.duration, n)):
                push(float(t), _PRE, (bank, branch))
    push(0.0, _TICK, 0)

    recorded = {name: [] for name in exp.record}
    processed = 0

    def plasticity(rt: _BankRuntime, branch: int, t_pre: float, t_post: float) -> None:
        post_wave = exp.neurons[rt.spec.target].post_wave
        delta_t = t_post - t_pre
        if not -post_wave.duration < delta_t < rt.spec.pre_wave.duration:
            return
        old = rt.bank.branches[branch]
        new, _ = weight_update(old, rt.spec.device, rt.spec.pre_wave, post_wave, delta_t, exp.stdp_dt)
        rt.bank = rt.bank.with_branch(branch, new)

    while heap:
        t, _, kind, payload = heapq.heappop(heap)
        if t > exp.duration:
            break
        processed += 1
        if kind == _PRE:
            bid, branch = payload
            rt = banks[bid]
            rt.advance(t)
            amp = rt.bank.g_scale(branch) * rt.spec.dpi.i_steady
            rt.drive += amp
            rt.active += 1
            push(t + rt.spec.dpi.t_pulse, _PULSE_END, (bid, amp))
            if rt.spec.plastic and rt.spec.target in last_post:
                plasticity(rt, branch, t, last_post[rt.spec.target])
            rt.last_pre[branch] = t
        elif kind == _PULSE_END:
            bid, amp = payload
            rt = banks[bid]
            rt.advance(t)
            rt.active -= 1
            rt.drive = rt.drive - amp if rt.active else 0.0
        else:
            k = payload
            for rt in banks.values():
                rt.advance(t)
            if k > 0:
                for nid, spec in exp.neurons.items():
                    i_in = sum(banks[b].state.i_syn for b in inputs_of[nid])
                    neurons[nid], fired = membrane_step(neurons[nid], spec.params, i_in, exp.dt)
                    if not fired:
                        continue
                    spikes[nid].append(t)
                    last_post[nid] = t
                    for b in inputs_of[nid]:
                        rt = banks[b]
                        if rt.spec.plastic:
                            for branch, t_pre in rt.last_pre.items():
                                plasticity(rt, branch, t_pre, t)
                    for c in fanout[nid]:
                        delay = c.delay
                        if exp.board is not None:
                            hops = _hops(spec.chip, exp.banks[c.bank].chip)
                            delay += hops / exp.board.e_pp
                        push(t + delay, _PRE, (c.bank, c.branch))
            for name in exp.record:
                kind_, _, ident = name.partition(":")
                if kind_ == "bank":
                    recorded[name].append((t, banks[ident].state.i_syn))
                else:
                    recorded[name].append((t, neurons[ident].v))
            t_next = (k + 1) * exp.dt
            if t_next <= exp.duration * (1.0 + 1e-12):
                push(t_next, _TICK, k + 1)

    return Results(
        traces={name: np.array(rows, dtype=float).reshape(-1, 2) for name, rows in recorded.items()},
        spikes=spikes,
        weights={bid: [b.g for b in rt.bank.branches] for bid, rt in banks.items()},
        events_processed=processed,
        seed=exp.seed,
        duration=exp.duration,
    )


def _chip(text: str) -> tuple[int, int]:
    r, c = (int(x) for x in text.split(","))
    return r, c


def experiment_from_config(cfg: cfgmod.Config, seed: int | None = None) -> Experiment:
    """Assemble an experiment from ``[experiment]``, ``[neuron.*]``, ``[bank.*]``,
    ``[stimulus]`` and ``[connect]`` sections plus the shared parameter sections."""
    device = cfgmod.device_params(cfg)
    dpi_p = cfgmod.dpi_params(cfg)
    pre_wave, post_wave = cfgmod.waveforms(cfg)
    neurons, banks = {}, {}
    for section in cfg.sections:
        kind, _, ident = section.partition(".")
        if kind == "neuron" and ident:
            chip = cfg.get(section, "chip", _chip, (0, 0))
            neurons[ident] = NeuronSpec(cfgmod.neuron_params(cfg, ident), post_wave, chip)
    for section in cfg.sections:
        kind, _, ident = section.partition(".")
        if kind != "bank" or not ident:
            continue
        target = cfg.get(section, "target")
        if target is None:
            raise cfgmod.ConfigError(f"{section}.target", "missing")
        if target not in neurons:
            raise cfgmod.ConfigError(f"{section}.target", f"unknown neuron {target!r}")
        gs = cfg.get_list(section, "conductances_S", float)
        if not gs:
            raise cfgmod.ConfigError(f"{section}.conductances_S", "missing")
        spec = BankSpec(
            target=target,
            conductances=tuple(gs),
            device=device,
            dpi=dpi_p,
            g_ref=cfg.get(section, "g_ref_S", float),
            plastic=cfg.get(section, "plastic", cfgmod._to_bool, False),
            pre_wave=pre_wave,
            chip=cfg.get(section, "chip", _chip, (0, 0)),
        )
        try:
            spec.make_bank()
        except ValueError as exc:
            raise cfgmod.ConfigError(f"{section}.conductances_S", str(exc)) from None
        banks[ident] = spec

    def parse_items(key, n_fields, conv):
        out = []
        for item in cfg.get_list("stimulus", key, str, []):
            parts = item.split(":")
            if len(parts) != n_fields:
                raise cfgmod.ConfigError(f"stimulus.{key}", f"malformed entry {item!r}")
            try:
                out.append(conv(parts))
            except ValueError as exc:
                raise cfgmod.ConfigError(f"stimulus.{key}", f"malformed entry {item!r} ({exc})") from None
        return tuple(out)

    stimulus = parse_items("spikes", 3, lambda p: (float(p[0]), p[1], int(p[2])))
    poisson = parse_items("poisson", 3, lambda p: (p[0], int(p[1]), float(p[2])))
    connections = []
    for source, raw in cfg.sections.get("connect", {}).items():
        for item in (x.strip() for x in raw.split(",") if x.strip()):
            parts = item.split(":")
            if len(parts) not in (2, 3):
                raise cfgmod.ConfigError(f"connect.{source}", f"malformed entry {item!r}")
            try:
                delay = float(parts[2]) if len(parts) == 3 else 0.0
                connections.append(Connection(source, parts[0], int(parts[1]), delay))
            except ValueError as exc:
                raise cfgmod.ConfigError(f"connect.{source}", f"malformed entry {item!r} ({exc})") from None

    has_board = "board" in cfg.sections
    exp = Experiment(
        neurons=neurons,
        banks=banks,
        duration=cfg.get("experiment", "duration_s", float, 0.1),
        connections=tuple(connections),
        stimulus=stimulus,
        poisson=poisson,
        dt=cfg.get("experiment", "dt_s", float, 10e-6),
        seed=seed if seed is not None else cfg.get("experiment", "seed", int, 0),
        record=tuple(cfg.get_list("experiment", "record", str, [])),
        board=cfgmod.board_spec(cfg) if has_board else None,
        stdp_dt=cfg.get("stdp", "dt_int_s", float, 10e-9),
    )
    try:
        exp.validate()
    except (KeyError, ValueError, CausalityError) as exc:
        msg = exc.args[0] if exc.args else str(exc)
        raise cfgmod.ConfigError("experiment", str(msg)) from None
    return exp


# --- device mismatch --------------------------------------------------------


@dataclass(frozen=True)
class MismatchSpec:
    param: str
    cv: float
    n: int
    distribution: str | None = None  # normal | lognormal; None picks by unit

    def __post_init__(self):
        if self.cv < 0.0:
            raise ValueError("cv must be >= 0")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.distribution not in (None, "normal", "lognormal"):
            raise ValueError(f"unknown distribution {self.distribution!r}")

    def resolved_distribution(self) -> str:
        if self.distribution is not None:
            return self.distribution
        # subthreshold currents are exponential in threshold-voltage mismatch
        return "lognormal" if self.param.startswith(("I_", "i_")) else "normal"


def draw_population(base, spec: MismatchSpec, seed: int) -> list:
    """``spec.n`` copies of ``base`` with one field drawn independently.

    Lognormal draws keep the mean at the base value with the requested
    coefficient of variation. Normal draws that fall outside the parameter
    set's valid domain are redrawn, i.e. the normal is truncated there.
    """
    names = {f.name for f in fields(base)}
    if spec.param not in names:
        raise ValueError(f"unknown parameter {spec.param!r}; expected one of {sorted(names)}")
    mean = float(getattr(base, spec.param))
    if spec.cv == 0.0:
        return [base] * spec.n
    rng = np.random.default_rng(seed)
    if spec.resolved_distribution() == "lognormal":
        if not mean > 0.0:
            raise ValueError("lognormal mismatch needs a positive base value")
        sigma2 = math.log1p(spec.cv**2)
        values = rng.lognormal(math.log(mean) - 0.5 * sigma2, math.sqrt(sigma2), spec.n)
        return [replace(base, **{spec.param: float(v)}) for v in values]
    out = []
    sd = spec.cv * abs(mean)
    for _ in range(spec.n):
        for _attempt in range(1000):
            try:
                out.append(replace(base, **{spec.param: float(rng.normal(mean, sd))}))
                break
            except ValueError:
                continue
        else:
            raise ValueError(f"could not draw a valid {spec.param} within its domain")
    return out


def population_epsp(
    population: Sequence[DpiParams],
    spike_times: Sequence[float],
    horizon: float,
    sample_dt: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pointwise mean and standard deviation of the members' synaptic responses.

    Returns ``(t, mean, std)``. Moments are taken about the first member's
    trace, so a population of identical members has exactly zero spread.
    """
    if not population:
        raise ValueError("population is empty")
    traces = np.array([dpi.epsc_trace(p, spike_times, horizon, sample_dt)[:, 1] for p in population])
    t = dpi.epsc_trace(population[0], spike_times, horizon, sample_dt)[:, 0]
    dev = traces - traces[0]
    m = dev.mean(axis=0)
    var = np.maximum((dev**2).mean(axis=0) - m**2, 0.0)
    return t, traces[0] + m, np.sqrt(var)


def empirical_cv(values: Sequence[float]) -> float:
    v = np.asarray(values, dtype=float)
    return float(v.std(ddof=1) / v.mean())
