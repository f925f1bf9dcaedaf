"""Integrate-and-fire neuron with spike-triggered adaptation, and the
shaped voltage waveforms it forces on its terminals while spiking."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class IfNeuronParams:
    c_mem: float = 1e-12
    i_leak: float = 1e-12
    v_thresh: float = 0.5
    v_reset: float = 0.0
    t_refr: float = 1e-3
    adapt_increment: float = 0.0  # A; 0 disables adaptation
    tau_adapt: float = 50e-3

    def __post_init__(self):
        if not self.v_thresh > self.v_reset:
            raise ValueError("v_thresh must exceed v_reset")
        if not (self.c_mem > 0.0 and self.t_refr > 0.0 and self.tau_adapt > 0.0):
            raise ValueError("c_mem, t_refr and tau_adapt must be positive")
        if self.i_leak < 0.0 or self.adapt_increment < 0.0:
            raise ValueError("i_leak and adapt_increment must be >= 0")


@dataclass(frozen=True)
class NeuronState:
    v: float = 0.0
    i_adapt: float = 0.0
    refr_left: float = 0.0


def membrane_step(
    state: NeuronState, params: IfNeuronParams, i_in: float, dt: float
) -> tuple[NeuronState, bool]:
    """Forward-Euler membrane update over ``dt``.

    The leak is a constant current sink, so the membrane is floored at
    ``v_reset``. Input is ignored while the refractory clock runs.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    i_adapt = state.i_adapt * math.exp(-dt / params.tau_adapt)
    if state.refr_left > 0.0:
        return NeuronState(state.v, i_adapt, max(state.refr_left - dt, 0.0)), False

    v = state.v + dt * (i_in - params.i_leak - state.i_adapt) / params.c_mem
    v = max(v, params.v_reset)
    if v >= params.v_thresh:
        return NeuronState(params.v_reset, i_adapt + params.adapt_increment, params.t_refr), True
    return NeuronState(v, i_adapt, 0.0), False


def simulate_constant(params: IfNeuronParams, i_in: float, duration: float, dt: float) -> list[float]:
    """Spike times of a neuron driven by a constant current from rest."""
    state = NeuronState(v=params.v_reset)
    spikes = []
    for k in range(int(round(duration / dt))):
        state, fired = membrane_step(state, params, i_in, dt)
        if fired:
            spikes.append((k + 1) * dt)
    return spikes


@dataclass(frozen=True)
class SpikeWaveform:
    breakpoints: tuple[tuple[float, float], ...]
    v_rest: float = 0.0

    def __post_init__(self):
        bps = tuple((float(t), float(v)) for t, v in self.breakpoints)
        object.__setattr__(self, "breakpoints", bps)
        if len(bps) < 2:
            raise ValueError("a waveform needs at least two breakpoints")
        if bps[0][0] != 0.0:
            raise ValueError("the first breakpoint must sit at t_offset = 0")
        if any(b[0] <= a[0] for a, b in zip(bps, bps[1:])):
            raise ValueError("breakpoint offsets must be strictly increasing")
        if bps[-1][1] != self.v_rest:
            raise ValueError("the waveform must return to v_rest at its last breakpoint")

    @property
    def duration(self) -> float:
        return self.breakpoints[-1][0]

    @property
    def offsets(self) -> np.ndarray:
        return np.array([t for t, _ in self.breakpoints])

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.breakpoints])

    @property
    def shortest_segment(self) -> float:
        return float(np.diff(self.offsets).min())

    @property
    def peak_excursion(self) -> float:
        return float(np.abs(self.values - self.v_rest).max())

    @classmethod
    def biphasic(
        cls,
        v_pulse: float = 1.2,
        t_pulse: float = 1e-6,
        v_tail: float = -0.6,
        t_tail: float = 10e-6,
        t_edge: float = 0.1e-6,
        v_rest: float = 0.0,
    ) -> "SpikeWaveform":
        """Short positive pulse followed by a longer negative tail that
        relaxes linearly back to rest. ``t_edge`` is the rise/fall time."""
        return cls(
            (
                (0.0, v_rest),
                (t_edge, v_rest + v_pulse),
                (t_pulse, v_rest + v_pulse),
                (t_pulse + t_edge, v_rest + v_tail),
                (t_pulse + t_edge + t_tail, v_rest),
            ),
            v_rest,
        )

    @classmethod
    def parse(cls, text: str, v_rest: float = 0.0) -> "SpikeWaveform":
        """Parse ``"t0:v0, t1:v1, ..."`` pairs (seconds, volts)."""
        pairs = []
        for item in text.replace("\n", ",").split(","):
            item = item.strip()
            if not item:
                continue
            t, _, v = item.partition(":")
            if not _:
                raise ValueError(f"malformed waveform breakpoint {item!r}, expected t_offset_s:v_V")
            pairs.append((float(t), float(v)))
        return cls(tuple(pairs), v_rest)

    def format(self) -> str:
        return ", ".join(f"{t!r}:{v!r}" for t, v in self.breakpoints)


def waveform_voltage(wave: SpikeWaveform, t_since_spike):
    """Terminal voltage ``t_since_spike`` seconds after the spike onset.

    Accepts scalars or arrays; outside the template support the neuron
    holds its rest voltage.
    """
    t = np.asarray(t_since_spike, dtype=float)
    v = np.interp(t, wave.offsets, wave.values)
    v = np.where((t < 0.0) | (t > wave.duration), wave.v_rest, v)
    return float(v) if v.ndim == 0 else v


def spike_voltage_trace(wave: SpikeWaveform, spike_times: Sequence[float], t: np.ndarray) -> np.ndarray:
    """Terminal voltage of a neuron firing at ``spike_times``.

    Templates of successive spikes never overlap in practice (the
    refractory period is far longer than a waveform); where they would,
    the most recent spike wins.
    """
    t = np.asarray(t, dtype=float)
    v = np.full_like(t, wave.v_rest)
    for ts in sorted(spike_times):
        inside = (t >= ts) & (t <= ts + wave.duration)
        v[inside] = waveform_voltage(wave, t[inside] - ts)
    return v
