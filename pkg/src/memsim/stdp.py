"""STDP from superposed spike waveforms across a memristor.

The pre-synaptic neuron drives one terminal and the post-synaptic neuron
the other. Alone, neither waveform reaches a device threshold; when the
two overlap, their difference can, and the resulting drift is the weight
update. Sweeping the spike-time offset traces out the learning window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .device import MemristorParams, MemristorState, drive
from .neuron import SpikeWaveform, waveform_voltage


@dataclass(frozen=True)
class StdpProbe:
    pre_wave: SpikeWaveform = field(default_factory=SpikeWaveform.biphasic)
    post_wave: SpikeWaveform = field(default_factory=SpikeWaveform.biphasic)
    dt_int: float = 10e-9
    delta_t_grid: tuple[float, ...] = tuple(np.round(np.arange(-15.0, 15.5, 0.5), 6) * 1e-6)

    def __post_init__(self):
        object.__setattr__(self, "delta_t_grid", tuple(float(x) for x in self.delta_t_grid))
        if not self.delta_t_grid:
            raise ValueError("delta_t_grid must be nonempty")
        check_dt(self.dt_int, self.pre_wave, self.post_wave)


def check_dt(dt_int: float, pre_wave: SpikeWaveform, post_wave: SpikeWaveform) -> None:
    shortest = min(pre_wave.shortest_segment, post_wave.shortest_segment)
    # small slack for dt values written as decimal fractions of the segment
    if not 0.0 < dt_int <= shortest / 10.0 * (1.0 + 1e-9):
        raise ValueError(
            f"dt_int must be positive and at most a tenth of the shortest waveform "
            f"segment ({shortest / 10.0:g} s), got {dt_int:g}"
        )


def pair_voltage(pre_wave: SpikeWaveform, post_wave: SpikeWaveform, delta_t: float, t):
    """Voltage across the device, post terminal minus pre terminal.

    The pre spike fires at ``t = 0`` and the post spike at ``t = delta_t``.
    """
    return waveform_voltage(post_wave, np.asarray(t) - delta_t) - waveform_voltage(pre_wave, t)


def overlap_window(pre_wave: SpikeWaveform, post_wave: SpikeWaveform, delta_t: float) -> tuple[float, float]:
    """Union of both waveform supports for a given offset."""
    return min(0.0, delta_t), max(pre_wave.duration, delta_t + post_wave.duration)


def weight_update(
    mem_state: MemristorState,
    mem_params: MemristorParams,
    pre_wave: SpikeWaveform,
    post_wave: SpikeWaveform,
    delta_t: float,
    dt_int: float,
) -> tuple[MemristorState, float]:
    """Drift the device under one spike pair; returns the new state and the
    net conductance change.

    Fixed-step explicit integration with the voltage sampled at each step
    midpoint, over the union of both waveform supports.
    """
    check_dt(dt_int, pre_wave, post_wave)
    t0, t1 = overlap_window(pre_wave, post_wave, delta_t)
    n = max(1, int(math.ceil((t1 - t0) / dt_int - 1e-9)))
    t = t0 + (np.arange(n) + 0.5) * dt_int
    v = pair_voltage(pre_wave, post_wave, delta_t, t)
    new = drive(mem_state, mem_params, v, dt_int)
    return new, new.g - mem_state.g


def stdp_curve(
    probe: StdpProbe,
    mem_params: MemristorParams,
    g_init: float | None = None,
) -> np.ndarray:
    """Learning window: columns ``delta_t_s, xi_S``.

    Each grid point starts from the same fresh device so the curve reflects
    the update rule rather than accumulated history.
    """
    if g_init is None:
        g_init = 0.5 * (mem_params.g_min + mem_params.g_max)
    start = MemristorState(g_init)
    xi = [
        weight_update(start, mem_params, probe.pre_wave, probe.post_wave, dT, probe.dt_int)[1]
        for dT in probe.delta_t_grid
    ]
    return np.column_stack([np.array(probe.delta_t_grid), np.array(xi)])


def zero_crossings(xi: Sequence[float]) -> int:
    """Number of sign changes in a curve, ignoring exact zeros."""
    s = np.sign(np.asarray(xi))
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))
