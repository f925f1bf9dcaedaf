"""Behavioral model of a voltage-controlled bipolar memristor.

Conductance drifts only while the terminal voltage sits beyond a set or
reset threshold; the drift rate is proportional to the overdrive. A
bistable mode replaces the drift with memoryless stochastic switching
between the two endpoint conductances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

ANALOG = "analog"
BISTABLE = "bistable"


@dataclass(frozen=True)
class MemristorParams:
    g_min: float = 1.0 / 7000.0  # S, HRS end of the analog range
    g_max: float = 1.0 / 1000.0  # S, LRS end
    v_set: float = 1.5
    v_reset: float = -1.5
    k_set: float = 10.0  # S/(V*s)
    k_reset: float = 10.0
    mode: str = ANALOG
    p_rate_set: float = 0.0  # 1/(V*s), bistable only
    p_rate_reset: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.g_min < self.g_max:
            raise ValueError(f"need 0 < g_min < g_max, got {self.g_min}, {self.g_max}")
        if not self.v_set > 0.0 > self.v_reset:
            raise ValueError(f"need v_set > 0 > v_reset, got {self.v_set}, {self.v_reset}")
        for name in ("k_set", "k_reset", "p_rate_set", "p_rate_reset"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0")
        if self.mode not in (ANALOG, BISTABLE):
            raise ValueError(f"mode must be '{ANALOG}' or '{BISTABLE}', got {self.mode!r}")

    def flipped(self) -> "MemristorParams":
        """The same device inserted with its terminals swapped."""
        return replace(
            self,
            v_set=-self.v_reset,
            v_reset=-self.v_set,
            k_set=self.k_reset,
            k_reset=self.k_set,
            p_rate_set=self.p_rate_reset,
            p_rate_reset=self.p_rate_set,
        )


@dataclass(frozen=True)
class MemristorState:
    g: float

    @property
    def resistance(self) -> float:
        return 1.0 / self.g


def conduct(state: MemristorState, v: float) -> float:
    """Instantaneous Ohmic current; zero at zero bias for any state."""
    return state.g * v


def _drift(g: float, params: MemristorParams, v: float, dt: float) -> float:
    if v > params.v_set:
        g = g + params.k_set * (v - params.v_set) * dt
    elif v < params.v_reset:
        g = g + params.k_reset * (v - params.v_reset) * dt
    else:
        return g
    return min(max(g, params.g_min), params.g_max)


def step(state: MemristorState, params: MemristorParams, v: float, dt: float) -> MemristorState:
    """Advance an analog device by ``dt`` seconds at constant voltage ``v``."""
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if params.mode != ANALOG:
        raise ValueError("step() requires an analog-mode device; use stochastic_step()")
    return MemristorState(_drift(state.g, params, v, dt))


def drive(state: MemristorState, params: MemristorParams, voltages: Sequence[float], dt: float) -> MemristorState:
    """Step through a sampled voltage program, one sample per ``dt``.

    Subthreshold samples leave the state untouched, so only the
    suprathreshold ones are visited.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if params.mode != ANALOG:
        raise ValueError("drive() requires an analog-mode device")
    v = np.asarray(voltages, dtype=float)
    active = np.flatnonzero((v > params.v_set) | (v < params.v_reset))
    g = state.g
    for k in active:
        g = _drift(g, params, float(v[k]), dt)
    return MemristorState(g)


def read_resistance(state: MemristorState, params: MemristorParams, v_read: float) -> float:
    _check_read(params, v_read)
    return v_read / conduct(state, v_read)


def _check_read(params: MemristorParams, v_read: float) -> None:
    if v_read == 0.0:
        raise ValueError("v_read must be nonzero")
    if not params.v_reset < v_read < params.v_set:
        raise ValueError(
            f"read voltage {v_read} V is not below the thresholds "
            f"({params.v_reset}, {params.v_set}); the read would be destructive"
        )


def apply_pulse_train(
    state: MemristorState,
    params: MemristorParams,
    amp: float,
    width: float,
    n: int,
    v_read: float = 0.9,
) -> tuple[MemristorState, list[float]]:
    """Apply ``n`` rectangular pulses, reading the resistance after each.

    Returns the final state and the ``n`` resistance readings in ohms.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    _check_read(params, v_read)
    readings = []
    for _ in range(n):
        state = step(state, params, amp, width)
        readings.append(read_resistance(state, params, v_read))
    return state, readings


def triangle_wave(amplitude: float, n_cycles: int, samples_per_cycle: int) -> np.ndarray:
    """Bipolar triangle 0 -> +A -> 0 -> -A -> 0, repeated; exact zeros included."""
    if samples_per_cycle % 4:
        raise ValueError("samples_per_cycle must be a multiple of 4")
    q = samples_per_cycle // 4
    ramp = np.arange(q) / q
    cycle = np.concatenate([ramp, 1.0 - ramp, -ramp, ramp - 1.0]) * amplitude
    return np.concatenate([np.tile(cycle, n_cycles), [0.0]])


def sine_wave(amplitude: float, n_cycles: int, samples_per_cycle: int) -> np.ndarray:
    k = np.arange(n_cycles * samples_per_cycle + 1)
    v = amplitude * np.sin(2.0 * np.pi * k / samples_per_cycle)
    v[k % (samples_per_cycle // 2) == 0] = 0.0
    return v


def iv_sweep(
    state: MemristorState,
    params: MemristorParams,
    drive_v: Sequence[float],
    dt: float,
) -> tuple[MemristorState, np.ndarray]:
    """Sweep the device through a sampled waveform.

    Each sample is read first and then applied for ``dt``. The returned
    trace has columns ``t_s, v_V, i_A, g_S``.
    """
    drive_v = np.asarray(drive_v, dtype=float)
    if drive_v.size == 0:
        raise ValueError("empty drive waveform")
    if dt <= 0.0:
        raise ValueError(f"sample spacing must be positive, got {dt}")
    rows = np.empty((drive_v.size, 4))
    for k, v in enumerate(drive_v):
        rows[k] = (k * dt, v, conduct(state, v), state.g)
        state = step(state, params, float(v), dt)
    return state, rows


def hysteresis_area(v: Iterable[float], i: Iterable[float]) -> float:
    """Total enclosed area of an I-V trace, summing both lobes unsigned.

    The positive and negative lobes of a pinched loop circulate in
    opposite senses, so each lobe is closed at the origin and measured
    separately with the shoelace formula.
    """
    v = np.asarray(list(v), dtype=float)
    i = np.asarray(list(i), dtype=float)
    total = 0.0
    for lobe in (v >= 0.0, v <= 0.0):
        # split each lobe into the contiguous excursions away from zero
        idx = np.flatnonzero(lobe)
        if idx.size < 3:
            continue
        breaks = np.flatnonzero(np.diff(idx) > 1) + 1
        for run in np.split(idx, breaks):
            x, y = v[run], i[run]
            total += 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
    return float(total)


def switch_probability(params: MemristorParams, g: float, v: float, dt: float) -> float:
    if v > params.v_set and g == params.g_min:
        hazard = params.p_rate_set * (v - params.v_set) * dt
    elif v < params.v_reset and g == params.g_max:
        hazard = params.p_rate_reset * (params.v_reset - v) * dt
    else:
        return 0.0
    return -math.expm1(-hazard)


def stochastic_step(
    state: MemristorState,
    params: MemristorParams,
    v: float,
    dt: float,
    rng: np.random.Generator,
) -> MemristorState:
    """One memoryless switching trial of a bistable device.

    One uniform variate is drawn from ``rng`` per call, whether or not a
    switch is possible, so the stream position depends only on the call
    count.
    """
    if params.mode != BISTABLE:
        raise ValueError("stochastic_step() requires a bistable-mode device")
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if state.g not in (params.g_min, params.g_max):
        raise ValueError(f"bistable device must sit at g_min or g_max, got g={state.g}")
    p = switch_probability(params, state.g, v, dt)
    u = rng.random()
    if u < p:
        return MemristorState(params.g_max if state.g == params.g_min else params.g_min)
    return state
