"""Log-domain DPI synapse as an exactly integrated first-order filter.

In its linear regime the circuit obeys

    tau * dI/dt + I = drive,    tau = C * U_T / (kappa * I_tau)

where ``drive`` is ``g_scale * I_w * I_th / I_tau`` while an input pulse
is on and zero otherwise. Between drive changes the solution is a pure
exponential, so every update here is closed form and independent of
step size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class DpiParams:
    C: float = 1e-12
    U_T: float = 0.025
    kappa: float = 0.5
    I_tau: float = 5e-12
    I_th: float = 5e-12
    I_w: float = 1e-9
    t_pulse: float = 10e-6

    def __post_init__(self):
        for name in ("C", "U_T", "I_tau", "I_th", "I_w", "t_pulse"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0.0 < self.kappa <= 1.0:
            raise ValueError(f"kappa must lie in (0, 1], got {self.kappa}")

    @property
    def tau(self) -> float:
        return time_constant(self)

    @property
    def i_steady(self) -> float:
        """Steady-state current for a full-weight input held on."""
        return self.I_w * self.I_th / self.I_tau


@dataclass(frozen=True)
class DpiState:
    i_syn: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        if self.i_syn < 0.0:
            raise ValueError(f"i_syn must be >= 0, got {self.i_syn}")


def time_constant(params: DpiParams) -> float:
    return params.C * params.U_T / (params.kappa * params.I_tau)


def evolve(state: DpiState, params: DpiParams, dt: float, drive: float = 0.0) -> DpiState:
    """Exact solution after ``dt`` seconds under a constant drive current."""
    if dt < 0.0:
        raise ValueError(f"dt must be >= 0, got {dt}")
    if dt == 0.0:
        return state
    a = math.exp(-dt / time_constant(params))
    return DpiState(drive + (state.i_syn - drive) * a, state.t + dt)


def decay(state: DpiState, params: DpiParams, dt: float) -> DpiState:
    return evolve(state, params, dt, 0.0)


def _check_scale(g_scale: float) -> None:
    if not 0.0 <= g_scale <= 1.0:
        raise ValueError(f"g_scale must lie in [0, 1], got {g_scale}")


def on_spike(state: DpiState, params: DpiParams, g_scale: float = 1.0) -> DpiState:
    """Integrate one input pulse of width ``t_pulse`` and weight ``g_scale``."""
    _check_scale(g_scale)
    return evolve(state, params, params.t_pulse, g_scale * params.i_steady)


def _drive_schedule(params: DpiParams, spike_times, weights):
    """Breakpoints and piecewise-constant drive from overlapping pulses.

    Pulses superpose linearly, so overlapping inputs add their drives. Each
    level is summed directly over the active pulses, never accumulated.
    """
    starts = np.asarray(spike_times, dtype=float)
    ends = starts + params.t_pulse
    amps = np.asarray(weights, dtype=float) * params.i_steady
    bp = np.unique(np.concatenate([[0.0], starts, ends]))
    active = (starts[None, :] <= bp[:, None]) & (bp[:, None] < ends[None, :])
    return bp, active.astype(float) @ amps if amps.size else np.zeros_like(bp)


def current_at(
    params: DpiParams,
    spike_times: Sequence[float],
    t: np.ndarray,
    weights: Sequence[float] | None = None,
    i0: float = 0.0,
) -> np.ndarray:
    """Closed-form synaptic current at arbitrary times ``t >= 0``."""
    spike_times = list(spike_times)
    if any(b < a for a, b in zip(spike_times, spike_times[1:])):
        raise ValueError("spike times must be sorted")
    if spike_times and spike_times[0] < 0.0:
        raise ValueError("spike times must be >= 0")
    if weights is None:
        weights = [1.0] * len(spike_times)
    if len(weights) != len(spike_times):
        raise ValueError(f"got {len(weights)} weights for {len(spike_times)} spikes")
    for w in weights:
        _check_scale(w)
    tau = time_constant(params)
    bp, drive = _drive_schedule(params, spike_times, weights)

    # current at each breakpoint, carried forward exactly
    i_bp = np.empty_like(bp)
    i_bp[0] = i0
    for k in range(1, bp.size):
        a = math.exp(-(bp[k] - bp[k - 1]) / tau)
        i_bp[k] = drive[k - 1] + (i_bp[k - 1] - drive[k - 1]) * a

    t = np.asarray(t, dtype=float)
    seg = np.searchsorted(bp, t, side="right") - 1
    seg = np.clip(seg, 0, None)
    return drive[seg] + (i_bp[seg] - drive[seg]) * np.exp(-(t - bp[seg]) / tau)


def epsc_trace(
    params: DpiParams,
    spike_times: Sequence[float],
    horizon: float,
    sample_dt: float,
    weights: Sequence[float] | None = None,
    i0: float = 0.0,
) -> np.ndarray:
    """Sampled synaptic current, columns ``t_s, i_syn_A``.

    Samples fall on ``k * sample_dt`` for ``k = 0 .. floor(horizon / sample_dt)``.
    """
    if sample_dt <= 0.0 or horizon <= 0.0:
        raise ValueError("horizon and sample_dt must be positive")
    if any(t > horizon for t in spike_times):
        raise ValueError("spike times must lie within the horizon")
    n = int(math.floor(horizon / sample_dt + 1e-9)) + 1
    t = np.arange(n) * sample_dt
    return np.column_stack([t, current_at(params, spike_times, t, weights, i0)])

