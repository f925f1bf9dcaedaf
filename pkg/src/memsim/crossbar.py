"""Memristive synapse banks and crossbar write-voltage offsets.

A hybrid bank is a row of N memristive input branches feeding one shared
DPI integrator: each branch's conductance scales the current its input
spike injects, while the temporal dynamics are common to all branches.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import dpi
from .device import MemristorParams, MemristorState, step
from .dpi import DpiParams, DpiState


@dataclass(frozen=True)
class HybridSynapseBank:
    branches: tuple[MemristorState, ...]
    device: MemristorParams = field(default_factory=MemristorParams)
    dpi_params: DpiParams = field(default_factory=DpiParams)
    dpi_state: DpiState = field(default_factory=DpiState)
    g_ref: float | None = None  # defaults to device.g_max

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))
        if self.g_ref is None:
            object.__setattr__(self, "g_ref", self.device.g_max)
        if not self.branches:
            raise ValueError("a bank needs at least one branch")
        if not self.g_ref > 0.0:
            raise ValueError("g_ref must be positive")
        for k, b in enumerate(self.branches):
            if not self.device.g_min <= b.g <= self.device.g_max:
                raise ValueError(f"branch {k} conductance {b.g} S is outside the device bounds")

    @classmethod
    def from_conductances(cls, conductances: Sequence[float], **kw) -> "HybridSynapseBank":
        return cls(tuple(MemristorState(float(g)) for g in conductances), **kw)

    @property
    def n(self) -> int:
        return len(self.branches)

    def g_scale(self, branch_index: int) -> float:
        self._check_index(branch_index)
        return min(max(self.branches[branch_index].g / self.g_ref, 0.0), 1.0)

    def weights(self) -> list[float]:
        return [self.g_scale(k) for k in range(self.n)]

    def _check_index(self, k: int) -> None:
        if not 0 <= k < self.n:
            raise IndexError(f"branch index {k} out of range for a bank of {self.n}")

    def with_branch(self, k: int, state: MemristorState) -> "HybridSynapseBank":
        self._check_index(k)
        branches = list(self.branches)
        branches[k] = state
        return replace(self, branches=tuple(branches))


def on_pre_spike(bank: HybridSynapseBank, branch_index: int) -> HybridSynapseBank:
    """Pulse the shared integrator through one branch."""
    state = dpi.on_spike(bank.dpi_state, bank.dpi_params, bank.g_scale(branch_index))
    return replace(bank, dpi_state=state)


def bank_epsc_trace(
    bank: HybridSynapseBank,
    spikes: Sequence[tuple[float, int]],
    horizon: float,
    sample_dt: float,
) -> np.ndarray:
    """Shared-DPI current for ``(time, branch)`` input spikes; columns ``t_s, i_syn_A``."""
    spikes = sorted(spikes, key=lambda s: s[0])
    times = [t for t, _ in spikes]
    weights = [bank.g_scale(k) for _, k in spikes]
    return dpi.epsc_trace(bank.dpi_params, times, horizon, sample_dt, weights, bank.dpi_state.i_syn)


def epsc_vs_resistance(
    bank: HybridSynapseBank, r_values: Sequence[float], branch_index: int = 0
) -> list[tuple[float, float]]:
    """Peak EPSC from one spike with the chosen branch set to each resistance.

    The sweep places the conductance ``1/r`` directly, as a circuit
    simulation would, so values outside the device's programmable range are
    allowed. The current rises throughout the pulse and decays after it, so
    the peak is the value at the end of the pulse.
    """
    bank._check_index(branch_index)
    out = []
    for r in r_values:
        if not r > 0.0:
            raise ValueError(f"resistance must be positive, got {r}")
        g_scale = min((1.0 / r) / bank.g_ref, 1.0)
        peak = dpi.on_spike(bank.dpi_state, bank.dpi_params, g_scale).i_syn
        out.append((float(r), peak))
    return out


@dataclass(frozen=True)
class CrossbarConfig:
    rows: int = 256
    cols: int = 256
    r_wire: float = 5.0  # ohm per electrode segment
    r_device_nominal: float = 5000.0

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("rows and cols must be >= 1")
        if self.r_wire < 0.0:
            raise ValueError("r_wire must be >= 0")
        if not self.r_device_nominal > 0.0:
            raise ValueError("r_device_nominal must be positive")


def effective_write_voltage(cfg: CrossbarConfig, i: int, j: int, v_applied: float) -> float:
    """Voltage reaching cell (i, j) through the row and column electrodes.

    Lumped series divider: the driver sees ``i + 1`` row segments and
    ``j + 1`` column segments in series with the cell.
    """
    if not (0 <= i < cfg.rows and 0 <= j < cfg.cols):
        raise IndexError(f"cell ({i}, {j}) outside a {cfg.rows}x{cfg.cols} array")
    r_path = (i + 1) * cfg.r_wire + (j + 1) * cfg.r_wire
    return v_applied * cfg.r_device_nominal / (cfg.r_device_nominal + r_path)


def write_offset_map(cfg: CrossbarConfig, v_applied: float) -> np.ndarray:
    """``rows x cols`` grid of effective write voltages."""
    i = np.arange(cfg.rows)[:, None] + 1
    j = np.arange(cfg.cols)[None, :] + 1
    return v_applied * cfg.r_device_nominal / (cfg.r_device_nominal + (i + j) * cfg.r_wire)


def write_cell(
    cfg: CrossbarConfig,
    params: MemristorParams,
    state: MemristorState,
    i: int,
    j: int,
    v_applied: float,
    width: float,
) -> MemristorState:
    """Apply one write pulse to cell (i, j) after the electrode drop."""
    return step(state, params, effective_write_voltage(cfg, i, j, v_applied), width)
