"""Sectioned key-value configuration (INI syntax) and parameter builders.

Every key carries its unit in its name. Unknown keys in a known section
are rejected so that typos surface instead of silently falling back to
defaults. Precedence, lowest first: built-in defaults, config file,
``--set section.key=value`` overrides, dedicated command-line flags.

Recognized sections::

    [device]     g_min_S g_max_S v_set_V v_reset_V k_set_SpVs k_reset_SpVs
                 mode p_rate_set p_rate_reset
    [dpi]        C_F U_T_V kappa I_tau_A I_th_A I_w_A t_pulse_s
    [neuron]     c_mem_F i_leak_A v_thresh_V v_reset_V t_refr_s
                 adapt_increment_A tau_adapt_s     (defaults for all neurons)
    [waveform]   pre post v_rest_V                 (t_offset_s:v_V pair lists)
    [stdp]       dt_int_s delta_t_min_s delta_t_max_s delta_t_step_s g_init_S
    [crossbar]   rows cols r_wire_ohm r_device_nominal_ohm
    [board]      n_ch mesh_rows mesh_cols e_pp_eps neurons_per_chip
                 link_current_ref_A rate_ref_eps v_supply_min_V v_supply_max_V
                 edge_port_bw_eps
    [experiment] duration_s dt_s seed record
    [neuron.ID]  any [neuron] key, plus chip = r,c
    [bank.ID]    target conductances_S g_ref_S plastic chip
    [stimulus]   spikes = t_s:bank:branch, ...   poisson = bank:branch:rate_hz, ...
    [connect]    SOURCE_NEURON = bank:branch[:delay_s], ...
"""

from __future__ import annotations

import configparser
from dataclasses import fields
from pathlib import Path
from typing import Callable

import numpy as np

from .device import MemristorParams
from .dpi import DpiParams
from .mesh import BoardSpec
from .neuron import IfNeuronParams, SpikeWaveform
from .crossbar import CrossbarConfig


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending ``section.key``."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key
        self.message = message


DEVICE_KEYS = {
    "g_min_S": ("g_min", float),
    "g_max_S": ("g_max", float),
    "v_set_V": ("v_set", float),
    "v_reset_V": ("v_reset", float),
    "k_set_SpVs": ("k_set", float),
    "k_reset_SpVs": ("k_reset", float),
    "mode": ("mode", str),
    "p_rate_set": ("p_rate_set", float),
    "p_rate_reset": ("p_rate_reset", float),
}
DPI_KEYS = {
    "C_F": ("C", float),
    "U_T_V": ("U_T", float),
    "kappa": ("kappa", float),
    "I_tau_A": ("I_tau", float),
    "I_th_A": ("I_th", float),
    "I_w_A": ("I_w", float),
    "t_pulse_s": ("t_pulse", float),
}
NEURON_KEYS = {
    "c_mem_F": ("c_mem", float),
    "i_leak_A": ("i_leak", float),
    "v_thresh_V": ("v_thresh", float),
    "v_reset_V": ("v_reset", float),
    "t_refr_s": ("t_refr", float),
    "adapt_increment_A": ("adapt_increment", float),
    "tau_adapt_s": ("tau_adapt", float),
}
CROSSBAR_KEYS = {
    "rows": ("rows", int),
    "cols": ("cols", int),
    "r_wire_ohm": ("r_wire", float),
    "r_device_nominal_ohm": ("r_device_nominal", float),
}
SECTION_KEYS = {
    "device": set(DEVICE_KEYS),
    "dpi": set(DPI_KEYS),
    "neuron": set(NEURON_KEYS),
    "crossbar": set(CROSSBAR_KEYS),
    "waveform": {"pre", "post", "v_rest_V"},
    "stdp": {"dt_int_s", "delta_t_min_s", "delta_t_max_s", "delta_t_step_s", "g_init_S"},
    "board": {
        "n_ch", "mesh_rows", "mesh_cols", "e_pp_eps", "neurons_per_chip",
        "link_current_ref_A", "rate_ref_eps", "v_supply_min_V", "v_supply_max_V",
        "edge_port_bw_eps",
    },
    "experiment": {"duration_s", "dt_s", "seed", "record"},
    "stimulus": {"spikes", "poisson"},
}
BANK_KEYS = {"target", "conductances_S", "g_ref_S", "plastic", "chip"}


def _to_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


class Config:
    """Raw string sections with typed, key-naming accessors."""

    def __init__(self, sections: dict[str, dict[str, str]] | None = None):
        self.sections: dict[str, dict[str, str]] = {k: dict(v) for k, v in (sections or {}).items()}
        self.validate()

    @classmethod
    def read(cls, path) -> "Config":
        parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
        parser.optionxform = str  # keys are case-sensitive (C_F, I_w_A)
        try:
            with open(path, encoding="utf-8") as f:
                parser.read_file(f)
        except OSError as exc:
            raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from None
        except configparser.Error as exc:
            raise ConfigError("<file>", str(exc).splitlines()[0]) from None
        return cls({s: dict(parser[s]) for s in parser.sections()})

    def validate(self) -> None:
        for section, values in self.sections.items():
            if section in SECTION_KEYS:
                allowed = SECTION_KEYS[section]
            elif section.startswith("neuron."):
                allowed = set(NEURON_KEYS) | {"chip"}
            elif section.startswith("bank."):
                allowed = BANK_KEYS
            elif section == "connect":
                continue
            else:
                raise ConfigError(section, "unknown section")
            for key in values:
                if key not in allowed:
                    raise ConfigError(f"{section}.{key}", "unknown key")

    def override(self, assignments: list[str]) -> "Config":
        """Apply ``section.key=value`` strings; returns a new config."""
        sections = {k: dict(v) for k, v in self.sections.items()}
        for item in assignments:
            name, eq, value = item.partition("=")
            section, dot, key = name.strip().rpartition(".")
            if not eq or not dot or not section:
                raise ConfigError(name.strip() or item, "override must look like section.key=value")
            sections.setdefault(section, {})[key] = value.strip()
        return Config(sections)

    def has(self, section: str, key: str) -> bool:
        return key in self.sections.get(section, {})

    def get(self, section: str, key: str, convert: Callable = str, default=None):
        raw = self.sections.get(section, {}).get(key)
        if raw is None:
            return default
        try:
            return convert(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{section}.{key}", f"invalid value {raw!r} ({exc})") from None

    def get_list(self, section: str, key: str, convert: Callable = float, default=None):
        raw = self.sections.get(section, {}).get(key)
        if raw is None:
            return default
        items = [x.strip() for x in raw.replace("\n", ",").split(",") if x.strip()]
        try:
            return [convert(x) for x in items]
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{section}.{key}", f"invalid list {raw!r} ({exc})") from None

    def build(self, cls, section: str, table: dict, base=None, fallback_section: str | None = None):
        """Instantiate a params dataclass from a section, naming the key on failure."""
        base = base if base is not None else cls()
        kw = {f.name: getattr(base, f.name) for f in fields(cls)}
        for sec in filter(None, (fallback_section, section)):
            for key, (attr, conv) in table.items():
                if self.has(sec, key):
                    kw[attr] = self.get(sec, key, conv)
        try:
            return cls(**kw)
        except ValueError as exc:
            # attribute the failure to a key the user actually set, when one matches
            msg = str(exc)
            for sec in filter(None, (section, fallback_section)):
                for key, (attr, _) in table.items():
                    if self.has(sec, key) and attr in msg:
                        raise ConfigError(f"{sec}.{key}", msg) from None
            raise ConfigError(section, msg) from None


def device_params(cfg: Config) -> MemristorParams:
    return cfg.build(MemristorParams, "device", DEVICE_KEYS)


def dpi_params(cfg: Config) -> DpiParams:
    return cfg.build(DpiParams, "dpi", DPI_KEYS)


def neuron_params(cfg: Config, neuron_id: str | None = None) -> IfNeuronParams:
    if neuron_id is None:
        return cfg.build(IfNeuronParams, "neuron", NEURON_KEYS)
    return cfg.build(IfNeuronParams, f"neuron.{neuron_id}", NEURON_KEYS, fallback_section="neuron")


def crossbar_config(cfg: Config) -> CrossbarConfig:
    return cfg.build(CrossbarConfig, "crossbar", CROSSBAR_KEYS)


def waveforms(cfg: Config) -> tuple[SpikeWaveform, SpikeWaveform]:
    v_rest = cfg.get("waveform", "v_rest_V", float, 0.0)
    out = []
    for key in ("pre", "post"):
        raw = cfg.get("waveform", key)
        try:
            wave = SpikeWaveform.parse(raw, v_rest) if raw else SpikeWaveform.biphasic(v_rest=v_rest)
        except ValueError as exc:
            raise ConfigError(f"waveform.{key}", str(exc)) from None
        out.append(wave)
    return out[0], out[1]


def board_spec(cfg: Config) -> BoardSpec:
    base = BoardSpec()
    g = lambda key, conv, default: cfg.get("board", key, conv, default)
    n_ch = g("n_ch", int, base.n_ch)
    rows = g("mesh_rows", int, None)
    cols = g("mesh_cols", int, None)
    if rows is None and cols is None:
        side = int(round(np.sqrt(n_ch)))
        rows, cols = (side, side) if side * side == n_ch else (1, n_ch)
    elif rows is None:
        rows = n_ch // cols
    elif cols is None:
        cols = n_ch // rows
    kw = dict(
        n_ch=n_ch,
        mesh_dims=(rows, cols),
        e_pp=g("e_pp_eps", float, base.e_pp),
        neurons_per_chip=g("neurons_per_chip", int, base.neurons_per_chip),
        link_current_ref=g("link_current_ref_A", float, base.link_current_ref),
        rate_ref=g("rate_ref_eps", float, base.rate_ref),
        v_supply=(g("v_supply_min_V", float, base.v_supply[0]), g("v_supply_max_V", float, base.v_supply[1])),
        edge_port_bw=g("edge_port_bw_eps", float, None),
    )
    try:
        return BoardSpec(**kw)
    except ValueError as exc:
        key = "mesh_rows" if "mesh_dims" in str(exc) else "e_pp_eps" if "e_pp" in str(exc) else "n_ch"
        raise ConfigError(f"board.{key}", str(exc)) from None


def delta_t_grid(cfg: Config) -> tuple[float, ...]:
    lo = cfg.get("stdp", "delta_t_min_s", float, -15e-6)
    hi = cfg.get("stdp", "delta_t_max_s", float, 15e-6)
    step = cfg.get("stdp", "delta_t_step_s", float, 0.5e-6)
    if not step > 0.0:
        raise ConfigError("stdp.delta_t_step_s", "must be positive")
    if hi < lo:
        raise ConfigError("stdp.delta_t_max_s", "must be >= delta_t_min_s")
    n = int(round((hi - lo) / step)) + 1
    return tuple(round(lo + k * step, 12) for k in range(n))


def load(path: str | Path | None, overrides: list[str] | None = None) -> Config:
    cfg = Config.read(path) if path else Config()
    return cfg.override(overrides) if overrides else cfg
