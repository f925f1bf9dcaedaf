"""Address-event transport across a board of chips on a 2D mesh.

Two views: closed-form traffic and power budgets for a board, and a
deterministic discrete-event simulator that routes individual address
events hop by hop over bandwidth-limited inter-chip links.
"""

from __future__ import annotations

import csv
import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

# directed link directions out of a chip
NORTH, SOUTH, EAST, WEST = range(4)


@dataclass(frozen=True)
class BoardSpec:
    n_ch: int = 100
    mesh_dims: tuple[int, int] = (10, 10)
    e_pp: float = 1e8  # events/s per inter-chip link
    neurons_per_chip: int = 1_000_000
    link_current_ref: float = 40e-3  # A drawn by one link at rate_ref
    rate_ref: float = 1e7  # events/s
    v_supply: tuple[float, float] = (1.0, 2.0)
    edge_port_bw: float | None = None  # inter-board ports; defaults to e_pp

    def __post_init__(self):
        rows, cols = self.mesh_dims
        if self.n_ch < 1:
            raise ValueError("n_ch must be >= 1")
        if rows * cols != self.n_ch:
            raise ValueError(f"mesh_dims {self.mesh_dims} do not hold n_ch={self.n_ch} chips")
        if not (self.e_pp > 0.0 and self.rate_ref > 0.0):
            raise ValueError("e_pp and rate_ref must be positive")
        if self.edge_port_bw is None:
            object.__setattr__(self, "edge_port_bw", self.e_pp)

    @property
    def rows(self) -> int:
        return self.mesh_dims[0]

    @property
    def cols(self) -> int:
        return self.mesh_dims[1]

    @property
    def neurons_per_board(self) -> int:
        return self.n_ch * self.neurons_per_chip

    def n_mesh_links(self) -> int:
        """Directed chip-to-chip links actually present in the mesh."""
        r, c = self.mesh_dims
        return 2 * (r * (c - 1) + c * (r - 1))

    def n_edge_ports(self) -> int:
        """Link slots on the mesh boundary that face off-board."""
        return 4 * self.n_ch - self.n_mesh_links()

    def edge_aware_capacity(self) -> float:
        """Aggregate link bandwidth with boundary slots as inter-board ports.

        Equals ``board_traffic`` when the ports run at ``e_pp``.
        """
        return self.n_mesh_links() * self.e_pp + self.n_edge_ports() * self.edge_port_bw


def board_traffic(n_ch: int, e_pp: float) -> float:
    """Peak inter-chip event traffic of a board: every chip drives four links."""
    if n_ch < 1 or not e_pp > 0.0:
        raise ValueError("n_ch and e_pp must be positive")
    return 4 * n_ch * e_pp


def per_neuron_share(n_ch: int, e_pp: float, neurons_per_board: int) -> float:
    return board_traffic(n_ch, e_pp) / neurons_per_board


class CommPower(NamedTuple):
    chip_current: float
    chip_power: tuple[float, float]
    board_power: tuple[float, float]


def comm_power(spec: BoardSpec, avg_rate: float) -> CommPower:
    """Communication current and power at a mean firing rate ``avg_rate`` (Hz).

    Link current scales linearly with the chip's event rate from the
    reference operating point; power brackets the supply range.
    """
    if avg_rate < 0.0:
        raise ValueError("avg_rate must be >= 0")
    chip_rate = spec.neurons_per_chip * avg_rate
    current = spec.link_current_ref * chip_rate / spec.rate_ref
    chip = (current * spec.v_supply[0], current * spec.v_supply[1])
    board = (spec.n_ch * chip[0], spec.n_ch * chip[1])
    return CommPower(current, chip, board)


@dataclass(frozen=True)
class AddressEvent:
    t: float
    source_chip: tuple[int, int]
    source_neuron: int
    dest_chip: tuple[int, int]
    dest_neuron: int


EVENT_HEADER = ("t_s", "src_r", "src_c", "src_n", "dst_r", "dst_c", "dst_n")


@dataclass
class EventBatch:
    """Column-oriented address events, the simulator's native input."""

    t: np.ndarray
    src_r: np.ndarray
    src_c: np.ndarray
    src_n: np.ndarray
    dst_r: np.ndarray
    dst_c: np.ndarray
    dst_n: np.ndarray

    def __len__(self) -> int:
        return len(self.t)

    @classmethod
    def from_events(cls, events: Iterable[AddressEvent]) -> "EventBatch":
        events = list(events)
        col = lambda f, dtype: np.array([f(e) for e in events], dtype=dtype)
        return cls(
            col(lambda e: e.t, float),
            col(lambda e: e.source_chip[0], np.int64),
            col(lambda e: e.source_chip[1], np.int64),
            col(lambda e: e.source_neuron, np.int64),
            col(lambda e: e.dest_chip[0], np.int64),
            col(lambda e: e.dest_chip[1], np.int64),
            col(lambda e: e.dest_neuron, np.int64),
        )

    def rows(self):
        for k in range(len(self)):
            yield (
                float(self.t[k]),
                int(self.src_r[k]),
                int(self.src_c[k]),
                int(self.src_n[k]),
                int(self.dst_r[k]),
                int(self.dst_c[k]),
                int(self.dst_n[k]),
            )


def read_events_csv(path) -> EventBatch:
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = tuple(next(reader))
        if header != EVENT_HEADER:
            raise ValueError(f"event CSV header must be {','.join(EVENT_HEADER)}, got {','.join(header)}")
        rows = [r for r in reader if r]
    cols = list(zip(*rows)) if rows else [()] * 7
    return EventBatch(
        np.array(cols[0], dtype=float),
        *(np.array(c, dtype=np.int64) for c in cols[1:]),
    )


def uniform_traffic(
    spec: BoardSpec,
    n_events: int,
    load_fraction: float,
    seed: int,
    pattern: str = "neighbor",
) -> EventBatch:
    """Poisson event stream at ``load_fraction`` of the board's peak traffic.

    ``pattern="neighbor"`` sends each event to a uniformly chosen adjacent
    chip, the traffic model behind ``board_traffic``. ``"uniform"`` picks
    any other chip; under dimension-order routing on a 10x10 board its
    busiest links saturate at about 9.9% of the peak traffic.
    """
    rng = np.random.default_rng(seed)
    rate = load_fraction * board_traffic(spec.n_ch, spec.e_pp)
    t = np.cumsum(rng.exponential(1.0 / rate, n_events))
    rows, cols = spec.mesh_dims
    chip = rng.integers(0, spec.n_ch, n_events)
    sr, sc = chip // cols, chip % cols
    if pattern == "neighbor":
        if spec.n_ch == 1:
            raise ValueError("neighbor traffic needs at least two chips")
        offsets = np.array([(-1, 0), (1, 0), (0, 1), (0, -1)])
        dr = np.empty(n_events, dtype=np.int64)
        dc = np.empty(n_events, dtype=np.int64)
        # draw among the neighbors that exist; resample the rest
        pending = np.arange(n_events)
        while pending.size:
            pick = offsets[rng.integers(0, 4, pending.size)]
            r = sr[pending] + pick[:, 0]
            c = sc[pending] + pick[:, 1]
            ok = (r >= 0) & (r < rows) & (c >= 0) & (c < cols)
            dr[pending[ok]] = r[ok]
            dc[pending[ok]] = c[ok]
            pending = pending[~ok]
    elif pattern == "uniform":
        other = rng.integers(0, spec.n_ch - 1, n_events)
        dest = np.where(other >= chip, other + 1, other)
        dr, dc = dest // cols, dest % cols
    else:
        raise ValueError(f"unknown traffic pattern {pattern!r}")
    src_n = rng.integers(0, spec.neurons_per_chip, n_events)
    dst_n = rng.integers(0, spec.neurons_per_chip, n_events)
    return EventBatch(t, sr, sc, src_n, dr, dc, dst_n)


@dataclass
class MeshStats:
    injected: int
    delivered: int
    in_flight: int
    mean_latency_s: float
    max_latency_s: float
    max_link_util: float
    max_queue: int
    link_counts: np.ndarray = field(repr=False)
    link_util: np.ndarray = field(repr=False)
    horizon: float = math.inf
    departures: dict[int, list[float]] | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        return {
            "delivered": self.delivered,
            "max_link_util": self.max_link_util,
            "mean_latency_s": self.mean_latency_s,
            "max_queue": self.max_queue,
            "injected": self.injected,
            "in_flight": self.in_flight,
            "max_latency_s": self.max_latency_s,
        }


def link_id(cols: int, r: int, c: int, direction: int) -> int:
    return (r * cols + c) * 4 + direction


def next_hop(r: int, c: int, dr: int, dc: int) -> tuple[int, int, int]:
    """Dimension-order step: resolve the row first, then the column."""
    if r < dr:
        return SOUTH, r + 1, c
    if r > dr:
        return NORTH, r - 1, c
    if c < dc:
        return EAST, r, c + 1
    return WEST, r, c - 1


def _check_batch(spec: BoardSpec, ev: EventBatch) -> None:
    rows, cols = spec.mesh_dims
    for name, bound in (("src_r", rows), ("src_c", cols), ("dst_r", rows), ("dst_c", cols)):
        a = getattr(ev, name)
        bad = np.flatnonzero((a < 0) | (a >= bound))
        if bad.size:
            k = int(bad[0])
            raise ValueError(f"event {k} has {name}={int(a[k])} outside the {rows}x{cols} mesh")
    if len(ev) > 1 and np.any(np.diff(ev.t) < 0.0):
        raise ValueError("events must be sorted by time")


def route_events(
    spec: BoardSpec,
    events: EventBatch | Sequence[AddressEvent],
    horizon: float = math.inf,
    record_departures: bool = False,
) -> MeshStats:
    """Route events hop by hop until ``horizon``.

    Each directed link is a FIFO server releasing one event every
    ``1 / e_pp`` seconds, i.e. a token bucket of depth one at rate
    ``e_pp``. Wires add no delay, so an uncontended ``k``-hop event
    arrives ``k / e_pp`` after injection. Simultaneous happenings are
    ordered by ``(time, sequence)`` with injections numbered first.
    """
    ev = events if isinstance(events, EventBatch) else EventBatch.from_events(events)
    _check_batch(spec, ev)
    rows, cols = spec.mesh_dims
    service = 1.0 / spec.e_pp
    n = len(ev)
    n_links = 4 * spec.n_ch

    t_inj = ev.t.tolist()
    dst_r, dst_c = ev.dst_r.tolist(), ev.dst_c.tolist()
    free = [0.0] * n_links
    count = [0] * n_links
    backlog: list[deque] = [deque() for _ in range(n_links)]
    departures: dict[int, list[float]] | None = {} if record_departures else None

    heap: list[tuple[float, int, int, int, int]] = []
    seq = n
    nxt = 0
    delivered = 0
    lat_sum = 0.0
    lat_max = 0.0
    max_queue = 0
    src_r, src_c = ev.src_r.tolist(), ev.src_c.tolist()

    while True:
        if nxt < n and (not heap or (t_inj[nxt], nxt) < heap[0][:2]):
            now, k, r, c = t_inj[nxt], nxt, src_r[nxt], src_c[nxt]
            if now > horizon:
                break
            nxt += 1
        elif heap:
            if heap[0][0] > horizon:
                break
            now, _, k, r, c = heapq.heappop(heap)
        else:
            break

        dr, dc = dst_r[k], dst_c[k]
        if r == dr and c == dc:
            delivered += 1
            lat = now - t_inj[k]
            lat_sum += lat
            if lat > lat_max:
                lat_max = lat
            continue

        d, r2, c2 = next_hop(r, c, dr, dc)
        link = (r * cols + c) * 4 + d
        q = backlog[link]
        while q and q[0] <= now:
            q.popleft()
        start = free[link] if free[link] > now else now
        dep = start + service
        free[link] = dep
        q.append(dep)
        if len(q) > max_queue:
            max_queue = len(q)
        count[link] += 1
        if departures is not None:
            departures.setdefault(link, []).append(dep)
        heapq.heappush(heap, (dep, seq, k, r2, c2))
        seq += 1

    injected = nxt
    # counted from the link buffers, independently of the event heap
    cut = horizon if math.isfinite(horizon) else math.inf
    in_flight = sum(sum(1 for d in q if d > cut) for q in backlog)

    counts = np.array(count, dtype=np.int64)
    if injected:
        t0 = t_inj[0]
        t_end = max(max(free), t_inj[injected - 1])
        if math.isfinite(horizon):
            t_end = min(t_end, horizon)
        span = max(t_end - t0, service)
        busy = counts * service
        if math.isfinite(horizon):
            # only the part of each link's service that precedes the horizon
            busy = busy - np.clip(np.array(free) - horizon, 0.0, None)
        util = busy / span
    else:
        util = np.zeros(n_links)

    return MeshStats(
        injected=injected,
        delivered=delivered,
        in_flight=in_flight,
        mean_latency_s=lat_sum / delivered if delivered else 0.0,
        max_latency_s=lat_max,
        max_link_util=float(util.max()) if util.size else 0.0,
        max_queue=max_queue,
        link_counts=counts,
        link_util=util,
        horizon=float(horizon),
        departures=departures,
    )


def max_window_count(times: Sequence[float], window: float) -> int:
    """Largest number of timestamps inside any half-open window of the given length."""
    t = np.sort(np.asarray(times, dtype=float))
    if t.size == 0:
        return 0
    ends = np.searchsorted(t, t + window, side="left")
    return int((ends - np.arange(t.size)).max())
