"""Source selection, multihop routing, TDMA scheduling, protocol checking.

Delivery of one realization proceeds in stages: every demander either finds
its file in its own cache (self-served), picks a uniform random holder in its
traffic cell (paired), or goes unserved.  Paired demands are routed from the
source's hopping cell horizontally to the destination's column, then
vertically (row-then-column, never leaving the traffic cell).  Hopping cells
are activated once per J slots by a K x K coloring; a cell's transmitter is
its relay (nearest node to the cell center), receivers sit in the next cell
of a real route through it.  Feasibility of every activation set under the
interference model is checkable exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from . import _kernels as kernels
from .config import DerivedScales
from .geometry import CellGrid, NodePlacement, hop_occupancy

STATUS_SELF = 0
STATUS_PAIRED = 1
STATUS_UNSERVED = 2


class RelayVoidError(RuntimeError):
    """A route traverses a hopping cell with no node to relay."""

    def __init__(self, n_cells: int):
        super().__init__(f"{n_cells} loaded hopping cells are empty")
        self.n_cells = n_cells


@dataclass(frozen=True, eq=False)
class SDAssignment:
    """Per-node delivery outcome: self-served, paired with a source, or unserved."""

    status: np.ndarray
    source: np.ndarray
    demands: np.ndarray

    @property
    def n(self) -> int:
        return len(self.status)

    @property
    def n_self(self) -> int:
        return int(np.count_nonzero(self.status == STATUS_SELF))

    @property
    def n_paired(self) -> int:
        return int(np.count_nonzero(self.status == STATUS_PAIRED))

    @property
    def n_unserved(self) -> int:
        return int(np.count_nonzero(self.status == STATUS_UNSERVED))


def select_sources(
    grid: CellGrid,
    cache,
    demands: np.ndarray,
    stream_seed: int,
) -> SDAssignment:
    """Resolve every demand within its traffic cell.

    A node demanding a file it caches is self-served.  Otherwise the source
    is picked uniformly among same-traffic-cell nodes caching the file; the
    pick is a function of (stream_seed, node id), so batching order cannot
    change outcomes.  Nodes with no candidate are recorded unserved.
    """
    files = cache.files
    n, M = files.shape
    m = cache.library_size

    pos = np.sum(files < demands[:, None], axis=1)
    inside = pos < M
    self_served = np.zeros(n, dtype=bool)
    rows = np.flatnonzero(inside)
    self_served[rows] = files[rows, pos[rows]] == demands[rows]

    tc = grid.traffic_id
    entry_keys = np.repeat(tc, M) * m + files.ravel()
    entry_nodes = np.repeat(np.arange(n, dtype=np.int32), M)
    n_buckets = grid.k_c * grid.k_c * m
    order = kernels.stable_order(entry_keys, n_buckets)
    sorted_keys = entry_keys[order]
    sorted_nodes = entry_nodes[order]

    want = np.flatnonzero(~self_served)
    want_keys = tc[want] * m + demands[want]
    src = kernels.pick_sources(
        stream_seed, sorted_keys, sorted_nodes, want_keys, want.astype(np.int64)
    )

    status = np.zeros(n, dtype=np.int8)
    source = np.full(n, -1, dtype=np.int32)
    status[want] = np.where(src >= 0, STATUS_PAIRED, STATUS_UNSERVED)
    source[want] = src
    return SDAssignment(status=status, source=source, demands=demands)


@dataclass(frozen=True, eq=False)
class RoutePlan:
    """Hopping-cell endpoints of every paired demand's row-then-column route."""

    dest: np.ndarray
    src: np.ndarray
    sc: np.ndarray
    sr: np.ndarray
    dc: np.ndarray
    dr: np.ndarray
    side: int

    @property
    def n_routes(self) -> int:
        return len(self.dest)

    def route_cells(self, i: int) -> List[Tuple[int, int]]:
        """Ordered (col, row) hop list of route i, source cell first."""
        sc, sr, dc, dr = int(self.sc[i]), int(self.sr[i]), int(self.dc[i]), int(self.dr[i])
        step = 1 if dc >= sc else -1
        cells = [(c, sr) for c in range(sc, dc + step, step)]
        step = 1 if dr >= sr else -1
        cells += [(dc, r) for r in range(sr + step, dr + step, step)]
        return cells

    def lengths(self) -> np.ndarray:
        """Route lengths in cells (1 for a same-cell direct transmission)."""
        horiz = np.abs(self.dc.astype(np.int64) - self.sc)
        vert = np.abs(self.dr.astype(np.int64) - self.sr)
        return horiz + vert + 1


def build_routes(assignment: SDAssignment, grid: CellGrid) -> RoutePlan:
    """Routes for all paired demands; unserved demands are the caller's concern."""
    dest = np.flatnonzero(assignment.status == STATUS_PAIRED).astype(np.int32)
    src = assignment.source[dest]
    return RoutePlan(
        dest=dest,
        src=src,
        sc=grid.hop_col[src],
        sr=grid.hop_row[src],
        dc=grid.hop_col[dest],
        dr=grid.hop_row[dest],
        side=grid.hop_side_count,
    )


def hopping_loads(plan: RoutePlan) -> np.ndarray:
    """Routes traversing each hopping cell, as an int64 [row, col] table."""
    return kernels.route_loads(
        plan.sc, plan.sr, plan.dc, plan.dr, plan.side, plan.side
    )


def _segment_counts(primary, lo, hi, n_primary, n_secondary):
    """Counts over a grid from per-item ranges: row primary[i], cols lo[i]..hi[i]."""
    w = n_secondary + 1
    size = n_primary * w
    diff = np.bincount(primary * w + lo, minlength=size) - np.bincount(
        primary * w + hi + 1, minlength=size
    )
    return diff.reshape(n_primary, w).cumsum(axis=1)[:, :n_secondary]


def direction_counts(plan: RoutePlan) -> dict:
    """Per-cell counts of routes transmitting east/west/north/south/in-cell.

    Tables are [row, col].  The final cell of a route never transmits for it;
    the corner cell of an L-shaped route transmits vertically.
    """
    side = plan.side
    sc = plan.sc.astype(np.int64)
    sr = plan.sr.astype(np.int64)
    dc = plan.dc.astype(np.int64)
    dr = plan.dr.astype(np.int64)
    zero = np.zeros((side, side), dtype=np.int64)

    out = {}
    e = dc > sc
    out["east"] = _segment_counts(sr[e], sc[e], dc[e] - 1, side, side) if e.any() else zero
    w = dc < sc
    out["west"] = _segment_counts(sr[w], dc[w] + 1, sc[w], side, side) if w.any() else zero
    nmask = dr > sr
    out["north"] = (
        _segment_counts(dc[nmask], sr[nmask], dr[nmask] - 1, side, side).T
        if nmask.any()
        else zero
    )
    smask = dr < sr
    out["south"] = (
        _segment_counts(dc[smask], dr[smask] + 1, sr[smask], side, side).T
        if smask.any()
        else zero
    )
    d = (dc == sc) & (dr == sr)
    if d.any():
        direct = np.bincount(sr[d] * side + sc[d], minlength=side * side)
        out["direct"] = direct.reshape(side, side)
    else:
        out["direct"] = zero
    return out


def cell_relays(placement: NodePlacement, grid: CellGrid) -> tuple:
    """Two designated nodes per hopping cell: nearest and second-nearest to
    the cell center (node-id tie break); -1 where the cell lacks them."""
    n = placement.n
    hc = grid.hop_id
    cx, cy = grid.hop_center(grid.hop_col, grid.hop_row)
    d2 = (placement.x - cx) ** 2 + (placement.y - cy) ** 2
    order = np.lexsort((np.arange(n), d2, hc))
    shc = hc[order]
    first = np.empty(n, dtype=bool)
    first[0] = True
    first[1:] = shc[1:] != shc[:-1]
    second = np.zeros(n, dtype=bool)
    second[1:] = first[:-1] & (shc[1:] == shc[:-1])

    n_cells = grid.hop_side_count ** 2
    relay1 = np.full(n_cells, -1, dtype=np.int64)
    relay2 = np.full(n_cells, -1, dtype=np.int64)
    relay1[shc[first]] = order[first]
    relay2[shc[second]] = order[second]
    return relay1, relay2


@dataclass(frozen=True, eq=False)
class Schedule:
    """K x K cell coloring plus one representative transmission per loaded cell.

    Cell (col, row) owns slot (col % K) * K + (row % K); round-robin among the
    routes sharing a cell divides the cell's W/J aggregate rate evenly, which
    the throughput accounting reflects through the bottleneck load.
    """

    J: int
    K: int
    slot_cells: List[np.ndarray]
    slot_tx: List[np.ndarray]
    slot_rx: List[np.ndarray]

    @property
    def n_transmissions(self) -> int:
        return int(sum(len(c) for c in self.slot_cells))


def check_protocol_model(
    tx_nodes: np.ndarray,
    rx_nodes: np.ndarray,
    placement: NodePlacement,
    r: float,
    delta: float,
) -> Tuple[bool, Optional[Tuple[str, int, int]]]:
    """Verify one activation set against the interference model.

    Every link needs d(tx, rx) <= r and no other active transmitter within
    (1+delta)*r of its receiver.  Returns (ok, None) or (False, violation),
    violation = (kind, link index, offending link index).
    """
    tx = np.asarray(tx_nodes, dtype=np.int64)
    rx = np.asarray(rx_nodes, dtype=np.int64)
    if len(tx) == 0:
        return True, None
    txx, txy = placement.x[tx], placement.y[tx]
    rxx, rxy = placement.x[rx], placement.y[rx]
    link2 = (txx - rxx) ** 2 + (txy - rxy) ** 2
    bad = np.flatnonzero(link2 > r * r)
    if len(bad):
        i = int(bad[0])
        return False, ("range", i, i)
    guard2 = ((1.0 + delta) * r) ** 2
    d2 = (txx[None, :] - rxx[:, None]) ** 2 + (txy[None, :] - rxy[:, None]) ** 2
    np.fill_diagonal(d2, np.inf)
    hits = np.argwhere(d2 <= guard2)
    if len(hits):
        i, j = int(hits[0][0]), int(hits[0][1])
        return False, ("interference", i, j)
    return True, None


def schedule_tdma(
    plan: RoutePlan,
    grid: CellGrid,
    scales: DerivedScales,
    placement: NodePlacement,
    delta: float,
    *,
    check: bool = False,
) -> Tuple[Schedule, np.ndarray]:
    """Build the reuse schedule and the per-cell load table.

    Raises RelayVoidError when a route crosses an empty hopping cell (the
    realization cannot be scheduled; callers record it as a relay-void
    outage).  With check=True every emitted activation set is verified
    against the interference model and must pass.
    """
    loads = hopping_loads(plan)
    occ = hop_occupancy(grid)
    void = (loads > 0) & (occ == 0)
    n_void = int(np.count_nonzero(void))
    if n_void:
        raise RelayVoidError(n_void)

    side = plan.side
    dirs = direction_counts(plan)
    tx_mask = (
        (dirs["east"] > 0)
        | (dirs["west"] > 0)
        | (dirs["north"] > 0)
        | (dirs["south"] > 0)
        | (dirs["direct"] > 0)
    )
    rows, cols = np.nonzero(tx_mask)
    relay1, relay2 = cell_relays(placement, grid)

    # Receiver cell: first true route direction out of the cell, east first.
    rx_col = cols.copy()
    rx_row = rows.copy()
    undecided = np.ones(len(rows), dtype=bool)
    for name, dc_off, dr_off in (
        ("east", 1, 0),
        ("west", -1, 0),
        ("north", 0, 1),
        ("south", 0, -1),
    ):
        take = undecided & (dirs[name][rows, cols] > 0)
        rx_col[take] += dc_off
        rx_row[take] += dr_off
        undecided &= ~take

    cell_ids = rows.astype(np.int64) * side + cols
    rx_ids = rx_row.astype(np.int64) * side + rx_col
    tx_nodes = relay1[cell_ids]
    rx_nodes = np.where(undecided, relay2[cell_ids], relay1[rx_ids])
    if np.any(tx_nodes < 0) or np.any(rx_nodes < 0):
        # Unreachable once the void check passed: direct cells hold both
        # endpoints of their pair, route cells hold at least one node.
        raise RelayVoidError(int(np.count_nonzero(rx_nodes < 0)))

    K = int(round(scales.J ** 0.5))
    slot_of = (cols % K) * K + (rows % K)
    schedule = Schedule(J=scales.J, K=K, slot_cells=[], slot_tx=[], slot_rx=[])
    for s in range(scales.J):
        sel = slot_of == s
        schedule.slot_cells.append(cell_ids[sel])
        schedule.slot_tx.append(tx_nodes[sel])
        schedule.slot_rx.append(rx_nodes[sel])
        if check and np.any(sel):
            ok, violation = check_protocol_model(
                tx_nodes[sel], rx_nodes[sel], placement, scales.r, delta
            )
            if not ok:
                raise AssertionError(f"activation set violates protocol: {violation}")
    return schedule, loads


def deliver_single_hop(assignment: SDAssignment, grid: CellGrid) -> np.ndarray:
    """Paired-demand count per traffic cell ([row, col]); sources transmit
    directly to destinations, so the cell's load is its pair count."""
    dest = np.flatnonzero(assignment.status == STATUS_PAIRED)
    side = grid.k_c
    counts = np.bincount(grid.traffic_id[dest], minlength=side * side)
    return counts.reshape(side, side)


def single_hop_schedule(
    assignment: SDAssignment,
    grid: CellGrid,
    scales: DerivedScales,
    placement: NodePlacement,
    delta: float,
    *,
    check: bool = False,
) -> Tuple[Schedule, np.ndarray]:
    """Reuse schedule over traffic cells; the representative transmission per
    cell is the lowest-id paired demand inside it (actual source to actual
    destination).  The check radius is the traffic-cell diagonal."""
    loads = deliver_single_hop(assignment, grid)
    side = grid.k_c
    dest = np.flatnonzero(assignment.status == STATUS_PAIRED)
    cell_of = grid.traffic_id[dest]
    # dest ascends, so the first occurrence per cell is its lowest-id pair.
    active, first_idx = np.unique(cell_of, return_index=True)
    d_nodes = dest[first_idx]
    s_nodes = assignment.source[d_nodes].astype(np.int64)

    K = int(round(scales.J ** 0.5))
    a_col = active % side
    a_row = active // side
    slot_of = (a_col % K) * K + (a_row % K)
    r_single = np.sqrt(2.0) / side
    schedule = Schedule(J=scales.J, K=K, slot_cells=[], slot_tx=[], slot_rx=[])
    for s in range(scales.J):
        sel = slot_of == s
        schedule.slot_cells.append(active[sel])
        schedule.slot_tx.append(s_nodes[sel])
        schedule.slot_rx.append(d_nodes[sel])
        if check and np.any(sel):
            ok, violation = check_protocol_model(
                s_nodes[sel], d_nodes[sel], placement, r_single, delta
            )
            if not ok:
                raise AssertionError(f"single-hop activation violates protocol: {violation}")
    return schedule, loads


def write_routes_csv(path, plan: RoutePlan) -> None:
    """Debug dump: (demand_id, hop_index, cell_col, cell_row)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["demand_id", "hop_index", "cell_col", "cell_row"])
        for i in range(plan.n_routes):
            for h, (c, r) in enumerate(plan.route_cells(i)):
                w.writerow([int(plan.dest[i]), h, c, r])
