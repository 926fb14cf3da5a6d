"""Node placement on the unit square and the nested cell decomposition.

Traffic cells (side count k_c, area ~ n**-eta) are where demanders look for
their source nodes; each traffic cell is subdivided into k_h x k_h hopping
cells (area ~ 2*log(n)/n), the granularity of relaying and TDMA.  Cells are
half-open, so every point belongs to exactly one cell per level, and hopping
cells are nested in traffic cells by construction.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as kernels
from .config import DerivedScales, round_half_up


@dataclass(frozen=True, eq=False)
class NodePlacement:
    x: np.ndarray
    y: np.ndarray

    @property
    def n(self) -> int:
        return len(self.x)


@dataclass(frozen=True, eq=False)
class CellGrid:
    """Cell membership of every node at both levels.

    Hopping-cell coordinates are global: column/row in [0, k_c*k_h).  The
    traffic cell of a node is its hopping cell integer-divided by k_h, which
    makes the nesting invariant structural rather than numeric.
    """

    k_c: int
    k_h: int
    hop_col: np.ndarray
    hop_row: np.ndarray

    @property
    def hop_side_count(self) -> int:
        return self.k_c * self.k_h

    @property
    def hop_side(self) -> float:
        return 1.0 / self.hop_side_count

    @property
    def traffic_side(self) -> float:
        return 1.0 / self.k_c

    @property
    def traffic_col(self) -> np.ndarray:
        return self.hop_col // self.k_h

    @property
    def traffic_row(self) -> np.ndarray:
        return self.hop_row // self.k_h

    @property
    def traffic_id(self) -> np.ndarray:
        return self.traffic_row.astype(np.int64) * self.k_c + self.traffic_col

    @property
    def hop_id(self) -> np.ndarray:
        return self.hop_row.astype(np.int64) * self.hop_side_count + self.hop_col

    def hop_center(self, col, row):
        s = self.hop_side
        return (np.asarray(col) + 0.5) * s, (np.asarray(row) + 0.5) * s


def place_nodes(n: int, stream_seed: int) -> NodePlacement:
    """n i.i.d. uniform points on [0,1)^2, deterministic in stream_seed."""
    if n < 1:
        raise ValueError(f"need at least one node, got n={n}")
    u = kernels.uniform01(stream_seed, 0, 2 * n)
    return NodePlacement(x=u[:n].copy(), y=u[n:].copy())


def hop_side_count(scales: DerivedScales) -> tuple[int, int]:
    """(k_c, k_h) for the nested grids.

    k_c rounds n**(eta/2) to nearest.  k_h ceils traffic_side/sqrt(a_h),
    except that a traffic cell whose side is within sqrt(2.5*a_h) becomes a
    single hopping cell: its diagonal then stays below r = sqrt(5*a_h), so
    in-cell direct hops remain protocol-feasible, whereas forcing a 2x2 split
    would leave hopping cells far below the intended occupancy.
    """
    k_c = max(1, round_half_up(float(scales.n) ** (scales.eta / 2.0)))
    side = 1.0 / k_c
    if side <= math.sqrt(2.5 * scales.a_h):
        k_h = 1
    else:
        k_h = math.ceil(side / math.sqrt(scales.a_h))
    return k_c, k_h


def build_grid(placement: NodePlacement, scales: DerivedScales) -> CellGrid:
    if placement.n != scales.n:
        raise ValueError(f"placement has {placement.n} nodes, scales expect {scales.n}")
    k_c, k_h = hop_side_count(scales)
    count = k_c * k_h
    col = np.minimum((placement.x * count).astype(np.int64), count - 1)
    row = np.minimum((placement.y * count).astype(np.int64), count - 1)
    return CellGrid(
        k_c=k_c,
        k_h=k_h,
        hop_col=col.astype(np.int32),
        hop_row=row.astype(np.int32),
    )


@dataclass(frozen=True)
class OccupancyStats:
    hop_min: int
    hop_max: int
    traffic_min: int
    traffic_max: int


def cell_occupancy_stats(grid: CellGrid) -> OccupancyStats:
    """Exact min/max node counts over all cells (empty cells count as 0)."""
    hop_counts = np.bincount(grid.hop_id, minlength=grid.hop_side_count ** 2)
    tr_counts = np.bincount(grid.traffic_id, minlength=grid.k_c ** 2)
    return OccupancyStats(
        hop_min=int(hop_counts.min()),
        hop_max=int(hop_counts.max()),
        traffic_min=int(tr_counts.min()),
        traffic_max=int(tr_counts.max()),
    )


def hop_occupancy(grid: CellGrid) -> np.ndarray:
    """Node count per hopping cell as an (side, side) table indexed [row, col]."""
    side = grid.hop_side_count
    return np.bincount(grid.hop_id, minlength=side * side).reshape(side, side)


def cells_adjacent(col_a: int, row_a: int, col_b: int, row_b: int) -> bool:
    return abs(col_a - col_b) + abs(row_a - row_b) == 1


def write_placement_csv(path, placement: NodePlacement, grid: CellGrid) -> None:
    """Debug dump: one row per node with both cell memberships."""
    tc = grid.traffic_id
    hc = grid.hop_id
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node_id", "x", "y", "traffic_cell", "hopping_cell"])
        for i in range(placement.n):
            w.writerow(
                [i, repr(float(placement.x[i])), repr(float(placement.y[i])), tc[i], hc[i]]
            )
