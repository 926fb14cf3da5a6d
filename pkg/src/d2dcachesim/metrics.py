"""Per-realization results: symmetric throughput, outage, diagnostics.

The symmetric throughput of a realization is the rate every served demand can
sustain: the per-cell aggregate rate W/J divided by the bottleneck load (the
busiest cell's route count), which is exactly what round-robin sharing
converges to.  A trial is an outage when a route crosses an empty hopping
cell (relay-void) or when more than `outage_tol` of the demands found no
source in their traffic cell (cache-miss); outage trials report T_n = 0.
Sub-threshold unserved demands are excluded from routing and tracked via
unserved_count / unserved_fraction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

import numpy as np

from .config import DerivedScales
from .delivery import STATUS_PAIRED, SDAssignment

OUTAGE_NONE = "none"
OUTAGE_CACHE_MISS = "cache-miss"
OUTAGE_RELAY_VOID = "relay-void"

DEFAULT_OUTAGE_TOL = 0.5


@dataclass(frozen=True)
class SimResult:
    """One realization's measurements plus sweep metadata."""

    n: int
    t_n: float
    outage_cause: str
    l_max: int
    unserved_count: int
    unserved_fraction: float
    max_sources: int
    n_paired: int
    n_self: int
    relay_void_cells: int = 0
    protocol_ok: Optional[bool] = None
    scheme: str = ""
    trial: int = 0
    seed: int = 0
    runtime_ms: float = 0.0

    @property
    def s_n(self) -> float:
        """Sum throughput n * T_n."""
        return self.n * self.t_n

    @property
    def outage(self) -> bool:
        return self.outage_cause != OUTAGE_NONE


def compute_throughput(
    assignment: SDAssignment,
    loads: Optional[np.ndarray],
    scales: DerivedScales,
    *,
    outage_tol: float = DEFAULT_OUTAGE_TOL,
    relay_void_cells: int = 0,
) -> SimResult:
    """Turn an assignment and a load table into a SimResult.

    `loads` is the hopping-cell table for multihop delivery or the
    traffic-cell table for single-hop; both divide the same W/J aggregate
    rate by their bottleneck entry.  With no transmissions at all (everyone
    self-served) the symmetric rate is capped at W.
    """
    n = assignment.n
    unserved = assignment.n_unserved
    fraction = unserved / n
    l_max = int(loads.max()) if loads is not None and loads.size else 0

    if fraction > outage_tol:
        t_n, cause, l_max = 0.0, OUTAGE_CACHE_MISS, 0
    elif relay_void_cells > 0:
        t_n, cause = 0.0, OUTAGE_RELAY_VOID
    elif l_max > 0:
        t_n, cause = scales.R_agg / l_max, OUTAGE_NONE
    else:
        t_n, cause = scales.R_agg * scales.J, OUTAGE_NONE
    return SimResult(
        n=n,
        t_n=t_n,
        outage_cause=cause,
        l_max=l_max,
        unserved_count=unserved,
        unserved_fraction=fraction,
        max_sources=max_sources_per_node(assignment),
        n_paired=assignment.n_paired,
        n_self=assignment.n_self,
        relay_void_cells=relay_void_cells,
    )


def max_sources_per_node(assignment: SDAssignment) -> int:
    """Largest number of demanders any single node serves as source."""
    chosen = assignment.source[assignment.status == STATUS_PAIRED]
    if len(chosen) == 0:
        return 0
    return int(np.bincount(chosen).max())


def outage_fraction(results: Iterable[SimResult]) -> Tuple[float, float]:
    """(cache-miss outage rate, relay-void outage rate) over trials."""
    results = list(results)
    if not results:
        raise ValueError("need at least one trial")
    misses = sum(1 for r in results if r.outage_cause == OUTAGE_CACHE_MISS)
    voids = sum(1 for r in results if r.outage_cause == OUTAGE_RELAY_VOID)
    return misses / len(results), voids / len(results)


def mean_unserved_fraction(results: Iterable[SimResult]) -> float:
    """Average per-node cache-miss fraction across trials."""
    results = list(results)
    if not results:
        raise ValueError("need at least one trial")
    return float(np.mean([r.unserved_fraction for r in results]))
