"""One-realization pipeline: placement -> caches -> demands -> delivery -> result.

Every trial is reproducible from (master seed, n, trial index) alone; the
scheme only decides which placement policy and delivery variant run on top of
the shared realization, so different schemes at the same seed see identical
node positions, caches, demands, and source picks.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .caching import (
    CachePlacement,
    place_centralized,
    place_decentralized,
    place_decentralized_subset,
)
from .config import (
    ConfigError,
    DerivedScales,
    NetworkConfig,
    derive_scales,
    sample_demands,
    zipf_pmf,
)
from .delivery import (
    SDAssignment,
    build_routes,
    deliver_single_hop,
    hopping_loads,
    schedule_tdma,
    select_sources,
    single_hop_schedule,
)
from .geometry import CellGrid, NodePlacement, build_grid, hop_occupancy, place_nodes
from .metrics import SimResult, compute_throughput
from .rng import (
    STREAM_CACHE,
    STREAM_DEMAND,
    STREAM_PICK,
    STREAM_PLACEMENT,
    child_seed,
    trial_seed,
)

SCHEME_MULTIHOP = "multihop"
SCHEME_SINGLE_HOP = "single-hop"
SCHEME_IMPROVED = "multihop-improved"
SCHEME_CENTRALIZED = "centralized-global"
SCHEMES = (SCHEME_MULTIHOP, SCHEME_SINGLE_HOP, SCHEME_IMPROVED, SCHEME_CENTRALIZED)


def resolve_eta_margin(spec, n: int) -> float:
    """Numeric margin, or the occupancy-pinned schedule for 'auto'.

    'auto' chooses the margin so the expected traffic-cell occupancy equals
    occupancy_target at every n (margin = ln(target)/ln(n)), the finite-size
    stand-in for a vanishing margin.
    """
    margin = spec.eta_margin
    if isinstance(margin, str):
        if margin != "auto":
            raise ConfigError(f"eta_margin must be a number or 'auto', got {margin!r}")
        target = spec.occupancy_target
        if target <= 1 or n <= target:
            raise ConfigError(
                f"auto eta_margin needs 1 < occupancy_target < n, "
                f"got target={target}, n={n}"
            )
        return math.log(target) / math.log(n)
    return float(margin)


def build_scales(spec, n: int) -> DerivedScales:
    """Derived scales for one sweep point under the spec's scheme."""
    cfg = NetworkConfig(
        n=n,
        alpha=spec.alpha,
        beta=spec.beta,
        a1=spec.a1,
        a2=spec.a2,
        W=spec.W,
        delta=spec.delta,
        eta_margin=resolve_eta_margin(spec, n),
        seed=spec.seed,
    )
    if spec.scheme == SCHEME_IMPROVED:
        return derive_scales(cfg, gamma=spec.gamma, eps_c=spec.eps_c)
    if spec.scheme == SCHEME_CENTRALIZED:
        return derive_scales(cfg, eta_override=0.0)
    return derive_scales(cfg)


@dataclass(frozen=True, eq=False)
class Realization:
    """Everything a delivery variant needs from one seeded draw."""

    scales: DerivedScales
    placement: NodePlacement
    grid: CellGrid
    cache: CachePlacement
    demands: np.ndarray
    assignment: SDAssignment


def realize(spec, n: int, trial: int) -> Realization:
    scales = build_scales(spec, n)
    ts = trial_seed(spec.seed, n, trial)
    placement = place_nodes(n, child_seed(ts, STREAM_PLACEMENT))
    grid = build_grid(placement, scales)

    cache_seed = child_seed(ts, STREAM_CACHE)
    if spec.scheme == SCHEME_CENTRALIZED:
        cache = place_centralized(n, scales.M, scales.m, cache_seed)
    elif spec.scheme == SCHEME_IMPROVED:
        cache = place_decentralized_subset(n, scales.M, scales, cache_seed)
    else:
        cache = place_decentralized(n, scales.M, scales.m, cache_seed)

    pop = zipf_pmf(scales.m, spec.gamma if spec.gamma is not None else 0.0)
    demands = sample_demands(pop, n, child_seed(ts, STREAM_DEMAND))
    assignment = select_sources(grid, cache, demands, child_seed(ts, STREAM_PICK))
    return Realization(
        scales=scales,
        placement=placement,
        grid=grid,
        cache=cache,
        demands=demands,
        assignment=assignment,
    )


def run_trial(spec, n: int, trial: int) -> SimResult:
    """Simulate one realization and measure it."""
    t0 = time.perf_counter()
    real = realize(spec, n, trial)
    scales = real.scales
    assignment = real.assignment
    protocol_ok: Optional[bool] = None

    if assignment.n_unserved / n > spec.outage_tol:
        result = compute_throughput(assignment, None, scales, outage_tol=spec.outage_tol)
    elif spec.scheme == SCHEME_SINGLE_HOP:
        if spec.check_protocol:
            _, loads = single_hop_schedule(
                assignment, real.grid, scales, real.placement, spec.delta, check=True
            )
            protocol_ok = True
        else:
            loads = deliver_single_hop(assignment, real.grid)
        result = compute_throughput(assignment, loads, scales, outage_tol=spec.outage_tol)
    else:
        plan = build_routes(assignment, real.grid)
        loads = hopping_loads(plan)
        occ = hop_occupancy(real.grid)
        void = int(np.count_nonzero((loads > 0) & (occ == 0)))
        if void == 0 and spec.check_protocol:
            schedule_tdma(
                plan, real.grid, scales, real.placement, spec.delta, check=True
            )
            protocol_ok = True
        result = compute_throughput(
            assignment, loads, scales, outage_tol=spec.outage_tol, relay_void_cells=void
        )

    runtime_ms = (time.perf_counter() - t0) * 1000.0
    return replace(
        result,
        scheme=spec.scheme,
        trial=trial,
        seed=trial_seed(spec.seed, n, trial),
        protocol_ok=protocol_ok,
        runtime_ms=runtime_ms,
    )
