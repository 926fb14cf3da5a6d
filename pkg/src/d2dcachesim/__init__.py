"""Simulator and analysis harness for cache-enabled D2D wireless networks.

Nodes on the unit square cache files from a power-law-sized library, request
files from a popularity distribution, and deliver them over multihop routes
inside traffic cells under the protocol interference model.  The package
measures symmetric throughput and outage across network sizes and checks the
measured scaling exponents against their closed-form counterparts.
"""

from ._kernels import BACKEND
from .analysis import (
    BoundSet,
    ScalingFit,
    analytic_outage_bound,
    chernoff_upper,
    classify_regime,
    fit_scaling,
    heavy_tail_mass,
    theoretical_bounds,
)
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
    Popularity,
    derive_scales,
    explicit_pmf,
    sample_demands,
    uniform_pmf,
    zipf_pmf,
)
from .delivery import (
    RoutePlan,
    Schedule,
    SDAssignment,
    build_routes,
    check_protocol_model,
    deliver_single_hop,
    schedule_tdma,
    select_sources,
)
from .experiment import (
    ExperimentSpec,
    RunSummary,
    emit_plot_data,
    parse_config,
    run_experiment,
    run_trials,
)
from .geometry import (
    CellGrid,
    NodePlacement,
    build_grid,
    cell_occupancy_stats,
    place_nodes,
)
from .metrics import (
    SimResult,
    compute_throughput,
    max_sources_per_node,
    mean_unserved_fraction,
    outage_fraction,
)
from .simulate import SCHEMES, Realization, realize, run_trial

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BoundSet",
    "CachePlacement",
    "CellGrid",
    "ConfigError",
    "DerivedScales",
    "ExperimentSpec",
    "NetworkConfig",
    "NodePlacement",
    "Popularity",
    "Realization",
    "RoutePlan",
    "RunSummary",
    "SCHEMES",
    "Schedule",
    "ScalingFit",
    "SDAssignment",
    "SimResult",
    "analytic_outage_bound",
    "build_grid",
    "build_routes",
    "cell_occupancy_stats",
    "check_protocol_model",
    "chernoff_upper",
    "classify_regime",
    "compute_throughput",
    "deliver_single_hop",
    "derive_scales",
    "emit_plot_data",
    "explicit_pmf",
    "fit_scaling",
    "heavy_tail_mass",
    "max_sources_per_node",
    "mean_unserved_fraction",
    "outage_fraction",
    "parse_config",
    "place_centralized",
    "place_decentralized",
    "place_decentralized_subset",
    "place_nodes",
    "realize",
    "run_experiment",
    "run_trial",
    "run_trials",
    "sample_demands",
    "schedule_tdma",
    "select_sources",
    "theoretical_bounds",
    "uniform_pmf",
    "zipf_pmf",
]
