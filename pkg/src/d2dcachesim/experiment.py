"""Experiment sweeps: config files, parallel seeded trials, CSV artifacts.

A run executes `trials` independent realizations at every n in `n_grid`,
fits the throughput scaling exponent over outage-free trials, and compares
it against the closed-form exponent for the scheme.  Results are bytewise
deterministic in (config, seed) regardless of worker count; wall-clock
timings go to a separate file so results.csv stays reproducible.
"""

from __future__ import annotations

import csv
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .analysis import ScalingFit, fit_scaling, theoretical_bounds
from .config import ConfigError
from .metrics import OUTAGE_NONE, SimResult, mean_unserved_fraction, outage_fraction
from .simulate import (
    SCHEME_CENTRALIZED,
    SCHEME_IMPROVED,
    SCHEMES,
    build_scales,
    run_trial,
)

RESULTS_NAME = "results.csv"
TIMINGS_NAME = "timings.csv"
SUMMARY_NAME = "summary.csv"

RESULT_COLUMNS = [
    "n",
    "scheme",
    "trial",
    "seed",
    "t_n",
    "s_n",
    "l_max",
    "outage_cause",
    "max_sources",
    "unserved_count",
    "unserved_fraction",
    "n_paired",
    "n_self",
    "relay_void_cells",
    "protocol_ok",
]


class ConfigFileError(ConfigError):
    """Config file problem, annotated with line and field."""

    def __init__(self, message: str, line: Optional[int] = None, field_name: str = ""):
        where = f"line {line}" if line is not None else "file"
        label = f" ({field_name})" if field_name else ""
        super().__init__(f"{where}{label}: {message}")
        self.line = line
        self.field_name = field_name


@dataclass(frozen=True)
class ExperimentSpec:
    """One sweep: a scheme over an n-grid with shared network parameters."""

    n_grid: Tuple[int, ...]
    scheme: str
    trials: int
    alpha: float
    beta: float
    a1: float
    a2: float
    gamma: Optional[float] = None
    eps_c: Optional[float] = None
    W: float = 1.0
    delta: float = 1.0
    eta_margin: Union[float, str] = 0.05
    occupancy_target: float = 30.0
    seed: int = 0
    outage_tol: float = 0.5
    check_protocol: bool = True

    def __post_init__(self) -> None:
        if not self.n_grid:
            raise ConfigError("n_grid must not be empty")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ConfigError(f"n_grid must be strictly increasing, got {self.n_grid}")
        if any(n < 1 for n in self.n_grid):
            raise ConfigError("n_grid entries must be positive")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.scheme == SCHEME_IMPROVED and (self.gamma is None or self.eps_c is None):
            raise ConfigError("multihop-improved needs gamma and eps_c")
        if not 0 <= self.outage_tol < 1:
            raise ConfigError(f"outage_tol must be in [0, 1), got {self.outage_tol}")


def validate_spec(spec: ExperimentSpec) -> None:
    """Fail fast on anything a trial would reject, for every sweep point."""
    for n in spec.n_grid:
        build_scales(spec, n)


_KEYS = {
    "n_grid": "int_list",
    "alpha": "float",
    "beta": "float",
    "a1": "float",
    "a2": "float",
    "gamma": "float",
    "delta": "float",
    "eta_margin": "margin",
    "eps_c": "float",
    "trials": "int",
    "scheme": "str",
    "seed": "int",
    "W": "float",
    "outage_tol": "float",
    "occupancy_target": "float",
    "check_protocol": "bool",
}
_REQUIRED = ("n_grid", "alpha", "beta", "a1", "a2", "trials", "scheme", "seed")


def _parse_value(kind: str, raw: str, line: int, key: str):
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            low = raw.lower()
            if low in ("true", "yes", "1"):
                return True
            if low in ("false", "no", "0"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if kind == "margin":
            return "auto" if raw.lower() == "auto" else float(raw)
        if kind == "int_list":
            parts = raw.replace(",", " ").split()
            if not parts:
                raise ValueError("empty list")
            return tuple(int(p) for p in parts)
        return raw
    except ValueError as exc:
        raise ConfigFileError(str(exc), line, key) from None


def parse_config(path) -> ExperimentSpec:
    """Read a `key = value` config file into an ExperimentSpec.

    Keys: n_grid, alpha, beta, a1, a2, gamma, delta, eta_margin, eps_c,
    trials, scheme, seed, plus optional W, outage_tol, occupancy_target,
    check_protocol.  '#' starts a comment; n_grid is comma or space
    separated.
    """
    values: Dict[str, object] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigFileError(str(exc)) from None
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigFileError("expected 'key = value'", lineno, line.split()[0])
        key, _, raw = line.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in _KEYS:
            raise ConfigFileError(f"unknown key {key!r}", lineno, key)
        if key in values:
            raise ConfigFileError("duplicate key", lineno, key)
        if not raw:
            raise ConfigFileError("missing value", lineno, key)
        values[key] = _parse_value(_KEYS[key], raw, lineno, key)
    missing = [k for k in _REQUIRED if k not in values]
    if missing:
        raise ConfigFileError(f"missing required keys: {', '.join(missing)}")
    try:
        spec = ExperimentSpec(**values)  # type: ignore[arg-type]
        validate_spec(spec)
    except ConfigError as exc:
        if isinstance(exc, ConfigFileError):
            raise
        raise ConfigFileError(str(exc)) from None
    return spec


def resolve_workers(explicit: Optional[int] = None) -> int:
    """Worker count: explicit argument, else D2DCACHESIM_WORKERS, else cores."""
    if explicit is not None:
        return max(1, int(explicit))
    env = os.environ.get("D2DCACHESIM_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"D2DCACHESIM_WORKERS must be an integer, got {env!r}")
    return os.cpu_count() or 1


def _run_one(args) -> SimResult:
    spec, n, trial = args
    return run_trial(spec, n, trial)


def run_trials(spec: ExperimentSpec, workers: Optional[int] = None) -> List[SimResult]:
    """All (n, trial) realizations, in deterministic (n, trial) order."""
    validate_spec(spec)
    tasks = [(spec, n, t) for n in spec.n_grid for t in range(spec.trials)]
    n_workers = resolve_workers(workers)
    if n_workers <= 1 or len(tasks) <= 1:
        results = [_run_one(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(_run_one, tasks, chunksize=1))
    results.sort(key=lambda r: (r.n, r.trial))
    return results


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))  # shortest round-trip, numpy scalars included
    return str(value)


def write_results_csv(path, results: Sequence[SimResult]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RESULT_COLUMNS)
        for r in results:
            w.writerow(
                [
                    r.n,
                    r.scheme,
                    r.trial,
                    r.seed,
                    _fmt(r.t_n),
                    _fmt(r.s_n),
                    r.l_max,
                    r.outage_cause,
                    r.max_sources,
                    r.unserved_count,
                    _fmt(r.unserved_fraction),
                    r.n_paired,
                    r.n_self,
                    r.relay_void_cells,
                    _fmt(r.protocol_ok),
                ]
            )


def write_timings_csv(path, results: Sequence[SimResult]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "scheme", "trial", "runtime_ms"])
        for r in results:
            w.writerow([r.n, r.scheme, r.trial, _fmt(r.runtime_ms)])


def read_results_csv(path) -> List[SimResult]:
    """Rebuild SimResults from a results.csv (timings are not stored there)."""
    out: List[SimResult] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "t_n" not in reader.fieldnames:
            raise ConfigError(f"{path}: not a results file")
        for row in reader:
            out.append(
                SimResult(
                    n=int(row["n"]),
                    scheme=row["scheme"],
                    trial=int(row["trial"]),
                    seed=int(row["seed"]),
                    t_n=float(row["t_n"]),
                    outage_cause=row["outage_cause"],
                    l_max=int(row["l_max"]),
                    unserved_count=int(row["unserved_count"]),
                    unserved_fraction=float(row["unserved_fraction"]),
                    max_sources=int(row["max_sources"]),
                    n_paired=int(row["n_paired"]),
                    n_self=int(row["n_self"]),
                    relay_void_cells=int(row["relay_void_cells"]),
                    protocol_ok={"true": True, "false": False, "": None}[
                        row["protocol_ok"]
                    ],
                )
            )
    return out


def group_outage_free(results: Sequence[SimResult]) -> Dict[int, List[float]]:
    """Outage-free throughput samples per n (key present even when empty)."""
    groups: Dict[int, List[float]] = {}
    for r in results:
        groups.setdefault(r.n, [])
        if r.outage_cause == OUTAGE_NONE:
            groups[r.n].append(r.t_n)
    return groups


def theory_exponent(spec: ExperimentSpec) -> Optional[float]:
    """Closed-form achievable exponent matching the spec's scheme."""
    bounds = theoretical_bounds(spec.alpha, spec.beta, spec.a1, spec.a2, spec.gamma)
    if spec.scheme == "single-hop":
        return bounds.singlehop_ach
    if spec.scheme == SCHEME_IMPROVED:
        return bounds.improved
    if spec.scheme == SCHEME_CENTRALIZED:
        return -0.5
    return bounds.multihop_ach


@dataclass
class RunSummary:
    spec: ExperimentSpec
    results: List[SimResult]
    fit: Optional[ScalingFit]
    cache_miss_rate: float
    relay_void_rate: float
    mean_unserved: float
    theory: Optional[float]
    out_dir: Optional[Path] = None
    warnings: List[str] = field(default_factory=list)


def summarize(spec: ExperimentSpec, results: Sequence[SimResult]) -> RunSummary:
    cache_rate, void_rate = outage_fraction(results)
    warnings: List[str] = []
    fit: Optional[ScalingFit] = None
    if len(spec.n_grid) >= 3:
        try:
            fit = fit_scaling(group_outage_free(results))
        except ValueError as exc:
            warnings.append(f"scaling fit unavailable: {exc}")
    else:
        warnings.append("scaling fit needs >= 3 network sizes")
    return RunSummary(
        spec=spec,
        results=list(results),
        fit=fit,
        cache_miss_rate=cache_rate,
        relay_void_rate=void_rate,
        mean_unserved=mean_unserved_fraction(results),
        theory=theory_exponent(spec),
        warnings=warnings,
    )


def write_summary_csv(path, summary: RunSummary) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            [
                "scheme",
                "slope",
                "slope_stderr",
                "r2",
                "theory_exponent",
                "cache_miss_outage_rate",
                "relay_void_outage_rate",
                "mean_unserved_fraction",
            ]
        )
        fit = summary.fit
        w.writerow(
            [
                summary.spec.scheme,
                _fmt(fit.slope) if fit else "",
                _fmt(fit.stderr) if fit else "",
                _fmt(fit.r2) if fit else "",
                _fmt(summary.theory),
                _fmt(summary.cache_miss_rate),
                _fmt(summary.relay_void_rate),
                _fmt(summary.mean_unserved),
            ]
        )


def run_experiment(
    spec: ExperimentSpec,
    out_dir,
    workers: Optional[int] = None,
) -> RunSummary:
    """Execute the sweep and write results.csv, timings.csv, summary.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = run_trials(spec, workers=workers)
    summary = summarize(spec, results)
    summary.out_dir = out
    write_results_csv(out / RESULTS_NAME, results)
    write_timings_csv(out / TIMINGS_NAME, results)
    write_summary_csv(out / SUMMARY_NAME, summary)
    return summary


def emit_plot_data(
    results: Sequence[SimResult],
    out_dir,
    spec: Optional[ExperimentSpec] = None,
) -> List[Path]:
    """Write per-scheme (ln n, ln mean T_n) files, plus reference lines when
    a spec provides the closed-form exponent.  All-outage sizes are skipped
    with a warning; an empty result set is an error."""
    if not results:
        raise ConfigError("no results to plot")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    by_scheme: Dict[str, List[SimResult]] = {}
    for r in results:
        by_scheme.setdefault(r.scheme, []).append(r)

    paths: List[Path] = []
    anchors: Dict[str, Tuple[float, float]] = {}
    for scheme, rows in sorted(by_scheme.items()):
        groups = group_outage_free(rows)
        points = []
        for n in sorted(groups):
            vals = groups[n]
            if not vals:
                print(
                    f"warning: skipping n={n} for {scheme}: every trial in outage",
                    file=sys.stderr,
                )
                continue
            points.append((math.log(n), math.log(sum(vals) / len(vals))))
        if not points:
            raise ConfigError(f"scheme {scheme!r}: every sweep point in outage")
        path = out / f"plot_{scheme}.dat"
        with open(path, "w") as fh:
            fh.write("# columns: ln_n ln_mean_throughput\n")
            for lx, ly in points:
                fh.write(f"{lx!r} {ly!r}\n")
        anchors[scheme] = points[0]
        paths.append(path)

    if spec is not None:
        exponent = theory_exponent(spec)
        if exponent is not None and spec.scheme in anchors:
            x0, y0 = anchors[spec.scheme]
            path = out / "plot_bounds.dat"
            with open(path, "w") as fh:
                fh.write(
                    "# columns: scheme ln_n ln_reference "
                    f"(slope {exponent!r} anchored at first data point)\n"
                )
                for n in sorted({r.n for r in results}):
                    lx = math.log(n)
                    fh.write(f"{spec.scheme} {lx!r} {y0 + exponent * (lx - x0)!r}\n")
            paths.append(path)
    return paths
