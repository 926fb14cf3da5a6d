"""Network parameters, derived scaling quantities, popularity, and demands.

The simulator studies cache-enabled device-to-device networks whose library
size and per-node cache size grow as powers of the node count:
``m = a1 * n**alpha`` files, ``M = a2 * n**beta`` cached per node.  Everything
downstream (traffic/hopping cell areas, transmission radius, TDMA reuse) is a
deterministic function of these knobs, collected in :class:`DerivedScales`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels as kernels


class ConfigError(ValueError):
    """Invalid network or experiment configuration."""


def round_half_up(x: float) -> int:
    """round() with deterministic .5 handling (bankers' rounding is not)."""
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class NetworkConfig:
    """Scaling parameters of one network family.

    alpha/beta are the library and cache growth exponents, a1/a2 their
    coefficients, W the link rate in bit/s/Hz, delta the interference guard
    factor of the protocol model, eta_margin the small slack subtracted when
    sizing traffic cells, and seed the master seed all trial streams derive
    from.
    """

    n: int
    alpha: float
    beta: float
    a1: float
    a2: float
    W: float = 1.0
    delta: float = 1.0
    eta_margin: float = 0.05
    seed: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ConfigError(f"n must be a positive integer, got {self.n!r}")
        if self.alpha <= 0:
            raise ConfigError(f"alpha must be > 0, got {self.alpha}")
        if not 0 <= self.beta <= self.alpha:
            raise ConfigError(f"beta must lie in [0, alpha], got {self.beta}")
        if self.a1 <= 0 or self.a2 <= 0:
            raise ConfigError("a1 and a2 must be > 0")
        if self.alpha == self.beta and self.a1 <= self.a2:
            # Every node could store the whole library; delivery is trivial.
            raise ConfigError("alpha == beta requires a1 > a2")
        if self.W <= 0:
            raise ConfigError(f"W must be > 0, got {self.W}")
        if self.delta <= 0:
            raise ConfigError(f"delta must be > 0, got {self.delta}")
        # eta_margin is normally a small positive slack; negative values are
        # allowed to push traffic cells into the outage regime on purpose.
        if not -1.0 < self.eta_margin < 1.0:
            raise ConfigError(f"eta_margin must lie in (-1, 1), got {self.eta_margin}")


@dataclass(frozen=True)
class DerivedScales:
    """Quantities derived from a NetworkConfig (plus gamma/eps_c if truncating).

    a_c and a_h are the nominal traffic- and hopping-cell areas, r the
    transmission radius sqrt(5*a_h), J the TDMA reuse factor, R_agg = W/J the
    per-cell aggregate rate.  n2/sub_library_size are set only when the
    popularity-truncated placement is active.
    """

    n: int
    m: int
    M: int
    eta: float
    a_c: float
    a_h: float
    r: float
    J: int
    R_agg: float
    n2: Optional[float] = None
    sub_library_size: Optional[int] = None


def reuse_factor(delta: float) -> int:
    """TDMA reuse factor making the protocol model feasible at r=sqrt(5*a_h)."""
    return (2 * math.ceil((1.0 + delta) * math.sqrt(5.0)) + 1) ** 2


def derive_scales(
    cfg: NetworkConfig,
    gamma: Optional[float] = None,
    eps_c: Optional[float] = None,
    eta_override: Optional[float] = None,
) -> DerivedScales:
    """Compute all derived scaling quantities for one network size.

    Baseline traffic-cell exponent: eta = max(0, 1-(alpha-beta)-eta_margin);
    configurations with alpha-beta > 1, or alpha-beta == 1 with a1 > a2, are
    rejected (the network cannot hold the library, outage is certain).

    Passing both `gamma` and `eps_c` activates the popularity-truncated
    placement: eta = min(1, beta+1-1/(gamma-1)) - eps_c, with the sub-library
    holding the M*round(n2) most popular files.  Requires gamma > 1+1/alpha.

    `eta_override` pins eta directly (the global-cell delivery scheme uses 0)
    and skips the regime rejection; placement preconditions still apply.
    """
    n = cfg.n
    m = max(1, round_half_up(cfg.a1 * n ** cfg.alpha))
    M = max(1, round_half_up(cfg.a2 * n ** cfg.beta))
    M = min(M, m)

    improved = gamma is not None or eps_c is not None
    n2: Optional[float] = None
    sub: Optional[int] = None
    if improved:
        if gamma is None or eps_c is None:
            raise ConfigError("truncated placement needs both gamma and eps_c")
        if gamma <= 1.0 + 1.0 / cfg.alpha:
            raise ConfigError(
                f"truncated placement needs gamma > 1 + 1/alpha "
                f"= {1.0 + 1.0 / cfg.alpha:g}, got {gamma:g}"
            )
        cap = min(1.0, cfg.beta + 1.0 - 1.0 / (gamma - 1.0))
        if not 0.0 < cap - eps_c < 1.0:
            raise ConfigError(
                f"eps_c={eps_c:g} leaves no valid traffic-cell exponent "
                f"(min(1, beta+1-1/(gamma-1)) = {cap:g})"
            )
        eta = cap - eps_c
        n2 = float(n) ** (1.0 - cap + eps_c / 2.0)
        sub = min(m, M * round_half_up(n2))
    else:
        gap = 1.0 - (cfg.alpha - cfg.beta)
        if eta_override is None and (gap < 0 or (gap == 0 and cfg.a1 > cfg.a2)):
            raise ConfigError(
                "alpha-beta > 1, or == 1 with a1 > a2: the network cannot "
                "store the library and outage is certain"
            )
        eta = max(0.0, gap - cfg.eta_margin)
        if eta >= 1.0:
            raise ConfigError(
                f"eta = {eta:g} out of range; eta_margin {cfg.eta_margin:g} too negative"
            )

    if eta_override is not None:
        if not 0.0 <= eta_override < 1.0:
            raise ConfigError(f"eta override must be in [0, 1), got {eta_override}")
        eta = eta_override

    a_c = float(n) ** (-eta)
    a_h = 1.0 if n == 1 else min(1.0, 2.0 * math.log(n) / n)
    J = reuse_factor(cfg.delta)
    return DerivedScales(
        n=n,
        m=m,
        M=M,
        eta=eta,
        a_c=a_c,
        a_h=a_h,
        r=math.sqrt(5.0 * a_h),
        J=J,
        R_agg=cfg.W / J,
        n2=n2,
        sub_library_size=sub,
    )


@dataclass(frozen=True, eq=False)
class Popularity:
    """A file-request distribution over library indices 0..m-1, descending."""

    kind: str
    m: int
    pmf: np.ndarray
    cdf: np.ndarray
    gamma: Optional[float] = None


def _make_popularity(kind: str, pmf: np.ndarray, gamma=None) -> Popularity:
    total = float(pmf.sum())
    if abs(total - 1.0) > 1e-9:
        raise ConfigError(f"pmf sums to {total!r}, not 1")
    if np.any(np.diff(pmf) > 1e-15):
        raise ConfigError("pmf must be nonincreasing (most popular file first)")
    cdf = np.cumsum(pmf)
    cdf[-1] = 1.0
    pmf.flags.writeable = False
    cdf.flags.writeable = False
    return Popularity(kind=kind, m=len(pmf), pmf=pmf, cdf=cdf, gamma=gamma)


def zipf_pmf(m: int, gamma: float) -> Popularity:
    """Zipf distribution p(i) ~ i**-gamma over m files; gamma=0 is uniform."""
    if m < 1:
        raise ConfigError(f"library size must be >= 1, got {m}")
    if gamma < 0:
        raise ConfigError(f"zipf exponent must be >= 0, got {gamma}")
    weights = np.arange(1, m + 1, dtype=np.float64) ** (-gamma)
    return _make_popularity("zipf", weights / weights.sum(), gamma=gamma)


def uniform_pmf(m: int) -> Popularity:
    if m < 1:
        raise ConfigError(f"library size must be >= 1, got {m}")
    return _make_popularity("uniform", np.full(m, 1.0 / m))


def explicit_pmf(probs) -> Popularity:
    arr = np.asarray(probs, dtype=np.float64).copy()
    if arr.ndim != 1 or len(arr) < 1:
        raise ConfigError("explicit pmf must be a non-empty 1-d sequence")
    return _make_popularity("explicit", arr)


def sample_demands(pop: Popularity, n: int, stream_seed: int) -> np.ndarray:
    """n i.i.d. file indices (int32, 0-based), deterministic in stream_seed."""
    if n < 0:
        raise ConfigError(f"demand count must be >= 0, got {n}")
    return kernels.sample_pmf(stream_seed, pop.cdf, n)
