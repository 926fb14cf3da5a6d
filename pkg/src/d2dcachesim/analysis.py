"""Closed-form calculators and the scaling-exponent regression harness.

Everything here is a pure function: regime classification of the
(alpha, beta, a1, a2) parameter space, the throughput scaling exponents per
regime, the binomial lower-tail bound used by the converse arguments, the
head-mass functional that defines heavy-tailed popularity, the analytic
no-outage bound, and ordinary least squares on (log n, log mean T_n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .config import ConfigError

REGIMES = ("I", "II", "III", "IV", "V")


def classify_regime(alpha: float, beta: float, a1: float, a2: float) -> str:
    """Unique regime label of a parameter point.

    I: alpha-beta > 1; II/III: alpha-beta == 1 split by a1 > a2 vs a1 <= a2;
    IV: alpha-beta in (0,1); V: alpha == beta (requires a1 > a2).
    """
    if alpha <= 0 or not 0 <= beta <= alpha or a1 <= 0 or a2 <= 0:
        raise ConfigError("need alpha > 0, beta in [0, alpha], a1 > 0, a2 > 0")
    d = alpha - beta
    if d > 1:
        return "I"
    if d == 1:
        return "II" if a1 > a2 else "III"
    if d > 0:
        return "IV"
    if a1 <= a2:
        raise ConfigError("alpha == beta requires a1 > a2")
    return "V"


@dataclass(frozen=True)
class BoundSet:
    """Throughput scaling exponents (T_n ~ n**exponent, slack dropped).

    None exponents mean throughput is identically zero (Regimes I/II) or,
    for converse fields with log_converse set, that the upper bound is
    O(1/log n) rather than a power of n.
    """

    regime: str
    multihop_ach: Optional[float]
    multihop_conv: Optional[float]
    singlehop_ach: Optional[float]
    singlehop_conv: Optional[float]
    improved: Optional[float] = None
    zero_throughput: bool = False
    log_converse: bool = False


def theoretical_bounds(
    alpha: float, beta: float, a1: float, a2: float, gamma: Optional[float] = None
) -> BoundSet:
    """Achievable/converse exponents for multihop and single-hop delivery.

    The improved exponent -(1 - min(1, beta+1-1/(gamma-1)))/2 is emitted only
    for steep popularity (gamma > 1 + 1/alpha) with alpha-beta in (0, 1].
    """
    regime = classify_regime(alpha, beta, a1, a2)
    d = alpha - beta
    improved = None
    if gamma is not None and gamma > 1.0 + 1.0 / alpha and 0 < d <= 1:
        improved = -(1.0 - min(1.0, beta + 1.0 - 1.0 / (gamma - 1.0))) / 2.0
    if regime in ("I", "II"):
        return BoundSet(regime, None, None, None, None, improved, zero_throughput=True)
    if regime == "III":
        return BoundSet(regime, -0.5, -0.5, -1.0, -1.0, improved)
    if regime == "IV":
        return BoundSet(regime, -d / 2.0, -d / 2.0, -d, -d, improved)
    return BoundSet(regime, 0.0, None, 0.0, None, improved, log_converse=True)


def chernoff_upper(l: int, p: float, k: int) -> float:
    """Upper bound exp(-(l*p-k)^2 / (2*p*l)) on P(Binomial(l,p) <= k)."""
    if l < 1:
        raise ValueError(f"need l >= 1, got {l}")
    if not 0 < p < 1:
        raise ValueError(f"need p in (0,1), got {p}")
    if not 0 <= k <= l * p:
        raise ValueError(f"k={k} outside [0, l*p={l * p:g}]")
    return math.exp(-((l * p - k) ** 2) / (2.0 * p * l))


def heavy_tail_mass(gamma: float, alpha: float, a1: float, c1: float, n: int) -> float:
    """Head mass sum_{i<=c1*n^alpha} p(i) of a Zipf(gamma) library of a1*n^alpha.

    Stays bounded away from 1 as n grows exactly for the heavy-tailed class
    (gamma < 1 gives the limit (c1/a1)**(1-gamma)); gamma = 0 is uniform.
    """
    if not 0 < c1 < a1:
        raise ValueError(f"need 0 < c1 < a1, got c1={c1}, a1={a1}")
    if gamma < 0:
        raise ValueError(f"need gamma >= 0, got {gamma}")
    m = max(1, int(math.floor(a1 * n ** alpha + 0.5)))
    head = max(1, min(m, int(math.floor(c1 * n ** alpha + 0.5))))
    weights = np.arange(1, m + 1, dtype=np.float64) ** (-gamma)
    return float(weights[:head].sum() / weights.sum())


def analytic_outage_bound(n: int, m: int, M: int, a_c: float, delta: float) -> float:
    """Lower bound on P(every node finds a source in its traffic cell):
    1 - n * ((m-M)/m)**((1-delta)*n*a_c), clamped to [0, 1]."""
    if not 1 <= M <= m:
        raise ValueError(f"need 1 <= M <= m, got M={M}, m={m}")
    if not 0 < a_c <= 1:
        raise ValueError(f"need a_c in (0, 1], got {a_c}")
    if not 0 <= delta < 1:
        raise ValueError(f"need delta in [0, 1), got {delta}")
    if M == m:
        return 1.0
    miss = ((m - M) / m) ** ((1.0 - delta) * n * a_c)
    return float(min(1.0, max(0.0, 1.0 - n * miss)))


@dataclass(frozen=True)
class ScalingFit:
    """OLS fit of log(mean T_n) against log(n)."""

    slope: float
    intercept: float
    stderr: float
    r2: float
    n_points: int


def fit_scaling(groups: Mapping[int, Sequence[float]]) -> ScalingFit:
    """Fit the scaling exponent from outage-free throughput samples.

    `groups` maps each n to its outage-free T_n samples; every n present must
    have at least one, and at least three distinct n are required.  The fit
    runs on (ln n, ln mean T_n).
    """
    if len(groups) < 3:
        raise ValueError(f"need >= 3 network sizes, got {len(groups)}")
    ns = sorted(groups)
    for n in ns:
        if len(groups[n]) == 0:
            raise ValueError(f"n={n} has no outage-free trials")
    x = np.log(np.array(ns, dtype=np.float64))
    y = np.log(np.array([np.mean(np.asarray(groups[n], dtype=np.float64)) for n in ns]))
    xbar = x.mean()
    ybar = y.mean()
    sxx = float(np.sum((x - xbar) ** 2))
    slope = float(np.sum((x - xbar) * (y - ybar)) / sxx)
    intercept = ybar - slope * xbar
    resid = y - (intercept + slope * x)
    rss = float(np.sum(resid ** 2))
    syy = float(np.sum((y - ybar) ** 2))
    k = len(ns)
    stderr = math.sqrt(max(rss, 0.0) / (k - 2) / sxx) if k > 2 else 0.0
    r2 = 1.0 if syy == 0.0 else 1.0 - rss / syy
    return ScalingFit(slope=slope, intercept=intercept, stderr=stderr, r2=r2, n_points=k)
