"""Cache placement policies: who stores which files before demands arrive.

All three policies fill every node's cache with distinct file indices:

- decentralized: uniform random M-subset of the whole library per node;
- decentralized-subset: same, drawn only from the most popular files
  (the truncated sub-library of the steep-popularity scheme);
- centralized: a random assignment guaranteed to cover the entire library,
  for configurations where n*M >= m and random placement would miss files.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import _kernels as kernels
from .config import DerivedScales
from .rng import child_seed, unit_int

POLICY_DECENTRALIZED = "decentralized-full"
POLICY_SUBSET = "decentralized-subset"
POLICY_CENTRALIZED = "centralized"


class PlacementError(ValueError):
    """Cache placement preconditions violated."""


@dataclass(frozen=True, eq=False)
class CachePlacement:
    """files[i] is the sorted array of file indices cached by node i."""

    files: np.ndarray
    policy: str
    library_size: int
    effective_library: int

    @property
    def n(self) -> int:
        return self.files.shape[0]

    @property
    def M(self) -> int:
        return self.files.shape[1]


def place_decentralized(
    n: int, M: int, library_size: int, stream_seed: int
) -> CachePlacement:
    """Each node caches a uniform random M-subset, independently of others."""
    if not 1 <= M <= library_size:
        raise PlacementError(f"cache size {M} not in [1, {library_size}]")
    files = kernels.sample_subsets(stream_seed, n, library_size, M)
    return CachePlacement(
        files=files,
        policy=POLICY_DECENTRALIZED,
        library_size=library_size,
        effective_library=library_size,
    )


def place_decentralized_subset(
    n: int, M: int, scales: DerivedScales, stream_seed: int
) -> CachePlacement:
    """Uniform random caching restricted to the truncated sub-library."""
    if scales.sub_library_size is None:
        raise PlacementError(
            "truncated placement needs scales derived with gamma and eps_c "
            "(gamma must exceed 1 + 1/alpha)"
        )
    sub = scales.sub_library_size
    if not 1 <= M <= sub <= scales.m:
        raise PlacementError(
            f"need 1 <= M={M} <= sub-library={sub} <= m={scales.m}"
        )
    files = kernels.sample_subsets(stream_seed, n, sub, M)
    return CachePlacement(
        files=files,
        policy=POLICY_SUBSET,
        library_size=scales.m,
        effective_library=sub,
    )


def place_centralized(n: int, M: int, m: int, stream_seed: int) -> CachePlacement:
    """Random placement covering every file at least once.

    A random bijection maps the m files onto m uniformly chosen cache slots
    (of the n*M available), then each node's remaining slots are filled with
    uniform random files distinct within the node.
    """
    if not 1 <= M <= m:
        raise PlacementError(f"cache size {M} not in [1, {m}]")
    if n * M < m:
        raise PlacementError(
            f"total cache capacity n*M = {n * M} cannot cover m = {m} files"
        )
    slot_seed = child_seed(stream_seed, 1)
    perm_seed = child_seed(stream_seed, 2)
    fill_seed = child_seed(stream_seed, 3)

    slots = kernels.sample_subsets(slot_seed, 1, n * M, m)[0].astype(np.int64)
    perm = np.argsort(kernels.uniform01(perm_seed, 0, m), kind="stable")
    flat = np.full(n * M, -1, dtype=np.int64)
    flat[slots] = perm

    counter = 0
    for slot in np.flatnonzero(flat < 0):
        node = slot // M
        held = set(flat[node * M : (node + 1) * M].tolist())
        while True:
            candidate = int(unit_int(fill_seed, counter) * m)
            counter += 1
            if candidate not in held:
                flat[slot] = candidate
                break

    files = np.sort(flat.reshape(n, M), axis=1).astype(np.int32)
    return CachePlacement(
        files=files,
        policy=POLICY_CENTRALIZED,
        library_size=m,
        effective_library=m,
    )


def coverage_counts(cache: CachePlacement) -> np.ndarray:
    """How many nodes cache each file (length = full library size)."""
    return np.bincount(cache.files.ravel(), minlength=cache.library_size)


def write_cache_csv(path, cache: CachePlacement) -> None:
    """Debug dump: (node_id, file_id), file ids 1-based."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node_id", "file_id"])
        for i in range(cache.n):
            for f in cache.files[i]:
                w.writerow([i, int(f) + 1])
