"""Pure-numpy reference implementations of the hot per-trial kernels.

Each function here is the semantic twin of the Cython version in
``_native.pyx``: identical stream arithmetic, identical truncation rules,
identical outputs bit for bit.  The compiled module wins on speed; this one
is always available and is the ground truth the extension is tested against.
"""

from __future__ import annotations

import numpy as np

from ..rng import mix64, mix64_seeds, to_unit

BACKEND = "python"

# Membership bitmap for subset sampling is worth its footprint only when the
# library is small; otherwise compare against the few already-picked columns.
_BITMAP_BYTES_CAP = 1 << 28


def uniform01(seed: int, start: int, count: int) -> np.ndarray:
    """Doubles in [0, 1) at stream positions start .. start+count-1."""
    return to_unit(mix64(seed, start + np.arange(count, dtype=np.uint64)))


def sample_subsets(seed: int, n_rows: int, lib_size: int, k: int) -> np.ndarray:
    """Uniform random k-subsets of {0..lib_size-1}, one sorted row per node.

    Floyd's algorithm, k draws per row; row i consumes the stream seeded by
    mix64(seed, i), so rows are independent and order-insensitive.
    """
    if not 1 <= k <= lib_size:
        raise ValueError(f"subset size {k} not in [1, {lib_size}]")
    if k == lib_size:
        return np.tile(np.arange(lib_size, dtype=np.int32), (n_rows, 1))
    out = np.empty((n_rows, k), dtype=np.int32)
    node_seeds = mix64(seed, np.arange(n_rows, dtype=np.uint64))
    use_bitmap = (k * k > 1024) and (n_rows * lib_size <= _BITMAP_BYTES_CAP)
    if use_bitmap:
        seen = np.zeros((n_rows, lib_size), dtype=bool)
        rows = np.arange(n_rows)
    for d in range(k):
        t = lib_size - k + d
        u = to_unit(mix64_seeds(node_seeds, d))
        j = (u * (t + 1)).astype(np.int64)
        if use_bitmap:
            taken = seen[rows, j]
            pick = np.where(taken, t, j)
            seen[rows, pick] = True
        else:
            taken = np.zeros(n_rows, dtype=bool)
            for c in range(d):
                taken |= out[:, c] == j
            pick = np.where(taken, t, j)
        out[:, d] = pick
    out.sort(axis=1)
    return out


def sample_pmf(seed: int, cdf: np.ndarray, count: int) -> np.ndarray:
    """Inverse-CDF draws; cdf must be nondecreasing with cdf[-1] == 1.0."""
    u = uniform01(seed, 0, count)
    return np.searchsorted(cdf, u, side="right").astype(np.int32)


def stable_order(keys: np.ndarray) -> np.ndarray:
    """Permutation sorting `keys` ascending, ties kept in input order."""
    return np.argsort(keys, kind="stable").astype(np.int64)


def counting_order(keys: np.ndarray, n_buckets: int) -> np.ndarray:
    """stable_order specialization for small non-negative key ranges."""
    return np.argsort(keys, kind="stable").astype(np.int64)


def pick_sources(
    seed: int,
    sorted_keys: np.ndarray,
    sorted_nodes: np.ndarray,
    want_keys: np.ndarray,
    want_nodes: np.ndarray,
) -> np.ndarray:
    """Uniform pick among holder-table entries matching each wanted key.

    The draw for a demander is indexed by its node id, so the result does not
    depend on how the wanted nodes are batched.  Returns -1 when no entry
    matches (no holder in the demander's traffic cell).
    """
    if len(sorted_nodes) == 0:
        return np.full(len(want_keys), -1, dtype=np.int32)
    lo = np.searchsorted(sorted_keys, want_keys, side="left")
    hi = np.searchsorted(sorted_keys, want_keys, side="right")
    width = hi - lo
    u = to_unit(mix64(seed, want_nodes.astype(np.uint64)))
    j = (u * width).astype(np.int64)
    idx = np.minimum(lo + j, len(sorted_nodes) - 1)
    return np.where(width > 0, sorted_nodes[idx], -1).astype(np.int32)


def route_loads(
    sc: np.ndarray,
    sr: np.ndarray,
    dc: np.ndarray,
    dr: np.ndarray,
    n_cols: int,
    n_rows: int,
) -> np.ndarray:
    """Cells-visited counts for row-then-column routes on a grid.

    Route i runs horizontally in row sr[i] from column sc[i] to dc[i], then
    vertically in column dc[i] to row dr[i]; every visited cell counts once.
    Returns an int64 load table of shape (n_rows, n_cols).
    """
    sc = sc.astype(np.int64)
    sr = sr.astype(np.int64)
    dc = dc.astype(np.int64)
    dr = dr.astype(np.int64)
    w = n_cols + 1
    cmin = np.minimum(sc, dc)
    cmax = np.maximum(sc, dc)
    size = n_rows * w
    h = np.bincount(sr * w + cmin, minlength=size) - np.bincount(
        sr * w + cmax + 1, minlength=size
    )
    loads = h.reshape(n_rows, w).cumsum(axis=1)[:, :n_cols]

    vert = dr != sr
    if np.any(vert):
        vc = dc[vert]
        vsr = sr[vert]
        vdr = dr[vert]
        rlo = np.where(vdr > vsr, vsr + 1, vdr)
        rhi = np.where(vdr > vsr, vdr, vsr - 1)
        hgt = n_rows + 1
        vsize = n_cols * hgt
        v = np.bincount(vc * hgt + rlo, minlength=vsize) - np.bincount(
            vc * hgt + rhi + 1, minlength=vsize
        )
        loads = loads + v.reshape(n_cols, hgt).cumsum(axis=1)[:, :n_rows].T
    return np.ascontiguousarray(loads)
