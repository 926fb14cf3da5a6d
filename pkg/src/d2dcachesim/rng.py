"""Counter-based random streams shared by the compiled and pure-Python kernels.

Every random quantity in the simulator is a pure function of a 64-bit stream
seed and a draw counter, using the splitmix64 finalizer.  This makes trials
reproducible independently of execution order, worker count, and kernel
backend: the Cython extension implements the identical arithmetic.

Streams are derived, never shared: a trial gets its seed from
(master seed, n, trial index) and hands purpose-specific child seeds to the
kernels (node placement, cache placement, demand sampling, source picking).
"""

from __future__ import annotations

import numpy as np

_M64 = 0xFFFFFFFFFFFFFFFF
_PHI = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_CHILD = 0xD1B54A32D192ED03

# Kernel stream purposes; values are part of the reproducibility contract.
STREAM_PLACEMENT = 1
STREAM_CACHE = 2
STREAM_DEMAND = 3
STREAM_PICK = 4
STREAM_CENTRAL = 5


def _finalize_int(z: int) -> int:
    z &= _M64
    z = ((z ^ (z >> 30)) * _MIX1) & _M64
    z = ((z ^ (z >> 27)) * _MIX2) & _M64
    return z ^ (z >> 31)


def mix64_int(seed: int, index: int) -> int:
    """Output `index` of the stream rooted at `seed` (scalar path)."""
    return _finalize_int((seed + (index + 1) * _PHI) & _M64)


def mix64(seed: int, index: np.ndarray) -> np.ndarray:
    """Vectorized stream outputs; `index` is any integer array."""
    idx = np.asarray(index).astype(np.uint64)
    z = np.uint64(seed & _M64) + (idx + np.uint64(1)) * np.uint64(_PHI)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def mix64_seeds(seeds: np.ndarray, index: int) -> np.ndarray:
    """Output `index` of many parallel streams (one seed per element)."""
    z = seeds.astype(np.uint64) + np.uint64(((index + 1) * _PHI) & _M64)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def to_unit(z: np.ndarray) -> np.ndarray:
    """Map raw 64-bit words to doubles in [0, 1), 53 significant bits."""
    return (z >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)


def unit_int(seed: int, index: int) -> float:
    """Scalar double in [0, 1) at position `index` of stream `seed`."""
    return (mix64_int(seed, index) >> 11) * (2.0 ** -53)


def child_seed(seed: int, tag: int) -> int:
    """Derive an independent child stream seed (tag is a small purpose id)."""
    return _finalize_int((seed + tag * _CHILD) & _M64)


def trial_seed(master_seed: int, n: int, trial: int) -> int:
    """Stream seed for one realization, stable across sweep layout."""
    s = _finalize_int((master_seed & _M64) ^ _PHI)
    s = _finalize_int((s + n * _MIX1) & _M64)
    s = _finalize_int((s + trial * _MIX2) & _M64)
    return s
