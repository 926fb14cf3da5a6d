"""Kernel backend selection: compiled extension if available, numpy otherwise.

Both backends produce identical outputs for identical inputs (tested bit for
bit), so the choice only affects speed.  Override with the environment
variable ``D2DCACHESIM_BACKEND`` set to ``native`` or ``python``.
"""

from __future__ import annotations

import os

import numpy as np

from . import pyref

_choice = os.environ.get("D2DCACHESIM_BACKEND", "auto").lower()
if _choice not in ("auto", "native", "python"):
    raise ValueError(
        f"D2DCACHESIM_BACKEND must be auto, native, or python, got {_choice!r}"
    )
_compiled = None
if _choice in ("auto", "native"):
    try:
        import importlib

        _compiled = importlib.import_module(f"{__name__}._native")
    except ImportError:
        if _choice == "native":
            raise
_impl = _compiled if _compiled is not None else pyref

BACKEND: str = _impl.BACKEND

uniform01 = _impl.uniform01
sample_subsets = _impl.sample_subsets
sample_pmf = _impl.sample_pmf
pick_sources = _impl.pick_sources
route_loads = _impl.route_loads

# Counting sort beats comparison sort only while the bucket table stays small.
_COUNTING_BUCKET_CAP = 1 << 23


def stable_order(keys: np.ndarray, n_buckets: int) -> np.ndarray:
    """Stable ascending permutation of non-negative int64 keys < n_buckets."""
    if _compiled is not None and 0 < n_buckets <= _COUNTING_BUCKET_CAP:
        return _compiled.counting_order(keys, n_buckets)
    return pyref.stable_order(keys)
