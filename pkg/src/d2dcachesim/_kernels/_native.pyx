# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twins of the kernels in pyref.py.

Same stream arithmetic, same truncation rules, same outputs bit for bit;
only the loops are native.  Keep the two files in lockstep.
"""

import numpy as np

cimport numpy as cnp
from libc.stdint cimport int32_t, int64_t, uint64_t

cnp.import_array()

BACKEND = "native"

cdef uint64_t PHI = 0x9E3779B97F4A7C15ULL
cdef uint64_t MIX1 = 0xBF58476D1CE4E5B9ULL
cdef uint64_t MIX2 = 0x94D049BB133111EBULL
# 2**-53 exactly: unit doubles carry 53 significant bits.
cdef double U53 = 1.0 / 9007199254740992.0


cdef inline uint64_t fin(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * MIX1
    z = (z ^ (z >> 27)) * MIX2
    return z ^ (z >> 31)


cdef inline uint64_t stream_at(uint64_t seed, uint64_t index) nogil:
    return fin(seed + (index + 1) * PHI)


cdef inline double unit_at(uint64_t seed, uint64_t index) nogil:
    return <double>(stream_at(seed, index) >> 11) * U53


cdef inline Py_ssize_t lower_bound_i64(const int64_t* a, Py_ssize_t n, int64_t key) nogil:
    cdef Py_ssize_t lo = 0, hi = n, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if a[mid] < key:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline Py_ssize_t upper_bound_i64(const int64_t* a, Py_ssize_t n, int64_t key) nogil:
    cdef Py_ssize_t lo = 0, hi = n, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if a[mid] <= key:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline Py_ssize_t upper_bound_f64(const double* a, Py_ssize_t n, double key) nogil:
    cdef Py_ssize_t lo = 0, hi = n, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if a[mid] <= key:
            lo = mid + 1
        else:
            hi = mid
    return lo


def uniform01(seed, start, count):
    cdef uint64_t s = <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t s0 = <uint64_t>start
    cdef Py_ssize_t n = count, i
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    with nogil:
        for i in range(n):
            out[i] = unit_at(s, s0 + <uint64_t>i)
    return out_arr


def sample_subsets(seed, n_rows, lib_size, k):
    """Uniform random k-subsets per row via Floyd's algorithm, rows sorted."""
    if not 1 <= k <= lib_size:
        raise ValueError(f"subset size {k} not in [1, {lib_size}]")
    cdef Py_ssize_t nr = n_rows, lib = lib_size, kk = k
    if kk == lib:
        return np.tile(np.arange(lib, dtype=np.int32), (nr, 1))
    cdef uint64_t s = <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF)
    out_arr = np.empty((nr, kk), dtype=np.int32)
    cdef int32_t[:, ::1] out = out_arr
    seen_arr = np.zeros(lib, dtype=np.uint8)
    cdef unsigned char[::1] seen = seen_arr
    cdef uint64_t node_seed
    cdef Py_ssize_t i, d, t, j, pick, pos, w
    cdef int32_t tmp
    cdef bint scan_emit = lib <= kk * kk
    with nogil:
        for i in range(nr):
            node_seed = stream_at(s, <uint64_t>i)
            for d in range(kk):
                t = lib - kk + d
                j = <Py_ssize_t>(unit_at(node_seed, <uint64_t>d) * (t + 1))
                pick = t if seen[j] else j
                seen[pick] = 1
                out[i, d] = <int32_t>pick
            if scan_emit:
                pos = 0
                for j in range(lib):
                    if seen[j]:
                        out[i, pos] = <int32_t>j
                        seen[j] = 0
                        pos += 1
            else:
                for d in range(1, kk):
                    tmp = out[i, d]
                    w = d
                    while w > 0 and out[i, w - 1] > tmp:
                        out[i, w] = out[i, w - 1]
                        w -= 1
                    out[i, w] = tmp
                for d in range(kk):
                    seen[out[i, d]] = 0
    return out_arr


def sample_pmf(seed, cdf, count):
    cdef uint64_t s = <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF)
    cdef const double[::1] c = np.ascontiguousarray(cdf, dtype=np.float64)
    cdef Py_ssize_t n = count, m = c.shape[0], i
    out_arr = np.empty(n, dtype=np.int32)
    cdef int32_t[::1] out = out_arr
    with nogil:
        for i in range(n):
            out[i] = <int32_t>upper_bound_f64(&c[0], m, unit_at(s, <uint64_t>i))
    return out_arr


def counting_order(keys, n_buckets):
    """Stable ascending permutation for non-negative int64 keys < n_buckets."""
    cdef const int64_t[::1] k = np.ascontiguousarray(keys, dtype=np.int64)
    cdef Py_ssize_t n = k.shape[0], nb = n_buckets, i
    cdef int64_t key
    out_arr = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] out = out_arr
    offs_arr = np.zeros(nb + 1, dtype=np.int64)
    cdef int64_t[::1] offs = offs_arr
    with nogil:
        for i in range(n):
            offs[k[i] + 1] += 1
        for i in range(nb):
            offs[i + 1] += offs[i]
        for i in range(n):
            key = k[i]
            out[offs[key]] = i
            offs[key] += 1
    return out_arr


def pick_sources(seed, sorted_keys, sorted_nodes, want_keys, want_nodes):
    cdef uint64_t s = <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF)
    cdef const int64_t[::1] sk = np.ascontiguousarray(sorted_keys, dtype=np.int64)
    cdef const int32_t[::1] sn = np.ascontiguousarray(sorted_nodes, dtype=np.int32)
    cdef const int64_t[::1] wk = np.ascontiguousarray(want_keys, dtype=np.int64)
    cdef const int64_t[::1] wn = np.ascontiguousarray(want_nodes, dtype=np.int64)
    cdef Py_ssize_t n = wk.shape[0], ns = sk.shape[0], i, lo, hi
    out_arr = np.empty(n, dtype=np.int32)
    cdef int32_t[::1] out = out_arr
    cdef double u
    with nogil:
        for i in range(n):
            lo = lower_bound_i64(&sk[0], ns, wk[i]) if ns else 0
            hi = upper_bound_i64(&sk[0], ns, wk[i]) if ns else 0
            if hi == lo:
                out[i] = -1
            else:
                u = unit_at(s, <uint64_t>wn[i])
                out[i] = sn[lo + <Py_ssize_t>(u * (hi - lo))]
    return out_arr


def route_loads(sc, sr, dc, dr, n_cols, n_rows):
    cdef const int64_t[::1] a = np.ascontiguousarray(sc, dtype=np.int64)
    cdef const int64_t[::1] b = np.ascontiguousarray(sr, dtype=np.int64)
    cdef const int64_t[::1] c = np.ascontiguousarray(dc, dtype=np.int64)
    cdef const int64_t[::1] d = np.ascontiguousarray(dr, dtype=np.int64)
    cdef Py_ssize_t n = a.shape[0], i
    cdef int64_t col, row, c0, c1, r0, r1
    out_arr = np.zeros((n_rows, n_cols), dtype=np.int64)
    cdef int64_t[:, ::1] out = out_arr
    with nogil:
        for i in range(n):
            row = b[i]
            c0 = a[i] if a[i] < c[i] else c[i]
            c1 = c[i] if a[i] < c[i] else a[i]
            for col in range(c0, c1 + 1):
                out[row, col] += 1
            col = c[i]
            if d[i] > b[i]:
                for row in range(b[i] + 1, d[i] + 1):
                    out[row, col] += 1
            elif d[i] < b[i]:
                for row in range(d[i], b[i]):
                    out[row, col] += 1
    return out_arr
