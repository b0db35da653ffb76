# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled layer-expansion kernel.

Semantics, combination order and per-contribution multiplication chains are
identical to ``_pykernels.expand``; the two must stay bit-compatible.
"""

import numpy as np

from libc.stdint cimport int32_t, int64_t, uint64_t


cdef inline int _code(uint64_t x, uint64_t z, int q) noexcept nogil:
    cdef int bits = <int> (((x >> q) & 1UL) | (((z >> q) & 1UL) << 1))
    if bits == 0:
        return 0
    elif bits == 1:
        return 1
    elif bits == 2:
        return 3
    return 2


def expand(uint64_t[::1] xs, uint64_t[::1] zs, double[::1] cs,
           int32_t[::1] gq0, int32_t[::1] gq1, uint64_t[::1] gsup,
           int64_t[:, ::1] row_start, int64_t[:, ::1] row_len,
           uint64_t[::1] rt_x, uint64_t[::1] rt_z, double[::1] rt_amp):
    """Expand sources through one layer; returns (tx, tz, amp, src) arrays."""
    cdef Py_ssize_t n_src = cs.shape[0]
    cdef Py_ssize_t n_gates = gq0.shape[0]
    cdef Py_ssize_t i, out
    cdef int gi, j, pos, k, local
    cdef uint64_t x, z, sup, bx, bz, tx, tz
    cdef double c, amp
    cdef int64_t cnt, total = 0
    cdef int64_t a_start[64]
    cdef int64_t a_len[64]
    cdef int64_t sel[64]
    cdef int64_t r

    with nogil:
        for i in range(n_src):
            x = xs[i]
            z = zs[i]
            sup = x | z
            cnt = 1
            for gi in range(n_gates):
                if gsup[gi] & sup:
                    local = _code(x, z, gq0[gi])
                    if gq1[gi] >= 0:
                        local = local * 4 + _code(x, z, gq1[gi])
                    cnt *= row_len[gi, local]
            total += cnt

    out_x = np.empty(total, dtype=np.uint64)
    out_z = np.empty(total, dtype=np.uint64)
    out_a = np.empty(total, dtype=np.float64)
    out_s = np.empty(total, dtype=np.int64)
    cdef uint64_t[::1] vx = out_x
    cdef uint64_t[::1] vz = out_z
    cdef double[::1] va = out_a
    cdef int64_t[::1] vs = out_s

    out = 0
    with nogil:
        for i in range(n_src):
            x = xs[i]
            z = zs[i]
            c = cs[i]
            sup = x | z
            k = 0
            bx = x
            bz = z
            for gi in range(n_gates):
                if gsup[gi] & sup:
                    local = _code(x, z, gq0[gi])
                    if gq1[gi] >= 0:
                        local = local * 4 + _code(x, z, gq1[gi])
                    a_start[k] = row_start[gi, local]
                    a_len[k] = row_len[gi, local]
                    k += 1
                    bx &= ~gsup[gi]
                    bz &= ~gsup[gi]
            if k == 0:
                vx[out] = x
                vz[out] = z
                va[out] = c
                vs[out] = i
                out += 1
                continue
            for j in range(k):
                sel[j] = 0
            while True:
                tx = bx
                tz = bz
                amp = c
                for j in range(k):
                    r = a_start[j] + sel[j]
                    tx |= rt_x[r]
                    tz |= rt_z[r]
                    amp *= rt_amp[r]
                vx[out] = tx
                vz[out] = tz
                va[out] = amp
                vs[out] = i
                out += 1
                pos = k - 1
                while pos >= 0 and sel[pos] == a_len[pos] - 1:
                    sel[pos] = 0
                    pos -= 1
                if pos < 0:
                    break
                sel[pos] += 1
    return out_x, out_z, out_a, out_s
