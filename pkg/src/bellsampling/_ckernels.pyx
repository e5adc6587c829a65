# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled bit-level kernels; same contract as ``_pykernels``."""

import numpy as np

cimport numpy as cnp
from libc.stdint cimport int64_t, uint8_t, uint64_t

cnp.import_array()


cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


cdef inline int _popcount(uint64_t v) nogil:
    return __builtin_popcountll(v)


def gf2_rref(rows, Py_ssize_t ncols):
    cdef cnp.ndarray[uint64_t, ndim=2] work = np.array(rows, dtype=np.uint64, copy=True, order="C")
    cdef Py_ssize_t m = work.shape[0]
    cdef Py_ssize_t nw = work.shape[1]
    cdef Py_ssize_t r = 0, col, w, i, p, k
    cdef uint64_t bit, tmp
    cdef cnp.ndarray[int64_t, ndim=1] piv = np.empty(min(m, ncols), dtype=np.int64)
    cdef uint64_t[:, ::1] a = work
    with nogil:
        for col in range(ncols):
            if r == m:
                break
            w = col >> 6
            bit = (<uint64_t>1) << (63 - (col & 63))
            p = -1
            for i in range(r, m):
                if a[i, w] & bit:
                    p = i
                    break
            if p < 0:
                continue
            if p != r:
                for k in range(nw):
                    tmp = a[r, k]
                    a[r, k] = a[p, k]
                    a[p, k] = tmp
            for i in range(m):
                if i != r and (a[i, w] & bit):
                    for k in range(nw):
                        a[i, k] ^= a[r, k]
            piv[r] = col
            r += 1
    return work[:r].copy(), piv[:r].copy()


def gf2_reduce(vecs, basis, pivots):
    cdef cnp.ndarray[uint64_t, ndim=2] out = np.array(vecs, dtype=np.uint64, copy=True, order="C")
    cdef uint64_t[:, ::1] o = out
    cdef const uint64_t[:, ::1] b = np.ascontiguousarray(basis, dtype=np.uint64)
    cdef const int64_t[::1] pv = np.ascontiguousarray(pivots, dtype=np.int64)
    cdef Py_ssize_t m = o.shape[0], nw = o.shape[1], nb = pv.shape[0]
    cdef Py_ssize_t i, j, k, w
    cdef uint64_t bit
    with nogil:
        for i in range(m):
            for j in range(nb):
                w = pv[j] >> 6
                bit = (<uint64_t>1) << (63 - (pv[j] & 63))
                if o[i, w] & bit:
                    for k in range(nw):
                        o[i, k] ^= b[j, k]
    return out


def and_parity(a, b, mask):
    cdef const uint64_t[:, ::1] av = np.ascontiguousarray(a, dtype=np.uint64)
    cdef const uint64_t[:, ::1] bv = np.ascontiguousarray(b, dtype=np.uint64)
    cdef const uint64_t[::1] mv = np.ascontiguousarray(mask, dtype=np.uint64)
    cdef Py_ssize_t m = av.shape[0], nw = av.shape[1], i, k
    cdef cnp.ndarray[uint8_t, ndim=1] out = np.empty(m, dtype=np.uint8)
    cdef uint8_t[::1] ov = out
    cdef int c
    with nogil:
        for i in range(m):
            c = 0
            for k in range(nw):
                c += _popcount(av[i, k] & bv[i, k] & mv[k])
            ov[i] = c & 1
    return out


def frame_linear(uint64_t[:, ::1] x, uint64_t[:, ::1] z, qubits, matrix):
    cdef const int64_t[::1] q = np.ascontiguousarray(qubits, dtype=np.int64)
    cdef const uint8_t[:, ::1] mat = np.ascontiguousarray(matrix, dtype=np.uint8)
    cdef Py_ssize_t k = q.shape[0], nw = x.shape[1], w, i, j
    cdef uint64_t src[4]
    cdef uint64_t dst[4]
    cdef uint64_t acc
    if k > 2:
        raise ValueError("frame_linear supports one- and two-qubit maps")
    with nogil:
        for w in range(nw):
            for i in range(k):
                src[i] = x[q[i], w]
                src[k + i] = z[q[i], w]
            for j in range(2 * k):
                acc = 0
                for i in range(2 * k):
                    if mat[j, i]:
                        acc ^= src[i]
                dst[j] = acc
            for i in range(k):
                x[q[i], w] = dst[i]
                z[q[i], w] = dst[k + i]


def xor_bits(uint64_t[:, ::1] rows, Py_ssize_t row, positions):
    cdef const int64_t[::1] pos = np.ascontiguousarray(positions, dtype=np.int64)
    cdef Py_ssize_t i, n = pos.shape[0]
    with nogil:
        for i in range(n):
            rows[row, pos[i] >> 6] ^= (<uint64_t>1) << (pos[i] & 63)


def xor_rows_masked(uint64_t[:, ::1] dst, src, select):
    cdef const uint64_t[:, ::1] s = np.ascontiguousarray(src, dtype=np.uint64)
    cdef const uint8_t[:, ::1] sel = np.ascontiguousarray(select, dtype=np.uint8)
    cdef Py_ssize_t ns = sel.shape[0], nd = sel.shape[1], nw = dst.shape[1], i, j, w
    with nogil:
        for i in range(ns):
            for j in range(nd):
                if sel[i, j]:
                    for w in range(nw):
                        dst[j, w] ^= s[i, w]
