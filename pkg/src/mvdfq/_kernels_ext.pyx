# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: k-mer / SSSK id extraction, mismatch expansion,
merge-join sparse dot products and Gram matrix fills.

Same signatures and bit-identical results as ``_kernels_py``.
"""
import numpy as np
cimport numpy as cnp
from cython.parallel import prange
from libc.stdint cimport int64_t

cnp.import_array()


def kmer_ids(const int64_t[::1] row, int k, int64_t A):
    cdef Py_ssize_t n = row.shape[0]
    cdef Py_ssize_t L = n - k + 1
    if L <= 0:
        return np.empty(0, dtype=np.int64)
    out = np.empty(L, dtype=np.int64)
    cdef int64_t[::1] o = out
    cdef Py_ssize_t p, i
    cdef int64_t v, power
    for p in range(L):
        v = 0
        power = 1
        for i in range(k):
            v += row[p + i] * power
            power *= A
        o[p] = v
    return out


def sssk_ids(const int64_t[::1] row, int t, int d, int64_t A):
    cdef Py_ssize_t n = row.shape[0]
    cdef Py_ssize_t total = 0, p, g1, g2, c = 0
    for p in range(n):
        for g1 in range(1, d + 1):
            if p + g1 >= n:
                break
            if t == 2:
                total += 1
            else:
                for g2 in range(1, d + 1):
                    if p + g1 + g2 >= n:
                        break
                    total += 1
    out = np.empty(total, dtype=np.int64)
    cdef int64_t[::1] o = out
    for p in range(n):
        for g1 in range(1, d + 1):
            if p + g1 >= n:
                break
            if t == 2:
                o[c] = row[p] + A * ((g1 - 1) + d * row[p + g1])
                c += 1
            else:
                for g2 in range(1, d + 1):
                    if p + g1 + g2 >= n:
                        break
                    o[c] = row[p] + A * ((g1 - 1) + d * (row[p + g1] + A * ((g2 - 1) + d * row[p + g1 + g2])))
                    c += 1
    return out


def mismatch_expand(ids_in, counts_in, int k, int64_t A, pos_in, delta_in):
    cdef const int64_t[::1] ids = np.ascontiguousarray(ids_in, dtype=np.int64)
    cdef const double[::1] counts = np.ascontiguousarray(counts_in, dtype=np.float64)
    cdef const int64_t[:, ::1] pos = np.ascontiguousarray(pos_in, dtype=np.int64)
    cdef const int64_t[:, ::1] delta = np.ascontiguousarray(delta_in, dtype=np.int64)
    cdef Py_ssize_t U = ids.shape[0], P = pos.shape[0], mm = pos.shape[1]
    out_ids = np.empty(U * (P + 1), dtype=np.int64)
    out_w = np.empty(U * (P + 1), dtype=np.float64)
    cdef int64_t[::1] oi = out_ids
    cdef double[::1] ow = out_w
    cdef int64_t[::1] powers = np.empty(k, dtype=np.int64)
    cdef int64_t[::1] digits = np.empty(k, dtype=np.int64)
    cdef Py_ssize_t u, q, x, i
    cdef int64_t v, s, nid, pw = 1
    for i in range(k):
        powers[i] = pw
        pw *= A
    for u in range(U):
        oi[u] = ids[u]
        ow[u] = counts[u]
    for u in range(U):
        v = ids[u]
        for i in range(k):
            digits[i] = v % A
            v //= A
        for q in range(P):
            nid = ids[u]
            for x in range(mm):
                if pos[q, x] < 0:
                    break
                s = digits[pos[q, x]]
                nid += (((s + delta[q, x]) % A) - s) * powers[pos[q, x]]
            oi[U + q * U + u] = nid
            ow[U + q * U + u] = counts[u]
    return out_ids, out_w


cdef inline double _dot(const int64_t[::1] ia, const double[::1] wa, Py_ssize_t a0, Py_ssize_t a1,
                        const int64_t[::1] ib, const double[::1] wb, Py_ssize_t b0, Py_ssize_t b1) noexcept nogil:
    cdef double s = 0.0
    cdef int64_t x, y
    while a0 < a1 and b0 < b1:
        x = ia[a0]
        y = ib[b0]
        if x == y:
            s += wa[a0] * wb[b0]
            a0 += 1
            b0 += 1
        elif x < y:
            a0 += 1
        else:
            b0 += 1
    return s


def sparse_dot(ia, wa, ib, wb):
    cdef const int64_t[::1] a = np.ascontiguousarray(ia, dtype=np.int64)
    cdef const int64_t[::1] b = np.ascontiguousarray(ib, dtype=np.int64)
    cdef const double[::1] x = np.ascontiguousarray(wa, dtype=np.float64)
    cdef const double[::1] y = np.ascontiguousarray(wb, dtype=np.float64)
    return _dot(a, x, 0, a.shape[0], b, y, 0, b.shape[0])


def gram_symmetric(const int64_t[::1] ids, const double[::1] weights, const int64_t[::1] offsets,
                   Py_ssize_t N, Py_ssize_t R, int threads=1):
    out = np.zeros((N, N), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j, r, ri, rj
    cdef double s
    cdef int nt = max(threads, 1)
    for i in prange(N, nogil=True, schedule="dynamic", num_threads=nt):
        for j in range(i, N):
            s = 0.0
            for r in range(R):
                ri = i * R + r
                rj = j * R + r
                s = s + _dot(ids, weights, offsets[ri], offsets[ri + 1],
                             ids, weights, offsets[rj], offsets[rj + 1])
            o[i, j] = s
            o[j, i] = s
    return out


def gram_cross(const int64_t[::1] ids_a, const double[::1] w_a, const int64_t[::1] off_a, Py_ssize_t M,
               const int64_t[::1] ids_b, const double[::1] w_b, const int64_t[::1] off_b, Py_ssize_t N,
               Py_ssize_t R, int threads=1):
    out = np.zeros((M, N), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j, r, ri, rj
    cdef double s
    cdef int nt = max(threads, 1)
    for i in prange(M, nogil=True, schedule="dynamic", num_threads=nt):
        for j in range(N):
            s = 0.0
            for r in range(R):
                ri = i * R + r
                rj = j * R + r
                s = s + _dot(ids_a, w_a, off_a[ri], off_a[ri + 1],
                             ids_b, w_b, off_b[rj], off_b[rj + 1])
            o[i, j] = s
    return out


def nearest_centroid(points_in, centroids_in):
    cdef const double[:, ::1] X = np.ascontiguousarray(points_in, dtype=np.float64)
    cdef const double[:, ::1] Cn = np.ascontiguousarray(centroids_in, dtype=np.float64)
    cdef Py_ssize_t M = X.shape[0], R = X.shape[1], D = Cn.shape[0]
    idx = np.empty(M, dtype=np.int64)
    dist = np.empty(M, dtype=np.float64)
    cdef int64_t[::1] oi = idx
    cdef double[::1] od = dist
    cdef Py_ssize_t p, c, r, best
    cdef double s, diff, bd
    with nogil:
        for p in range(M):
            best = 0
            bd = 0.0
            for c in range(D):
                s = 0.0
                for r in range(R):
                    diff = X[p, r] - Cn[c, r]
                    s = s + diff * diff
                if c == 0 or s < bd:
                    bd = s
                    best = c
            oi[p] = best
            od[p] = bd
    return idx, dist
