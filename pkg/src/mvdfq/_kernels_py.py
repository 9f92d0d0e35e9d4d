"""Pure NumPy implementation of the hot kernel loops.

Mirrors ``_kernels_ext`` function for function. Dot products accumulate
sequentially in canonical feature order, so results match the compiled
backend bit for bit.
"""
from concurrent.futures import ThreadPoolExecutor

import numpy as np


def kmer_ids(row, k, A):
    row = np.asarray(row, dtype=np.int64)
    L = row.shape[0] - k + 1
    if L <= 0:
        return np.empty(0, dtype=np.int64)
    ids = np.zeros(L, dtype=np.int64)
    power = 1
    for i in range(k):
        ids += row[i:i + L] * power
        power *= A
    return ids


def sssk_ids(row, t, d, A):
    row = np.asarray(row, dtype=np.int64)
    n = row.shape[0]
    parts = []
    for g1 in range(1, d + 1):
        if t == 2:
            L = n - g1
            if L <= 0:
                break
            parts.append(row[:L] + A * ((g1 - 1) + d * row[g1:g1 + L]))
            continue
        for g2 in range(1, d + 1):
            L = n - g1 - g2
            if L <= 0:
                break
            a1, a2, a3 = row[:L], row[g1:g1 + L], row[g1 + g2:g1 + g2 + L]
            parts.append(a1 + A * ((g1 - 1) + d * (a2 + A * ((g2 - 1) + d * a3))))
    if not parts:
        return np.empty(0, dtype=np.int64)
    return np.concatenate(parts)


def mismatch_expand(ids, counts, k, A, pos, delta):
    """Expand each k-mer to its mutational neighborhood.

    ``pos``/``delta`` are (P, m) substitution patterns, padded with -1 in
    ``pos``; each pattern shifts the symbol at each listed position by
    ``delta`` modulo ``A``. Returns unaggregated (ids, weights), originals first.
    """
    ids = np.asarray(ids, dtype=np.int64)
    counts = np.asarray(counts, dtype=np.float64)
    powers = A ** np.arange(k, dtype=np.int64)
    digits = (ids[:, None] // powers[None, :]) % A
    out_ids = [ids]
    for p_row, d_row in zip(pos, delta):
        nid = ids.copy()
        for p, dv in zip(p_row, d_row):
            if p < 0:
                break
            s = digits[:, p]
            nid += (((s + dv) % A) - s) * powers[p]
        out_ids.append(nid)
    return np.concatenate(out_ids), np.tile(counts, len(out_ids))


def sparse_dot(ia, wa, ib, wb):
    _, xa, xb = np.intersect1d(ia, ib, assume_unique=True, return_indices=True)
    if xa.size == 0:
        return 0.0
    return float(np.cumsum(np.asarray(wa)[xa] * np.asarray(wb)[xb])[-1])


def _pair(ids_a, w_a, off_a, i, ids_b, w_b, off_b, j, R):
    s = 0.0
    for r in range(R):
        a0, a1 = off_a[i * R + r], off_a[i * R + r + 1]
        b0, b1 = off_b[j * R + r], off_b[j * R + r + 1]
        s += sparse_dot(ids_a[a0:a1], w_a[a0:a1], ids_b[b0:b1], w_b[b0:b1])
    return s


def gram_symmetric(ids, weights, offsets, N, R, threads=1):
    out = np.zeros((N, N))

    def fill(i):
        for j in range(i, N):
            v = _pair(ids, weights, offsets, i, ids, weights, offsets, j, R)
            out[i, j] = v
            out[j, i] = v

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            list(pool.map(fill, range(N)))
    else:
        for i in range(N):
            fill(i)
    return out


def gram_cross(ids_a, w_a, off_a, M, ids_b, w_b, off_b, N, R, threads=1):
    out = np.zeros((M, N))

    def fill(i):
        for j in range(N):
            out[i, j] = _pair(ids_a, w_a, off_a, i, ids_b, w_b, off_b, j, R)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            list(pool.map(fill, range(M)))
    else:
        for i in range(M):
            fill(i)
    return out


def nearest_centroid(points, centroids):
    """Index of the nearest centroid per point (lowest index on ties) and the squared distance."""
    points = np.asarray(points, dtype=np.float64)
    centroids = np.asarray(centroids, dtype=np.float64)
    M, R = points.shape
    idx = np.empty(M, dtype=np.int64)
    dist = np.empty(M)
    chunk = max(1, 2 ** 20 // max(len(centroids), 1))
    for start in range(0, M, chunk):
        block = points[start:start + chunk]
        d2 = np.zeros((len(block), len(centroids)))
        for r in range(R):
            diff = block[:, r, None] - centroids[None, :, r]
            d2 += diff * diff
        best = np.argmin(d2, axis=1)
        idx[start:start + chunk] = best
        dist[start:start + chunk] = d2[np.arange(len(block)), best]
    return idx, dist
