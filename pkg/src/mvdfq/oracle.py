"""Brute-force reference enumerators for the feature maps.

Deliberately naive: plain Python loops over positions and the full k-mer
space, keyed by symbol tuples instead of packed integer ids. Only meant for
small alphabets and short rows in tests and ``selftest``.
"""
from __future__ import annotations

import itertools
from collections import Counter

from .kernels import FeatureVector, decode_kmer, decode_sssk


def spectrum(row, k: int) -> dict[tuple, int]:
    row = [int(s) for s in row]
    return dict(Counter(tuple(row[i:i + k]) for i in range(len(row) - k + 1)))


def mismatch(row, k: int, m: int, alphabet_size: int) -> dict[tuple, int]:
    """Scan all of Σ^k; each candidate counts the row's k-mers within Hamming distance m."""
    observed = [tuple(int(s) for s in row[i:i + k]) for i in range(len(row) - k + 1)]
    out = {}
    for cand in itertools.product(range(alphabet_size), repeat=k):
        hits = sum(1 for kmer in observed
                   if sum(a != b for a, b in zip(cand, kmer)) <= m)
        if hits:
            out[cand] = hits
    return out


def sssk(row, t: int, d: int) -> dict[tuple, int]:
    """All position tuples i_1 < ... < i_t with every gap in 1..d.

    Keys are ``(a_1, g_1, a_2, ..., g_{t-1}, a_t)``.
    """
    row = [int(s) for s in row]
    out = Counter()
    for positions in itertools.combinations(range(len(row)), t):
        gaps = [b - a for a, b in zip(positions, positions[1:])]
        if all(1 <= g <= d for g in gaps):
            key = [row[positions[0]]]
            for g, p in zip(gaps, positions[1:]):
                key += [g, row[p]]
            out[tuple(key)] += 1
    return dict(out)


def dot(a: dict, b: dict) -> float:
    return float(sum(v * b[key] for key, v in a.items() if key in b))


def decoded_kmers(fv: FeatureVector, k: int, alphabet_size: int) -> dict[tuple, float]:
    return {decode_kmer(i, k, alphabet_size): w for i, w in fv.as_dict().items()}


def decoded_sssk(fv: FeatureVector, t: int, d: int, alphabet_size: int) -> dict[tuple, float]:
    return {decode_sssk(i, t, d, alphabet_size): w for i, w in fv.as_dict().items()}
