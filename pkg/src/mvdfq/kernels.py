"""k-mer feature maps over symbol rows and the multivariate row-sum kernel.

Feature ids are canonical integers. A k-mer ``(s_1, ..., s_k)`` over an
alphabet of size ``A`` encodes to ``sum(s_i * A**(i-1))``. SSSK samples
``(a_1, d_1, a_2[, d_2, a_3])`` encode positionally over the mixed radix
``(A, d, A[, d, A])`` with the first component least significant and gaps
stored as ``d_i - 1``.

Feature vectors keep ids sorted, and dot products accumulate in that order,
so ``K(X, Y) == K(Y, X)`` holds exactly in floating point.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import _core
from .data import DiscreteSequence
from .errors import (AlphabetMismatch, DimensionMismatch, InvalidParams, NegativeWeight,
                     SymbolOutOfRange)

SPECTRUM = "spectrum"
MISMATCH = "mismatch"
SSSK = "sssk"
_MAX_ID = 2 ** 62


@dataclass(frozen=True)
class KernelSpec:
    base: str = SPECTRUM
    alphabet_size: int = 34
    k: int = 6
    m: int = 1
    t: int = 3
    d: int = 5
    manifold: bool = False
    normalize: bool = False

    def __post_init__(self):
        if self.alphabet_size < 1:
            raise InvalidParams("alphabet_size must be positive")
        if self.base in (SPECTRUM, MISMATCH):
            if self.k < 1:
                raise InvalidParams(f"k must be >= 1, got {self.k}")
            if self.base == MISMATCH and not 0 <= self.m < self.k:
                raise InvalidParams(f"mismatch kernel needs 0 <= m < k, got m={self.m}, k={self.k}")
            if self.alphabet_size ** self.k > _MAX_ID:
                raise InvalidParams(f"alphabet {self.alphabet_size} ** k={self.k} overflows 64-bit feature ids")
        elif self.base == SSSK:
            if self.t not in (2, 3):
                raise InvalidParams(f"sssk needs t in {{2, 3}}, got {self.t}")
            if self.d < 1:
                raise InvalidParams(f"sssk needs d >= 1, got {self.d}")
            if self.alphabet_size ** self.t * self.d ** (self.t - 1) > _MAX_ID:
                raise InvalidParams("sssk feature space overflows 64-bit feature ids")
        else:
            raise InvalidParams(f"unknown base kernel {self.base!r}")


@dataclass(frozen=True)
class FeatureVector:
    """Sparse feature map: sorted ``ids`` with matching ``weights``.

    ``total`` is the sum of raw (pre-embedding) weights.
    """

    ids: np.ndarray
    weights: np.ndarray
    total: float
    embedded: bool = False

    def __len__(self):
        return len(self.ids)

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.ids.tolist(), self.weights.tolist()))

    @classmethod
    def empty(cls) -> "FeatureVector":
        return cls(np.empty(0, dtype=np.int64), np.empty(0), 0.0)


def encode_kmer(kmer: Sequence[int], alphabet_size: int) -> int:
    return sum(int(s) * alphabet_size ** i for i, s in enumerate(kmer))


def decode_kmer(fid: int, k: int, alphabet_size: int) -> tuple[int, ...]:
    out = []
    for _ in range(k):
        fid, s = divmod(fid, alphabet_size)
        out.append(s)
    return tuple(out)


def decode_sssk(fid: int, t: int, d: int, alphabet_size: int) -> tuple[int, ...]:
    fid, a = divmod(fid, alphabet_size)
    out = [a]
    for _ in range(t - 1):
        fid, g = divmod(fid, d)
        fid, a = divmod(fid, alphabet_size)
        out += [g + 1, a]
    return tuple(out)


def _as_row(row, alphabet_size: int) -> np.ndarray:
    row = np.ascontiguousarray(row, dtype=np.int64)
    if row.ndim != 1:
        raise ValueError("a row must be 1-D")
    if row.size and (row.min() < 0 or row.max() >= alphabet_size):
        bad = row[(row < 0) | (row >= alphabet_size)][0]
        raise SymbolOutOfRange(f"symbol {int(bad)} outside alphabet of size {alphabet_size}")
    return row


def _counted(ids: np.ndarray) -> FeatureVector:
    if ids.size == 0:
        return FeatureVector.empty()
    uniq, counts = np.unique(ids, return_counts=True)
    return FeatureVector(uniq, counts.astype(np.float64), float(ids.size))


def spectrum_features(row, k: int, alphabet_size: int) -> FeatureVector:
    KernelSpec(SPECTRUM, alphabet_size, k=k)
    row = _as_row(row, alphabet_size)
    return _counted(_core.kmer_ids(row, k, alphabet_size))


@lru_cache(maxsize=64)
def _mismatch_patterns(k: int, m: int, alphabet_size: int):
    pos, delta = [], []
    for size in range(1, m + 1):
        for combo in itertools.combinations(range(k), size):
            for shift in itertools.product(range(1, alphabet_size), repeat=size):
                pos.append(list(combo) + [-1] * (m - size))
                delta.append(list(shift) + [0] * (m - size))
    width = max(m, 1)
    pos = np.array(pos, dtype=np.int64).reshape(-1, width)
    delta = np.array(delta, dtype=np.int64).reshape(-1, width)
    pos.setflags(write=False)
    delta.setflags(write=False)
    return pos, delta


def neighborhood_size(k: int, m: int, alphabet_size: int) -> int:
    from math import comb
    return sum(comb(k, i) * (alphabet_size - 1) ** i for i in range(m + 1))


def mismatch_features(row, k: int, m: int, alphabet_size: int) -> FeatureVector:
    KernelSpec(MISMATCH, alphabet_size, k=k, m=m)
    spec = spectrum_features(row, k, alphabet_size)
    if m == 0 or len(spec) == 0:
        return spec
    pos, delta = _mismatch_patterns(k, m, alphabet_size)
    ids, weights = _core.mismatch_expand(spec.ids, spec.weights, k, alphabet_size, pos, delta)
    uniq, inv = np.unique(ids, return_inverse=True)
    summed = np.bincount(inv.ravel(), weights=weights, minlength=len(uniq))
    return FeatureVector(uniq, summed, float(summed.sum()))


def sssk_features(row, t: int, d: int, alphabet_size: int) -> FeatureVector:
    KernelSpec(SSSK, alphabet_size, t=t, d=d)
    row = _as_row(row, alphabet_size)
    return _counted(_core.sssk_ids(row, t, d, alphabet_size))


def manifold_embed(phi: FeatureVector) -> FeatureVector:
    """L1-normalize then take square roots, so dot products become Bhattacharyya affinities."""
    if phi.weights.size and phi.weights.min() < 0:
        raise NegativeWeight("manifold embedding needs non-negative weights")
    total = float(phi.weights.sum())
    if total == 0.0:
        return FeatureVector(phi.ids[:0], phi.weights[:0], 0.0, embedded=True)
    return FeatureVector(phi.ids, np.sqrt(phi.weights / total), phi.total, embedded=True)


def univariate_kernel(fx: FeatureVector, fy: FeatureVector) -> float:
    return float(_core.sparse_dot(fx.ids, fx.weights, fy.ids, fy.weights))


def row_features(row, spec: KernelSpec) -> FeatureVector:
    if spec.base == SPECTRUM:
        phi = spectrum_features(row, spec.k, spec.alphabet_size)
    elif spec.base == MISMATCH:
        phi = mismatch_features(row, spec.k, spec.m, spec.alphabet_size)
    else:
        phi = sssk_features(row, spec.t, spec.d, spec.alphabet_size)
    return manifold_embed(phi) if spec.manifold else phi


def _check_alphabet(seq: DiscreteSequence, spec: KernelSpec) -> None:
    if seq.alphabet_size != spec.alphabet_size:
        raise AlphabetMismatch(
            f"{seq.id}: alphabet size {seq.alphabet_size}, kernel expects {spec.alphabet_size}")


def sequence_features(seq: DiscreteSequence, spec: KernelSpec) -> list[FeatureVector]:
    _check_alphabet(seq, spec)
    rows = seq.shifted_rows()
    return [row_features(rows[r], spec) for r in range(seq.R)]


def features_kernel(fx: Sequence[FeatureVector], fy: Sequence[FeatureVector]) -> float:
    """Sum of per-row dot products over precomputed row features."""
    total = 0.0
    for a, b in zip(fx, fy):
        total += univariate_kernel(a, b)
    return total


def normalized(kxy: float, kxx: float, kyy: float) -> float:
    if kxx <= 0.0 or kyy <= 0.0:
        return 0.0
    return kxy / np.sqrt(kxx * kyy)


def mvdfq_kernel(DX: DiscreteSequence, DY: DiscreteSequence, spec: KernelSpec) -> float:
    if DX.R != DY.R:
        raise DimensionMismatch(f"{DX.id} has R={DX.R}, {DY.id} has R={DY.R}")
    fx = sequence_features(DX, spec)
    fy = sequence_features(DY, spec)
    kxy = features_kernel(fx, fy)
    if not spec.normalize:
        return kxy
    return float(normalized(kxy, features_kernel(fx, fx), features_kernel(fy, fy)))
