"""Gram and cross-Gram matrices over discrete sequence datasets.

Row feature vectors are computed once per sequence and packed into flat
CSR-style arrays; the pairwise work is then merge-join dot products done by
the selected backend. Every cell is computed independently, so the result
does not depend on the number of worker threads.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _core
from .data import DiscreteSequence, _parse_header
from .errors import DimensionMismatch, FormatError, MvdfqError, NonFinite
from .kernels import FeatureVector, KernelSpec, features_kernel, sequence_features


@dataclass(frozen=True)
class GramMatrix:
    ids: tuple
    values: np.ndarray

    @property
    def N(self) -> int:
        return len(self.ids)


@dataclass(frozen=True)
class _Packed:
    ids: np.ndarray
    weights: np.ndarray
    offsets: np.ndarray
    N: int
    R: int
    features: list


def featurize(dataset: Sequence[DiscreteSequence], spec: KernelSpec, R: int | None = None) -> _Packed:
    feats = []
    for seq in dataset:
        if R is None:
            R = seq.R
        elif seq.R != R:
            raise DimensionMismatch(f"{seq.id}: R={seq.R}, expected {R}")
        try:
            feats.append(sequence_features(seq, spec))
        except MvdfqError as exc:
            raise type(exc)(f"sequence {seq.id!r}: {exc}") from exc
    flat: list[FeatureVector] = [fv for rows in feats for fv in rows]
    sizes = np.array([len(fv) for fv in flat], dtype=np.int64)
    offsets = np.zeros(len(flat) + 1, dtype=np.int64)
    np.cumsum(sizes, out=offsets[1:])
    if flat:
        ids = np.concatenate([fv.ids for fv in flat]).astype(np.int64)
        weights = np.concatenate([fv.weights for fv in flat]).astype(np.float64)
    else:
        ids, weights = np.empty(0, dtype=np.int64), np.empty(0)
    return _Packed(ids, weights, offsets, len(feats), R or 0, feats)


def _self_kernels(packed: _Packed) -> np.ndarray:
    return np.array([features_kernel(f, f) for f in packed.features])


def _normalize(values: np.ndarray, da: np.ndarray, db: np.ndarray) -> np.ndarray:
    denom = np.sqrt(np.outer(da, db))
    out = np.zeros_like(values)
    ok = (da[:, None] > 0) & (db[None, :] > 0)
    out[ok] = values[ok] / denom[ok]
    return out


def _check_unique(dataset) -> tuple:
    ids = tuple(seq.id for seq in dataset)
    if len(set(ids)) != len(ids):
        seen = set()
        dup = next(i for i in ids if i in seen or seen.add(i))
        raise FormatError(f"duplicate sequence id {dup!r}")
    return ids


def compute_gram(dataset: Sequence[DiscreteSequence], spec: KernelSpec, threads: int = 1) -> GramMatrix:
    ids = _check_unique(dataset)
    packed = featurize(dataset, spec)
    values = _core.gram_symmetric(packed.ids, packed.weights, packed.offsets,
                                  packed.N, packed.R, int(threads))
    if spec.normalize:
        diag = np.diag(values).copy()
        values = _normalize(values, diag, diag)
    return GramMatrix(ids, values)


def compute_cross_gram(test: Sequence[DiscreteSequence], train: Sequence[DiscreteSequence],
                       spec: KernelSpec, threads: int = 1) -> np.ndarray:
    R = train[0].R if train else (test[0].R if test else None)
    a = featurize(test, spec, R)
    b = featurize(train, spec, R)
    values = _core.gram_cross(a.ids, a.weights, a.offsets, a.N,
                              b.ids, b.weights, b.offsets, b.N, R or 0, int(threads))
    if spec.normalize:
        values = _normalize(values, _self_kernels(a), _self_kernels(b))
    return values


def min_eigenvalue(gram: GramMatrix | np.ndarray) -> float:
    values = gram.values if isinstance(gram, GramMatrix) else np.asarray(gram, dtype=np.float64)
    if values.size == 0:
        raise ValueError("min_eigenvalue needs N >= 1")
    if not np.all(np.isfinite(values)):
        raise NonFinite("gram matrix contains NaN or Inf")
    return float(np.linalg.eigvalsh(values)[0])


# --- serialization -----------------------------------------------------------

def _row(values) -> str:
    return "\t".join("%.17g" % v for v in values)


def save_gram(gram: GramMatrix, path) -> None:
    lines = [f"gram v1 N={gram.N}", "\t".join(gram.ids)]
    lines += [_row(r) for r in gram.values]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _parse_matrix(lines, start, rows, cols, path) -> np.ndarray:
    body = lines[start:]
    while body and not body[-1].strip():
        body.pop()
    if len(body) != rows:
        raise FormatError(f"{path}: expected {rows} matrix rows, found {len(body)}")
    out = np.zeros((rows, cols))
    for i, line in enumerate(body):
        cells = line.split("\t")
        if len(cells) != cols:
            raise FormatError(f"{path}:{start + i + 1}: expected {cols} values, found {len(cells)}")
        try:
            out[i] = [float(c) for c in cells]
        except ValueError:
            raise FormatError(f"{path}:{start + i + 1}: non-numeric value") from None
    return out


def _split_ids(line: str, count: int, path) -> tuple:
    ids = tuple(line.split("\t")) if count else ()
    if len(ids) != count:
        raise FormatError(f"{path}: header declares {count} ids, found {len(ids)}")
    return ids


def load_gram(path) -> GramMatrix:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise FormatError(f"{path}: empty file")
    hdr = _parse_header(lines[0], "gram v1")
    try:
        N = int(hdr["N"])
    except (KeyError, ValueError):
        raise FormatError(f"{path}: bad gram header") from None
    if len(lines) < 2:
        raise FormatError(f"{path}: missing id line")
    ids = _split_ids(lines[1], N, path)
    return GramMatrix(ids, _parse_matrix(lines, 2, N, N, path))


def save_cross_gram(values: np.ndarray, test_ids, train_ids, path) -> None:
    M, N = values.shape
    lines = [f"cross-gram v1 M={M} N={N}", "\t".join(test_ids), "\t".join(train_ids)]
    lines += [_row(r) for r in values]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_cross_gram(path):
    """Returns ``(test_ids, train_ids, values)``."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise FormatError(f"{path}: empty file")
    hdr = _parse_header(lines[0], "cross-gram v1")
    try:
        M, N = int(hdr["M"]), int(hdr["N"])
    except (KeyError, ValueError):
        raise FormatError(f"{path}: bad cross-gram header") from None
    if len(lines) < 3:
        raise FormatError(f"{path}: missing id lines")
    test_ids = _split_ids(lines[1], M, path)
    train_ids = _split_ids(lines[2], N, path)
    return test_ids, train_ids, _parse_matrix(lines, 3, M, N, path)
