"""Direct feature quantization (per-dimension binning) and the VQ codebook baseline.

A quantizer maps every real value of dimension ``j`` to a symbol in
``{0, ..., B+1}``: in-range values land in bins ``1..B`` and values outside the
training range map to the sentinels ``0`` (below) and ``B+1`` (above).

All randomness comes from ``numpy.random.Generator(PCG64(seed))``.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _core
from .data import DiscreteSequence, MultivariateSequence, _parse_header
from .errors import (ConstantDimension, DimensionMismatch, EmptyDataset, FormatError,
                     InvalidParams, TooFewDistinctValues, TooFewSamples)

UNIFORM = "uniform"
KMEANS1D = "kmeans1d"


@dataclass(frozen=True)
class QuantizerModel:
    kind: str
    B: int
    f_min: np.ndarray
    f_max: np.ndarray
    cuts: tuple = ()  # kmeans1d only: one sorted array of B-1 cut points per dimension

    @property
    def R(self) -> int:
        return len(self.f_min)

    @property
    def alphabet_size(self) -> int:
        return self.B + 2

    @property
    def delta(self) -> np.ndarray:
        return (self.f_max - self.f_min) / self.B

    def quantize_row(self, dim: int, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=np.float64)
        lo, hi = self.f_min[dim], self.f_max[dim]
        if self.kind == UNIFORM:
            q = np.floor((values - lo) / self.delta[dim])
            sym = np.clip(q, 0, self.B - 1).astype(np.int64) + 1
        else:
            sym = np.searchsorted(self.cuts[dim], values, side="left").astype(np.int64) + 1
        sym[values < lo] = 0
        sym[values > hi] = self.B + 1
        return sym


@dataclass(frozen=True)
class Codebook:
    centroids: np.ndarray  # (D, R)

    @property
    def D(self) -> int:
        return self.centroids.shape[0]

    @property
    def R(self) -> int:
        return self.centroids.shape[1]


def _pooled(dataset: Sequence[MultivariateSequence]) -> np.ndarray:
    if not dataset:
        raise EmptyDataset("dataset is empty")
    R = dataset[0].R
    for seq in dataset:
        if seq.R != R:
            raise DimensionMismatch(f"{seq.id}: R={seq.R}, expected {R}")
    return np.concatenate([seq.values for seq in dataset], axis=1)


def fit_uniform_quantizer(dataset: Sequence[MultivariateSequence], B: int) -> QuantizerModel:
    if B < 1:
        raise InvalidParams("B must be positive")
    X = _pooled(dataset)
    if X.shape[1] == 0:
        raise EmptyDataset("dataset has no observations")
    f_min, f_max = X.min(axis=1), X.max(axis=1)
    flat = np.flatnonzero(f_max <= f_min)
    if flat.size:
        raise ConstantDimension(f"dimension {int(flat[0])} is constant ({f_min[flat[0]]!r})")
    return QuantizerModel(UNIFORM, int(B), f_min, f_max)


def _kmeanspp_1d(x: np.ndarray, B: int, rng: np.random.Generator) -> np.ndarray:
    centers = [x[rng.integers(len(x))]]
    d2 = (x - centers[0]) ** 2
    for _ in range(1, B):
        total = d2.sum()
        if total <= 0:
            idx = rng.integers(len(x))
        else:
            idx = int(np.searchsorted(np.cumsum(d2), rng.random() * total, side="right"))
            idx = min(idx, len(x) - 1)
        centers.append(x[idx])
        d2 = np.minimum(d2, (x - x[idx]) ** 2)
    return np.sort(np.array(centers))


def kmeans_1d(values: np.ndarray, B: int, max_iter: int, rng: np.random.Generator) -> np.ndarray:
    """Sorted 1-D k-means centers (k-means++ seeding, Lloyd until assignments settle)."""
    x = np.sort(np.asarray(values, dtype=np.float64))
    centers = _kmeanspp_1d(x, B, rng)
    bounds = None
    for _ in range(max_iter):
        cuts = (centers[:-1] + centers[1:]) / 2
        new_bounds = np.concatenate(([0], np.searchsorted(x, cuts, side="right"), [len(x)]))
        if bounds is not None and np.array_equal(bounds, new_bounds):
            break
        bounds = new_bounds
        new_centers = centers.copy()
        empty = []
        for c in range(B):
            lo, hi = bounds[c], bounds[c + 1]
            if hi > lo:
                new_centers[c] = x[lo:hi].mean()
            else:
                empty.append(c)
        if empty:
            # farthest points from their own centers become the new centers
            gap = np.abs(x - np.repeat(new_centers, np.diff(bounds)))
            for c in empty:
                far = int(np.argmax(gap))
                new_centers[c] = x[far]
                gap[x == x[far]] = -1.0
        centers = np.sort(new_centers)
    return centers


def fit_kmeans_quantizer(dataset: Sequence[MultivariateSequence], B: int,
                         max_iter: int = 100, seed: int = 0) -> QuantizerModel:
    if B < 1 or max_iter < 1:
        raise InvalidParams("B and max_iter must be positive")
    X = _pooled(dataset)
    if X.shape[1] == 0:
        raise EmptyDataset("dataset has no observations")
    rng = np.random.Generator(np.random.PCG64(seed))
    cuts = []
    for j, row in enumerate(X):
        n_distinct = len(np.unique(row))
        if n_distinct < B:
            raise TooFewDistinctValues(f"dimension {j} has {n_distinct} distinct values, need {B}")
        centers = kmeans_1d(row, B, max_iter, rng)
        c = (centers[:-1] + centers[1:]) / 2
        if np.any(np.diff(c) <= 0):
            raise TooFewDistinctValues(f"dimension {j}: k-means produced coincident centers")
        cuts.append(c)
    return QuantizerModel(KMEANS1D, int(B), X.min(axis=1), X.max(axis=1), tuple(cuts))


def quantize_value(model: QuantizerModel, dim: int, f: float) -> int:
    if not 0 <= dim < model.R:
        raise DimensionMismatch(f"dimension {dim} out of range for R={model.R}")
    return int(model.quantize_row(dim, np.array([f]))[0])


def apply_dfq(model: QuantizerModel, X: MultivariateSequence) -> DiscreteSequence:
    if X.R != model.R:
        raise DimensionMismatch(f"{X.id}: R={X.R}, quantizer expects {model.R}")
    rows = np.empty((X.R, X.n), dtype=np.int64)
    for r in range(X.R):
        rows[r] = model.quantize_row(r, X.values[r])
    return DiscreteSequence(X.id, X.label, rows, model.alphabet_size, 0, X.group)


def fit_vq_codebook(dataset: Sequence[MultivariateSequence], D: int,
                    max_iter: int = 100, seed: int = 0) -> Codebook:
    if D < 1 or max_iter < 1:
        raise InvalidParams("D and max_iter must be positive")
    X = _pooled(dataset).T.copy()
    M = len(X)
    if M < D:
        raise TooFewSamples(f"{M} feature vectors cannot seed {D} codewords")
    rng = np.random.Generator(np.random.PCG64(seed))

    chosen = [int(rng.integers(M))]
    d2 = ((X - X[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, D):
        total = d2.sum()
        if total <= 0:
            idx = int(rng.integers(M))
        else:
            idx = int(np.searchsorted(np.cumsum(d2), rng.random() * total, side="right"))
            idx = min(idx, M - 1)
        chosen.append(idx)
        d2 = np.minimum(d2, ((X - X[idx]) ** 2).sum(axis=1))
    centroids = X[chosen].copy()

    assign = None
    for _ in range(max_iter):
        new_assign, dist = _core.nearest_centroid(X, centroids)
        if assign is not None and np.array_equal(assign, new_assign):
            break
        assign = new_assign
        counts = np.bincount(assign, minlength=D)
        sums = np.zeros_like(centroids)
        np.add.at(sums, assign, X)
        nonempty = counts > 0
        centroids[nonempty] = sums[nonempty] / counts[nonempty, None]
        for c in np.flatnonzero(~nonempty):
            far = int(np.argmax(dist))
            centroids[c] = X[far]
            dist[far] = 0.0
    return Codebook(centroids)


def apply_vq(codebook: Codebook, X: MultivariateSequence) -> DiscreteSequence:
    if X.R != codebook.R:
        raise DimensionMismatch(f"{X.id}: R={X.R}, codebook expects {codebook.R}")
    idx, _ = _core.nearest_centroid(X.values.T, codebook.centroids)
    return DiscreteSequence(X.id, X.label, (idx + 1)[None, :], codebook.D, 1, X.group)


# --- serialization -----------------------------------------------------------

def _fmt(x: float) -> str:
    return "%.17g" % x


def save_quantizer(model: QuantizerModel, path) -> None:
    lines = [f"dfq-quantizer v1 kind={model.kind} R={model.R} B={model.B}"]
    for j in range(model.R):
        line = f"dim {j} min {_fmt(model.f_min[j])} max {_fmt(model.f_max[j])}"
        if model.kind == KMEANS1D:
            line += " cuts" + "".join(" " + _fmt(c) for c in model.cuts[j])
        lines.append(line)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_quantizer(path) -> QuantizerModel:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise FormatError(f"{path}: empty file")
    hdr = _parse_header(lines[0], "dfq-quantizer v1")
    try:
        kind, R, B = hdr["kind"], int(hdr["R"]), int(hdr["B"])
    except (KeyError, ValueError) as exc:
        raise FormatError(f"{path}: bad header: {exc}") from None
    if kind not in (UNIFORM, KMEANS1D):
        raise FormatError(f"{path}: unknown quantizer kind {kind!r}")
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != R:
        raise FormatError(f"{path}: header says R={R}, found {len(body)} dimension lines")
    f_min, f_max, cuts = np.empty(R), np.empty(R), []
    for j, line in enumerate(body):
        tok = line.split()
        if tok[:2] != ["dim", str(j)] or tok[2] != "min" or tok[4] != "max":
            raise FormatError(f"{path}:{j + 2}: malformed dimension line")
        f_min[j], f_max[j] = float(tok[3]), float(tok[5])
        if kind == KMEANS1D:
            if len(tok) < 7 or tok[6] != "cuts" or len(tok) - 7 != B - 1:
                raise FormatError(f"{path}:{j + 2}: expected {B - 1} cut points")
            cuts.append(np.array([float(t) for t in tok[7:]]))
        elif len(tok) != 6:
            raise FormatError(f"{path}:{j + 2}: trailing tokens on uniform dimension line")
    return QuantizerModel(kind, B, f_min, f_max, tuple(cuts))


def save_codebook(codebook: Codebook, path) -> None:
    lines = [f"vq-codebook v1 R={codebook.R} D={codebook.D}"]
    lines += [" ".join(_fmt(v) for v in c) for c in codebook.centroids]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_codebook(path) -> Codebook:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise FormatError(f"{path}: empty file")
    hdr = _parse_header(lines[0], "vq-codebook v1")
    try:
        R, D = int(hdr["R"]), int(hdr["D"])
    except (KeyError, ValueError) as exc:
        raise FormatError(f"{path}: bad header: {exc}") from None
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != D:
        raise FormatError(f"{path}: header says D={D}, found {len(body)} centroid lines")
    cent = np.array([[float(v) for v in ln.split()] for ln in body])
    if cent.shape != (D, R):
        raise FormatError(f"{path}: centroid lines must hold R={R} values each")
    return Codebook(cent)
