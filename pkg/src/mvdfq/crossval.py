"""End-to-end pipeline (quantize -> kernel -> SVM) and k-fold cross-validation.

Quantizers, codebooks and SVMs are fit on the training folds only; test
values outside the training range fall into the sentinel symbols.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .data import DiscreteSequence, MultivariateSequence
from .errors import InvalidParams, TooFewPerClass, UnknownGroupKey
from .gram import GramMatrix, compute_cross_gram, compute_gram
from .kernels import KernelSpec
from .metrics import EvalReport, evaluate, roc50
from .quantize import (Codebook, apply_dfq, apply_vq, fit_kmeans_quantizer,
                       fit_uniform_quantizer, fit_vq_codebook)
from .svm import predict_ovr, train_ovr

QUANTIZERS = ("uniform", "kmeans", "vq")


@dataclass(frozen=True)
class PipelineConfig:
    quantizer: str = "uniform"
    bins: int = 32
    codebook_size: int = 2048
    max_iter: int = 100
    kernel: str = "spectrum"
    k: int | None = None          # None: 6 for DFQ, 5 for VQ
    m: int = 1
    t: int = 3
    d: int = 5
    manifold: bool = False
    normalize: bool = False
    C: float = 1.0
    tol: float = 1e-3
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.quantizer not in QUANTIZERS:
            raise InvalidParams(f"quantizer must be one of {QUANTIZERS}")

    @property
    def resolved_k(self) -> int:
        if self.k is not None:
            return self.k
        return 5 if self.quantizer == "vq" else 6

    def kernel_spec(self, alphabet_size: int) -> KernelSpec:
        return KernelSpec(self.kernel, alphabet_size, k=self.resolved_k, m=self.m, t=self.t,
                          d=self.d, manifold=self.manifold, normalize=self.normalize)


def fit_representation(train: Sequence[MultivariateSequence], config: PipelineConfig):
    if config.quantizer == "uniform":
        return fit_uniform_quantizer(train, config.bins)
    if config.quantizer == "kmeans":
        return fit_kmeans_quantizer(train, config.bins, config.max_iter, config.seed)
    return fit_vq_codebook(train, config.codebook_size, config.max_iter, config.seed)


def discretize(model, dataset: Sequence[MultivariateSequence]) -> list[DiscreteSequence]:
    if isinstance(model, Codebook):
        return [apply_vq(model, x) for x in dataset]
    return [apply_dfq(model, x) for x in dataset]


@dataclass
class FoldResult:
    representation: object
    gram: GramMatrix
    models: list            # empty when the training fold holds a single class
    predictions: list
    scores: list            # per test sequence: {class label: decision score}


def run_fold(train: Sequence[MultivariateSequence], test: Sequence[MultivariateSequence],
             config: PipelineConfig) -> FoldResult:
    rep = fit_representation(train, config)
    dtrain, dtest = discretize(rep, train), discretize(rep, test)
    spec = config.kernel_spec(dtrain[0].alphabet_size)
    gram = compute_gram(dtrain, spec, config.threads)
    cross = compute_cross_gram(dtest, dtrain, spec, config.threads)
    classes = sorted({x.label for x in train})
    if len(classes) == 1:
        return FoldResult(rep, gram, [], [classes[0]] * len(test), [{classes[0]: 0.0}] * len(test))
    models = train_ovr(gram, [x.label for x in train], config.C, config.tol)
    preds, scores = [], []
    for row in cross:
        label, s = predict_ovr(models, row, gram.ids)
        preds.append(label)
        scores.append(s)
    return FoldResult(rep, gram, models, preds, scores)


def make_folds(dataset: Sequence[MultivariateSequence], folds: int, seed: int = 0,
               group_mode: bool = False) -> np.ndarray:
    """Fold index per sequence.

    Stratified mode shuffles each class (classes in sorted order) with
    ``PCG64(seed)`` and deals the concatenated list round-robin into folds.
    Group mode gives every distinct group key its own fold, in sorted key order.
    """
    N = len(dataset)
    if group_mode:
        missing = [x.id for x in dataset if not x.group]
        if missing:
            raise UnknownGroupKey(f"sequence {missing[0]!r} has no group key")
        keys = sorted({x.group for x in dataset})
        if len(keys) < 2:
            raise InvalidParams("group cross-validation needs at least two groups")
        index = {g: i for i, g in enumerate(keys)}
        return np.array([index[x.group] for x in dataset], dtype=np.int64)
    if folds < 2:
        raise InvalidParams("folds must be >= 2")
    if N < folds:
        raise TooFewPerClass(f"{N} sequences cannot fill {folds} folds")
    labels = np.array([x.label for x in dataset])
    rng = np.random.Generator(np.random.PCG64(seed))
    order = []
    for lab in sorted(set(labels.tolist())):
        members = np.flatnonzero(labels == lab)
        if len(members) < 2:
            raise TooFewPerClass(f"class {lab!r} has a single member")
        order.extend(members[rng.permutation(len(members))].tolist())
    fold_of = np.empty(N, dtype=np.int64)
    fold_of[order] = np.arange(N) % folds
    return fold_of


@dataclass
class CvResult:
    report: EvalReport
    fold_of: np.ndarray
    predictions: list
    scores: list
    fold_results: list = field(default_factory=list)


def _positive_label(classes):
    for cand in ("+1", "1"):
        if cand in classes:
            return cand
    return classes[0]


def cross_validate(dataset: Sequence[MultivariateSequence], config: PipelineConfig,
                   folds: int = 5, group_mode: bool = False, keep_folds: bool = False) -> CvResult:
    dataset = list(dataset)
    fold_of = make_folds(dataset, folds, config.seed, group_mode)
    preds = [None] * len(dataset)
    scores = [None] * len(dataset)
    kept = []
    for f in range(int(fold_of.max()) + 1):
        test_idx = np.flatnonzero(fold_of == f)
        train_idx = np.flatnonzero(fold_of != f)
        res = run_fold([dataset[i] for i in train_idx], [dataset[i] for i in test_idx], config)
        for i, p, s in zip(test_idx, res.predictions, res.scores):
            preds[i], scores[i] = p, s
        if keep_folds:
            kept.append(res)
    truths = [x.label for x in dataset]
    report = evaluate(preds, truths)
    classes = sorted(set(truths))
    if len(classes) == 2:
        pos = _positive_label(classes)
        ranked = [s.get(pos, 0.0) for s in scores]
        report.roc50 = roc50(ranked, [1 if t == pos else -1 for t in truths])
    return CvResult(report, fold_of, preds, scores, kept)
