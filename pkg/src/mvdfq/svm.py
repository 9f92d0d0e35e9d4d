"""Binary soft-margin SVM on precomputed kernels, plus one-vs-rest multiclass.

The dual ``min 1/2 a'Qa - e'a  s.t.  y'a = 0, 0 <= a <= C`` with
``Q_ij = y_i y_j K_ij`` is solved by sequential two-coordinate updates.
The working pair is the maximal KKT violator ``i`` plus the partner ``j``
giving the largest second-order objective decrease. Training stops once the
violation gap ``max_{I_up} -y G - min_{I_low} -y G`` drops below ``tol``.

Decision function: ``f(x) = sum_j alpha_j K(x, x_j) + bias`` with signed
``alpha_j = y_j a_j``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (ConvergenceWarning, FormatError, LengthMismatch, NonPsdWarning,
                     SingleClass)
from .gram import GramMatrix, min_eigenvalue

_TAU = 1e-12
REST = "~rest"


@dataclass
class DualSolution:
    alpha: np.ndarray          # unsigned, in [0, C]
    rho: float                 # decision = sum_j y_j a_j K_ij - rho
    gradient: np.ndarray
    iterations: int
    gap: float
    objective: list = field(default_factory=list)  # dual objective -f(a) per iteration, when recorded

    def decision_values(self, K: np.ndarray, y: np.ndarray) -> np.ndarray:
        return K @ (self.alpha * y) - self.rho


def dual_objective(alpha: np.ndarray, gradient: np.ndarray) -> float:
    """``e'a - 1/2 a'Qa`` evaluated from the gradient ``G = Qa - e``."""
    return float(-0.5 * alpha @ (gradient - 1.0))


def solve_dual(K: np.ndarray, y: np.ndarray, C: float, tol: float = 1e-3,
               max_iter: int | None = None, record: bool = False) -> DualSolution:
    K = np.asarray(K, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    if max_iter is None:
        max_iter = max(1_000_000, 100 * n)
    alpha = np.zeros(n)
    G = -np.ones(n)
    Kd = np.diag(K).copy()
    trace = [0.0] if record else []
    gap = np.inf
    it = 0
    while it < max_iter:
        v = -y * G
        up = np.where(y > 0, alpha < C, alpha > 0)
        low = np.where(y > 0, alpha > 0, alpha < C)
        if not up.any() or not low.any():
            gap = 0.0
            break
        i = int(np.argmax(np.where(up, v, -np.inf)))
        m = v[i]
        gap = m - np.min(np.where(low, v, np.inf))
        if gap < tol:
            break
        cand = low & (v < m)
        b = m - v
        a = Kd[i] + Kd - 2.0 * K[i]
        a = np.where(a > 0, a, _TAU)
        j = int(np.argmin(np.where(cand, -(b * b) / a, np.inf)))

        ai, aj = alpha[i], alpha[j]
        quad = Kd[i] + Kd[j] - 2.0 * K[i, j]
        if quad <= 0:
            quad = _TAU
        if y[i] != y[j]:
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            ni, nj = ai + delta, aj + delta
            if diff > 0:
                if nj < 0:
                    nj, ni = 0.0, diff
            elif ni < 0:
                ni, nj = 0.0, -diff
            if diff > 0:
                if ni > C:
                    ni, nj = C, C - diff
            elif nj > C:
                nj, ni = C, C + diff
        else:
            delta = (G[i] - G[j]) / quad
            total = ai + aj
            ni, nj = ai - delta, aj + delta
            if total > C:
                if ni > C:
                    ni, nj = C, total - C
            elif nj < 0:
                nj, ni = 0.0, total
            if total > C:
                if nj > C:
                    nj, ni = C, total - C
            elif ni < 0:
                ni, nj = 0.0, total
        di, dj = ni - ai, nj - aj
        alpha[i], alpha[j] = ni, nj
        G += y * (y[i] * di * K[:, i] + y[j] * dj * K[:, j])
        it += 1
        if record:
            trace.append(dual_objective(alpha, G))
    else:
        warnings.warn(f"SMO stopped after {max_iter} iterations (gap {gap:.3g})", ConvergenceWarning)

    yG = y * G
    at_upper = alpha >= C
    at_lower = alpha <= 0
    free = ~at_upper & ~at_lower
    if free.any():
        rho = float(yG[free].mean())
    else:
        ub_mask = (at_upper & (y < 0)) | (at_lower & (y > 0))
        lb_mask = (at_upper & (y > 0)) | (at_lower & (y < 0))
        ub = yG[ub_mask].min() if ub_mask.any() else np.inf
        lb = yG[lb_mask].max() if lb_mask.any() else -np.inf
        rho = float((ub + lb) / 2) if np.isfinite(ub) and np.isfinite(lb) else 0.0
    return DualSolution(alpha, rho, G, it, float(gap), trace)


@dataclass(frozen=True)
class SvmModel:
    support_ids: tuple
    alphas: np.ndarray   # signed: +a for the positive class, -a for the negative
    bias: float
    C: float
    label_positive: str = "+1"
    label_negative: str = "-1"

    def negated(self) -> "SvmModel":
        return SvmModel(self.support_ids, -self.alphas, -self.bias, self.C,
                        self.label_negative, self.label_positive)


def _gram_parts(gram, n_labels):
    if isinstance(gram, GramMatrix):
        K, ids = gram.values, gram.ids
    else:
        K = np.asarray(gram, dtype=np.float64)
        ids = tuple(str(i) for i in range(len(K)))
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise LengthMismatch(f"gram must be square, got shape {K.shape}")
    if len(K) != n_labels:
        raise LengthMismatch(f"{n_labels} labels for a {len(K)}x{len(K)} gram")
    return K, ids


def check_psd(K: np.ndarray) -> None:
    if len(K) and min_eigenvalue(K) < -1e-6 * max(float(np.trace(K)), 0.0):
        warnings.warn("gram matrix is not positive semidefinite", NonPsdWarning)


def train_svm(gram, labels: Sequence[int], C: float = 1.0, tol: float = 1e-3,
              label_positive: str = "+1", label_negative: str = "-1",
              psd_check: bool = True) -> SvmModel:
    y = np.asarray(labels, dtype=np.float64)
    K, ids = _gram_parts(gram, len(y))
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("binary labels must be +1 or -1")
    if not ((y > 0).any() and (y < 0).any()):
        raise SingleClass("training data holds a single class")
    if C <= 0 or tol <= 0:
        raise ValueError("C and tol must be positive")
    if psd_check:
        check_psd(K)
    sol = solve_dual(K, y, C, tol)
    sv = np.flatnonzero(sol.alpha > 0)
    return SvmModel(tuple(ids[i] for i in sv), sol.alpha[sv] * y[sv], -sol.rho, float(C),
                    label_positive, label_negative)


def decision(model: SvmModel, cross_row, column_ids: Sequence[str] | None = None) -> float:
    row = np.asarray(cross_row, dtype=np.float64)
    if column_ids is not None:
        if len(column_ids) != len(row):
            raise LengthMismatch(f"{len(row)} kernel values for {len(column_ids)} column ids")
        index = {cid: i for i, cid in enumerate(column_ids)}
        try:
            row = row[[index[s] for s in model.support_ids]]
        except KeyError as exc:
            raise LengthMismatch(f"support id {exc.args[0]!r} missing from columns") from None
    elif len(row) != len(model.support_ids):
        raise LengthMismatch(f"row has {len(row)} values, model has {len(model.support_ids)} support points")
    return float(model.alphas @ row + model.bias)


def predict(model: SvmModel, cross_row, column_ids: Sequence[str] | None = None):
    """``(score, label)``; a score of exactly zero goes to the positive class."""
    score = decision(model, cross_row, column_ids)
    return score, (model.label_positive if score >= 0 else model.label_negative)


def train_ovr(gram, labels: Sequence[str], C: float = 1.0, tol: float = 1e-3) -> list[SvmModel]:
    """One binary model per class, sorted by label.

    With exactly two classes the second model is the negation of the first,
    so OVR predictions coincide with the binary decision rule.
    """
    labels = [str(lab) for lab in labels]
    K, _ = _gram_parts(gram, len(labels))
    classes = sorted(set(labels))
    if len(classes) < 2:
        raise SingleClass("one-vs-rest needs at least two classes")
    check_psd(K)
    arr = np.array(labels)
    if len(classes) == 2:
        first = train_svm(gram, np.where(arr == classes[0], 1, -1), C, tol,
                          classes[0], classes[1], psd_check=False)
        return [first, first.negated()]
    return [train_svm(gram, np.where(arr == c, 1, -1), C, tol, c, REST, psd_check=False)
            for c in classes]


def predict_ovr(models: Sequence[SvmModel], cross_row, column_ids: Sequence[str] | None = None):
    """``(label, scores)``: highest score wins, ties go to the smallest label."""
    scores = {m.label_positive: decision(m, cross_row, column_ids) for m in models}
    best = max(scores.values())
    return min(lab for lab, s in scores.items() if s == best), scores


# --- serialization -----------------------------------------------------------

def save_models(models: Sequence[SvmModel], path) -> None:
    lines = []
    for m in models:
        for lab in (m.label_positive, m.label_negative):
            if not lab or any(c.isspace() for c in lab):
                raise FormatError(f"label {lab!r} cannot be serialized (empty or whitespace)")
        lines.append(f"svm v1 C={m.C!r} bias={'%.17g' % m.bias} pos={m.label_positive} neg={m.label_negative}")
        lines += [f"{sid} {'%.17g' % a}" for sid, a in zip(m.support_ids, m.alphas)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_models(path) -> list[SvmModel]:
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not lines:
        raise FormatError(f"{path}: empty model file")
    models, header, sv = [], None, []

    def flush():
        if header is not None:
            ids = tuple(s for s, _ in sv)
            alphas = np.array([a for _, a in sv], dtype=np.float64)
            models.append(SvmModel(ids, alphas, header["bias"], header["C"], header["pos"], header["neg"]))

    for lineno, line in enumerate(lines, 1):
        if line.startswith("svm v1"):
            flush()
            fields = dict(tok.partition("=")[::2] for tok in line.split()[2:])
            try:
                header = {"C": float(fields["C"]), "bias": float(fields["bias"]),
                          "pos": fields["pos"], "neg": fields["neg"]}
            except (KeyError, ValueError):
                raise FormatError(f"{path}:{lineno}: malformed svm header") from None
            sv = []
        elif header is None:
            raise FormatError(f"{path}:{lineno}: support line before svm header")
        else:
            sid, _, alpha = line.rpartition(" ")
            try:
                sv.append((sid, float(alpha)))
            except ValueError:
                raise FormatError(f"{path}:{lineno}: malformed support line") from None
    flush()
    return models
