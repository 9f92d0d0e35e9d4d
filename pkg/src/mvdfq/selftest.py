"""Quick oracle and property battery, runnable without pytest (``mvdfq selftest``)."""
from __future__ import annotations

import numpy as np

from . import oracle
from .data import DiscreteSequence
from .gram import compute_gram, min_eigenvalue
from .kernels import (KernelSpec, features_kernel, manifold_embed, mismatch_features,
                      mvdfq_kernel, sequence_features, spectrum_features, sssk_features,
                      univariate_kernel)
from .metrics import evaluate, roc50
from .quantize import QuantizerModel, UNIFORM
from .svm import train_svm


def _random_seq(rng, name, R, n, A):
    return DiscreteSequence(name, "x", rng.integers(0, A, (R, n)), A)


def check_oracles(rng, trials=50):
    for _ in range(trials):
        A = int(rng.integers(2, 7))
        row = rng.integers(0, A, int(rng.integers(0, 31)))
        k = int(rng.integers(1, 5))
        m = int(rng.integers(0, min(k - 1, 2) + 1))
        t, d = int(rng.integers(2, 4)), int(rng.integers(1, 6))
        if oracle.decoded_kmers(spectrum_features(row, k, A), k, A) != oracle.spectrum(row, k):
            return False, f"spectrum k={k} A={A}"
        if oracle.decoded_kmers(mismatch_features(row, k, m, A), k, A) != oracle.mismatch(row, k, m, A):
            return False, f"mismatch k={k} m={m} A={A}"
        if oracle.decoded_sssk(sssk_features(row, t, d, A), t, d, A) != oracle.sssk(row, t, d):
            return False, f"sssk t={t} d={d} A={A}"
    return True, f"{trials} rows"


def check_reductions(rng, trials=50):
    for _ in range(trials):
        A, k = int(rng.integers(2, 8)), int(rng.integers(1, 6))
        row = rng.integers(0, A, int(rng.integers(0, 40)))
        a, b = mismatch_features(row, k, 0, A), spectrum_features(row, k, A)
        if not (np.array_equal(a.ids, b.ids) and np.array_equal(a.weights, b.weights)):
            return False, f"mismatch m=0 vs spectrum, k={k}"
        x, y = _random_seq(rng, "x", 1, 30, A), _random_seq(rng, "y", 1, 30, A)
        spec = KernelSpec("spectrum", A, k=k)
        uni = univariate_kernel(spectrum_features(x.rows[0], k, A), spectrum_features(y.rows[0], k, A))
        if mvdfq_kernel(x, y, spec) != uni:
            return False, "R=1 multivariate vs univariate"
    return True, f"{trials} rows"


def check_decomposition(rng, trials=20):
    for _ in range(trials):
        A, R = int(rng.integers(2, 8)), int(rng.integers(1, 9))
        x, y = _random_seq(rng, "x", R, 40, A), _random_seq(rng, "y", R, 40, A)
        spec = KernelSpec("mismatch", A, k=3, m=1, manifold=bool(rng.integers(2)))
        fx, fy = sequence_features(x, spec), sequence_features(y, spec)
        total = 0.0
        for r in range(R):
            total += univariate_kernel(fx[r], fy[r])
        if mvdfq_kernel(x, y, spec) != total or features_kernel(fx, fy) != features_kernel(fy, fx):
            return False, f"R={R}"
    return True, f"{trials} pairs"


def check_gram_validity(rng):
    data = [_random_seq(rng, f"s{i}", 3, 50, 6) for i in range(10)]
    for base in ("spectrum", "mismatch", "sssk"):
        for manifold in (False, True):
            g = compute_gram(data, KernelSpec(base, 6, k=3, m=1, t=2, d=3, manifold=manifold)).values
            if not np.array_equal(g, g.T):
                return False, f"{base} asymmetric"
            if min_eigenvalue(g) < -1e-9 * np.trace(g):
                return False, f"{base} manifold={manifold} not PSD"
    return True, "spectrum, mismatch, sssk"


def check_manifold(rng):
    for _ in range(20):
        row = rng.integers(0, 5, int(rng.integers(3, 40)))
        phi = manifold_embed(spectrum_features(row, 2, 5))
        if abs(univariate_kernel(phi, phi) - 1.0) > 1e-12:
            return False, "self-affinity != 1"
    return True, "self-affinity 1"


def check_quantizer(rng, trials=2000):
    for _ in range(trials):
        lo = float(rng.normal())
        model = QuantizerModel(UNIFORM, int(rng.integers(1, 40)), np.array([lo]),
                               np.array([lo + float(rng.exponential()) + 1e-6]))
        v = np.sort(rng.normal(lo, 2.0, 8))
        s = model.quantize_row(0, v)
        if np.any(np.diff(s) < 0):
            return False, "not monotone"
        if model.quantize_row(0, model.f_max)[0] != model.B:
            return False, "f_max does not clamp to B"
    return True, f"{trials} models"


def check_svm():
    m = train_svm(np.eye(2), [1, -1], C=10.0)
    if not (np.allclose(m.alphas, [1, -1], atol=1e-6) and abs(m.bias) < 1e-6):
        return False, f"alphas={m.alphas} bias={m.bias}"
    return True, "2-point analytic case"


def check_metrics():
    ok = (roc50([0.9, 0.8, 0.7, 0.6], [1, -1, 1, -1]) == 0.75
          and roc50([2, 1], [1, -1]) == 1.0 and roc50([1, 2], [1, -1]) == 0.0
          and evaluate(["a"] * 4, ["a", "a", "b", "b"]).macro_f1 == 1 / 3)
    return ok, "roc50 and macro-F1 hand cases"


def run(seed: int = 0) -> list[tuple[str, bool, str]]:
    rng = np.random.Generator(np.random.PCG64(seed))
    checks = [("oracles", lambda: check_oracles(rng)),
              ("reductions", lambda: check_reductions(rng)),
              ("decomposition", lambda: check_decomposition(rng)),
              ("gram-validity", lambda: check_gram_validity(rng)),
              ("manifold", lambda: check_manifold(rng)),
              ("quantizer", lambda: check_quantizer(rng)),
              ("svm", check_svm),
              ("metrics", check_metrics)]
    results = []
    for name, fn in checks:
        ok, detail = fn()
        results.append((name, bool(ok), detail))
    return results
