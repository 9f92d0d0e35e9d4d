"""Synthetic multivariate AR(1) corpus for smoke and acceptance runs.

Sequence ``s`` of class ``c`` has, in every dimension ``r``, a stationary
AR(1) process with unit marginal variance

    z_t = phi[c, r] * z_{t-1} + sqrt(1 - phi[c, r]**2) * e_t,   e_t ~ N(0, 1),
    z_0 ~ N(0, 1),

observed through additive Gaussian noise ``x_t = z_t + noise * u_t``
(``noise = 0.3`` by default). Coefficients come from the fixed table
``AR_COEFFS`` as ``phi[c, r] = AR_COEFFS[(c + r) % len(AR_COEFFS)]``, so the
classes differ only in temporal dynamics and not in marginal scale.
Sequence ``j`` of each class gets group key ``g{j % groups}``.
Randomness: ``numpy.random.Generator(PCG64(seed))``, drawn class by class.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .data import MultivariateSequence

AR_COEFFS = (0.9, 0.5, 0.1, -0.3, -0.7, 0.7, 0.3, -0.1, -0.5)


def ar_coefficients(classes: int, R: int) -> np.ndarray:
    if classes > len(AR_COEFFS):
        raise ValueError(f"at most {len(AR_COEFFS)} classes are supported")
    return np.array([[AR_COEFFS[(c + r) % len(AR_COEFFS)] for r in range(R)]
                     for c in range(classes)])


def generate(per_class: int = 20, classes: int = 3, R: int = 3, n: int = 300,
             seed: int = 0, noise: float = 0.3, groups: int = 5) -> list[MultivariateSequence]:
    rng = np.random.Generator(np.random.PCG64(seed))
    phi = ar_coefficients(classes, R)
    out = []
    for c in range(classes):
        scale = np.sqrt(1.0 - phi[c] ** 2)
        for j in range(per_class):
            e = rng.standard_normal((R, n))
            z = np.empty((R, n))
            if n:
                z[:, 0] = e[:, 0]
            for t in range(1, n):
                z[:, t] = phi[c] * z[:, t - 1] + scale * e[:, t]
            x = z + noise * rng.standard_normal((R, n))
            out.append(MultivariateSequence(f"s{len(out):04d}", f"c{c}", x, f"g{j % groups}"))
    return out


def write_corpus(dataset, out_dir) -> Path:
    """Write one time-major CSV per sequence plus ``manifest.tsv``; returns the manifest path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = ["id\tlabel\tgroup\tpath"]
    for seq in dataset:
        name = f"{seq.id}.csv"
        text = "\n".join(",".join("%.17g" % v for v in col) for col in seq.values.T)
        (out_dir / name).write_text(text + ("\n" if text else ""), encoding="utf-8")
        rows.append(f"{seq.id}\t{seq.label}\t{seq.group}\t{name}")
    manifest = out_dir / "manifest.tsv"
    manifest.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return manifest
