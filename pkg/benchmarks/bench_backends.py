"""Compare the compiled kernel core against the NumPy fallback.

    python3 benchmarks/bench_backends.py [--N 60] [--R 13] [--n 500] [--k 6] [--repeat 3]

Times feature packing once, then Gram computation, a cross-Gram block, and
VQ nearest-centroid assignment on each backend, and checks the outputs are
bit-identical.
"""
import argparse
import time

import numpy as np

from mvdfq import _kernels_py
from mvdfq.gram import featurize
from mvdfq.kernels import KernelSpec
from mvdfq.quantize import apply_dfq, fit_uniform_quantizer
from mvdfq.synth import generate

try:
    from mvdfq import _kernels_ext
except ImportError:
    _kernels_ext = None


def best_of(fn, repeat):
    times, out = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=60)
    ap.add_argument("--R", type=int, default=13)
    ap.add_argument("--n", type=int, default=500)
    ap.add_argument("--k", type=int, default=6)
    ap.add_argument("--kernel", default="spectrum", choices=("spectrum", "mismatch", "sssk"))
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    if _kernels_ext is None:
        raise SystemExit("compiled extension not built; run `pip install -e . --no-build-isolation`")

    data = generate(per_class=-(-args.N // 3), classes=3, R=args.R, n=args.n, seed=0)[:args.N]
    q = fit_uniform_quantizer(data, 32)
    dfq = [apply_dfq(q, x) for x in data]
    spec = KernelSpec(args.kernel, q.alphabet_size, k=args.k, m=1, t=3, d=5)
    t0 = time.perf_counter()
    p = featurize(dfq, spec)
    print(f"featurize: {time.perf_counter() - t0:.3f}s  ({len(p.ids)} stored features)")

    pts = np.concatenate([x.values for x in data], axis=1).T.copy()
    cents = pts[np.random.default_rng(0).choice(len(pts), 256, replace=False)]
    half = args.N // 2
    a_end = p.offsets[half * args.R]
    cases = {
        "gram": lambda m: m.gram_symmetric(p.ids, p.weights, p.offsets, p.N, p.R, args.threads),
        "cross-gram": lambda m: m.gram_cross(p.ids[:a_end], p.weights[:a_end], p.offsets[:half * args.R + 1],
                                             half, p.ids, p.weights, p.offsets, p.N, p.R, args.threads),
        "nearest-centroid": lambda m: m.nearest_centroid(pts, cents),
    }
    print(f"{'case':<18}{'python':>10}{'compiled':>10}{'speedup':>9}  identical")
    for name, fn in cases.items():
        tp, op = best_of(lambda: fn(_kernels_py), args.repeat)
        tc, oc = best_of(lambda: fn(_kernels_ext), args.repeat)
        if isinstance(op, tuple):
            same = all(np.array_equal(a, b) for a, b in zip(op, oc))
        else:
            same = np.array_equal(op, oc)
        print(f"{name:<18}{tp:>9.3f}s{tc:>9.3f}s{tp / tc:>8.1f}x  {same}")


if __name__ == "__main__":
    main()
