"""Backend selection for the hot loops.

The compiled extension is used when importable; setting ``MVDFQ_BACKEND=python``
forces the NumPy fallback.
"""
import os

if os.environ.get("MVDFQ_BACKEND", "").lower() == "python":
    from . import _kernels_py as impl
    BACKEND = "python"
else:
    try:
        from . import _kernels_ext as impl
        BACKEND = "compiled"
    except ImportError:
        from . import _kernels_py as impl
        BACKEND = "python"

kmer_ids = impl.kmer_ids
sssk_ids = impl.sssk_ids
mismatch_expand = impl.mismatch_expand
sparse_dot = impl.sparse_dot
gram_symmetric = impl.gram_symmetric
gram_cross = impl.gram_cross
nearest_centroid = impl.nearest_centroid
