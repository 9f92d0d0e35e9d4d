"""Multivariate direct-feature-quantization (MVDFQ) string kernels."""
from ._core import BACKEND
from .data import DiscreteSequence, MultivariateSequence

__version__ = "0.1.0"
__all__ = ["BACKEND", "DiscreteSequence", "MultivariateSequence"]
