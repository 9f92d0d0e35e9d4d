import os

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; the NumPy fallback is used at runtime
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("MVDFQ_NO_EXT"):
    ext_modules = cythonize(
        [
            Extension(
                "mvdfq._kernels_ext",
                ["src/mvdfq/_kernels_ext.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                # no FMA contraction: keeps dot products bit-identical to the NumPy path
                extra_compile_args=["-O3", "-fopenmp", "-ffp-contract=off"],
                extra_link_args=["-fopenmp"],
                optional=True,
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
