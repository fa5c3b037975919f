import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; the package falls back at import time
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("BLFR_NO_EXTENSION"):
    ext_modules = cythonize(
        [
            Extension(
                "blfr._kernels",
                sources=["src/blfr/_kernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                # no FMA contraction: streams must match the pure-Python path bit for bit
                extra_compile_args=["-O2", "-ffp-contract=off"],
                optional=True,
            )
        ],
        language_level="3",
    )

setup(ext_modules=ext_modules)
