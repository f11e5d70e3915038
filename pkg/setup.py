"""Build script for the optional compiled clustering kernels.

The package works without the extension (a NumPy fallback is selected at
import time); building it just makes regrouping faster on larger corpora.
"""

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "gradmix._kernels._core",
                ["src/gradmix/_kernels/_core.pyx"],
                include_dirs=[np.get_include()],
                # No -ffast-math: the kernels must keep IEEE semantics so
                # tie-breaking and inertia accounting match the fallback.
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
