"""Build script: compiles the optional quadric-solver extension.

The package works without the extension (a pure-NumPy backend is selected at
import time), so any failure to cythonize or compile is non-fatal.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    ext_modules = cythonize(
        [
            Extension(
                "nashstates._kernels._quadric_cy",
                ["src/nashstates/_kernels/_quadric_cy.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level="3",
    )
except Exception as exc:  # pragma: no cover - build-env dependent
    print(f"nashstates: skipping compiled kernels ({exc!r}); "
          "the pure-Python backend will be used", file=sys.stderr)

setup(ext_modules=ext_modules)
