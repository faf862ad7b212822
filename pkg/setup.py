"""Build script: compiles the optional RK4 stepping kernel.

The package works without the extension (a NumPy/SciPy fallback is selected
at import time), so any failure here degrades to a pure-Python install.
Set QUTRICAV_NO_EXT=1 to skip the extension build entirely.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("QUTRICAV_NO_EXT"):
    try:
        from Cython.Build import cythonize
        from setuptools import Extension
        import numpy as np

        ext = Extension(
            "qutricav._kernel_cy",
            ["src/qutricav/_kernel_cy.pyx"],
            include_dirs=[np.get_include()],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        )
        ext_modules = cythonize([ext], language_level=3)
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
