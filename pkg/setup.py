"""Build script: compiles the optional Cython core.

The package works without the compiled extension (a numpy fallback is
selected at import time), so any failure here degrades to pure Python
instead of breaking the install.
"""

from setuptools import setup, Extension

ext_modules = []
try:
    from Cython.Build import cythonize
    import numpy as np

    ext = Extension(
        "semiweyl._kernels._core",
        ["src/semiweyl/_kernels/_core.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    ext_modules = cythonize([ext], language_level=3)
except Exception as exc:  # pragma: no cover - build-environment dependent
    print("semiweyl: skipping compiled core (%s); using the numpy fallback" % exc)

setup(ext_modules=ext_modules)
