"""Build script: compiles the optional Cython hot-loop core.

The package works without the extension (a numpy fallback is selected at
import time), so a failed compile degrades to a warning instead of
breaking the install.
"""

import sys

from setuptools import Extension, setup


def extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError as exc:
        print(f"warning: Cython/numpy unavailable ({exc}); "
              "building pure-python wheel", file=sys.stderr)
        return []
    ext = Extension(
        "hartogs._backend._core",
        sources=["src/hartogs/_backend/_core.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=extensions())
