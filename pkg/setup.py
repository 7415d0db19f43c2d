"""Build script for the compiled kernel extension.

The extension is optional: if Cython (or a C compiler) is unavailable the
package falls back to the pure NumPy/Python kernels at import time.

Note: -ffp-contract=off keeps the compiled kernels bit-compatible with the
pure backend (no FMA contraction changing float rounding).
"""

from setuptools import setup

try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "mvrs.kernels._core",
                sources=["src/mvrs/kernels/_core.pyx"],
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
