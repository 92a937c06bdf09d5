"""Builds the optional compiled simulation kernel.

The package is fully functional without it; alphainvest.backend falls back to
the pure-Python kernel when the extension is missing.
"""
import sys

from setuptools import setup

try:
    from setuptools import Extension
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("alphainvest._fastkern", ["src/alphainvest/_fastkern.pyx"])],
        compiler_directives={"language_level": "3", "boundscheck": False, "wraparound": False},
    )
except ImportError:
    print("cython unavailable; building without the compiled kernel", file=sys.stderr)
    ext_modules = []

setup(ext_modules=ext_modules)
