"""Build script: compiles the enumeration kernel extension.

The package works without the extension (a pure Python kernel is selected at
import time), so a failed compile only costs speed.  We therefore try to build
the extension and fall back to a pure distribution when Cython or a C
toolchain is unavailable.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/latshape/_speedup.pyx"],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except Exception as exc:  # pragma: no cover - toolchain-dependent
    import sys

    print(f"latshape: building without compiled kernel ({exc})", file=sys.stderr)

setup(ext_modules=ext_modules)
