"""Build script: compiles the optional native kernel.

The package works without the extension (a pure-Python kernel is
selected at import time), so any failure here downgrades to a
pure-Python install instead of aborting. Set GOVTREE_NO_EXT=1 to skip
the extension build entirely.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("GOVTREE_NO_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            "src/govtree/_native.pyx",
            compiler_directives={
                "language_level": 3,
                "binding": False,
                "boundscheck": False,
                "wraparound": False,
            },
        )
    except Exception as exc:  # no Cython / no compiler: pure fallback
        print(f"govtree: skipping native kernel build ({exc})")
        ext_modules = []

setup(ext_modules=ext_modules)
