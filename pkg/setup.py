"""Build script: compiles the Cython capacity kernel when Cython is available.

The package works without the extension (a numpy fallback is selected at
import time), so a failed extension build is not fatal to installation.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "gamecap._kernels.gba_cy",
                ["src/gamecap/_kernels/gba_cy.pyx"],
            )
        ],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
