"""Build script: compiles the optional CG kernel extension.

The package works without the extension (a NumPy fallback is selected at
import time), so a missing Cython/compiler only costs speed, not features.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/padx/kernels/_cg.pyx"],
        language_level=3,
    )
    include_dirs = [numpy.get_include()]
except ImportError:
    print("padx: Cython or NumPy unavailable at build time; "
          "building without the compiled CG kernel (NumPy fallback will be used).")
    include_dirs = []

setup(ext_modules=ext_modules, include_dirs=include_dirs)
