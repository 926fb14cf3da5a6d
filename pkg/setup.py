import numpy as np
from setuptools import setup
from setuptools.extension import Extension

ext = Extension(
    "d2dcachesim._kernels._native",
    ["src/d2dcachesim/_kernels/_native.pyx"],
    include_dirs=[np.get_include()],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
)

try:
    from Cython.Build import cythonize

    ext_modules = cythonize([ext], compiler_directives={"language_level": 3})
except ImportError:
    # Pure-Python kernels take over at import time; the wheel still works.
    ext_modules = []

setup(ext_modules=ext_modules)
