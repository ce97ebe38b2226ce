"""Build script for the optional compiled kernel backend.

The package is pure Python plus one optional Cython extension holding the hot
inner loops (batched strapdown propagation).  If the extension cannot be
built, installation still succeeds and the numpy fallback backend is used.
"""

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "skfnav.kernels._native",
                ["src/skfnav/kernels/_native.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        language_level=3,
    )
else:
    extensions = []

setup(ext_modules=extensions)
