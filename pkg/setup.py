import os

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if os.environ.get("GAZESCREEN_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        # the pure-Python fallback in gazescreen._fallback is used instead
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "gazescreen._speedups",
                    ["src/gazescreen/_speedups.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={
                "language_level": 3,
                "boundscheck": False,
                "wraparound": False,
                "initializedcheck": False,
                "cdivision": True,
            },
        )

setup(ext_modules=ext_modules)
