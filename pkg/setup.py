# Builds the optional compiled kernels; the package falls back to numpy without them.
import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("DELTADIV_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "deltadiv._ckernels",
                    ["src/deltadiv/_ckernels.pyx"],
                    include_dirs=[np.get_include(), "src/deltadiv"],
                    language="c++",
                    extra_compile_args=["-O3", "-std=c++17"],
                )
            ],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )

setup(ext_modules=ext_modules)
