import os

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

# Plain IEEE arithmetic only: the compiled kernels must agree bit-for-bit with
# the numpy fallback, so no -ffast-math and no FMA contraction.
extensions = [
    Extension(
        "melshift._kernels",
        ["src/melshift/_kernels.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3", "-ffp-contract=off"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

if os.environ.get("MELSHIFT_NO_EXT"):
    extensions = []

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3", "boundscheck": False, "wraparound": False},
    )
)
