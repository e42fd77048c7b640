import os

import numpy as np
from setuptools import Extension, setup

# The compiled time-stepping kernel is optional: if Cython or a C compiler is
# missing, the install falls back to the pure-NumPy kernel selected at import.
try:
    if not os.path.exists("src/wavedamp/_kernels_cy.pyx"):
        raise ImportError("kernel source absent")
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "wavedamp._kernels_cy",
                ["src/wavedamp/_kernels_cy.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
