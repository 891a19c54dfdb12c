import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "dscflow._kernels._core",
                ["src/dscflow/_kernels/_core.pyx"],
                include_dirs=[np.get_include()],
                # -ffp-contract=off keeps the compiled kernels bit-compatible
                # with the numpy fallback (no FMA reassociation).
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # Cython not available: install pure-Python only, the package falls
    # back to the numpy kernels at import time.
    ext_modules = []

setup(ext_modules=ext_modules)
