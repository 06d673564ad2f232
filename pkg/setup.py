"""Build the optional Cython kernels.

If Cython or a C compiler is missing the package still installs and
``lrqd._backend`` falls back to the pure-Python kernels.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("LRQD_NO_EXT", "") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "lrqd._kernels",
                    ["src/lrqd/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
