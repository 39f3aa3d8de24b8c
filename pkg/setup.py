"""Build the optional Cython simplex kernel.

The package works without it: ``pevdr.solver.kernel`` falls back to the
numpy implementation when the extension is missing.
"""
import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("PEVDR_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "pevdr.solver._kernel_ext",
                    ["src/pevdr/solver/_kernel_ext.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
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
