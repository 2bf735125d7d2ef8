"""Build hook for the optional compiled kernel.

The package works without it; ``tdqo.kernels`` falls back to the
pure-Python implementation when the extension is missing.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("TDQO_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "tdqo._fpkernel",
                    ["src/tdqo/_fpkernel.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
