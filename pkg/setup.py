"""Build script for the optional compiled kernels.

The extension is optional: if Cython or a C compiler is missing the package
still installs and falls back to the pure-Python kernels at import time.
"""
from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "crstego._ckernels",
                ["src/crstego/_ckernels.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
