"""Builds the optional compiled kernels; the package works without them."""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension("heavytail._kernels", ["src/heavytail/_kernels.pyx"],
                   extra_compile_args=["-O3"])],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
