"""Build script for the optional compiled kernel core.

The package works without the extension (a numpy fallback is selected at
import time), so compilation failures are non-fatal.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    kernel_ext = Extension(
        "crpower._kernels",
        ["src/crpower/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    kernel_ext.optional = True
    ext_modules = cythonize([kernel_ext], language_level=3)
except ImportError:
    pass

setup(ext_modules=ext_modules)
