"""Build script for the optional compiled kernel extension.

The package is pure Python plus one Cython extension holding the triplet-loss
batch kernels. When Cython or a C compiler is unavailable the extension is
skipped and the NumPy fallback in stylokit._kernels is used at runtime.
"""

from setuptools import setup

try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "stylokit._kernels._ckernels",
                ["src/stylokit/_kernels/_ckernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
        },
    )

setup(ext_modules=ext_modules)
