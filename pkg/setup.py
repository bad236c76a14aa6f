"""Build script: compiles the Cython jet kernels when Cython is available.

The package works without the extension; confflat.jets falls back to the
numpy kernels at import time.
"""
from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "confflat.jets._taylor_cy",
                ["src/confflat/jets/_taylor_cy.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level="3",
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    print(f"confflat: building without compiled jet kernels ({exc})")

setup(ext_modules=ext_modules)
