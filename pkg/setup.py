"""Build the optional compiled kernels.

The package works without the extension (pure NumPy/Python fallbacks are
selected at import time), so a failed compile downgrades to a warning
instead of aborting the install.
"""
import sys

from setuptools import setup

try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    extensions = cythonize(
        [
            Extension(
                "semcost.kernels._native",
                ["src/semcost/kernels/_native.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - toolchain-dependent
    print(f"semcost: skipping compiled kernels ({exc}); pure fallback will be used", file=sys.stderr)
    extensions = []

setup(ext_modules=extensions)
