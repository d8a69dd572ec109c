"""Build script: compiles the tree/SMO kernels when a toolchain is available.

The package works without the extension (a pure-Python backend is selected
at import time), so a failed compile degrades to a warning instead of
aborting the install.
"""

import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the extension if possible; fall back to pure Python otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, broken cython, ...
            print(f"WARNING: building the compiled kernels failed ({exc}); "
                  "the pure-Python backend will be used.", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"WARNING: {ext.name} failed to compile ({exc}); "
                  "the pure-Python backend will be used.", file=sys.stderr)


def extensions():
    import os
    if not os.path.exists("src/lifespace/learn/_core.pyx"):
        return []
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []
    ext = Extension(
        "lifespace.learn._core",
        sources=["src/lifespace/learn/_core.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], language_level=3)


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": OptionalBuildExt},
)
