"""Builds the optional compiled kernel core.

The package works without it (a pure-numpy fallback is selected at import
time); the extension exists because mesh distance queries, ray parity tests
and voxel interpolation are the hot inner loops of voxelization and of the
training losses.
"""

import numpy
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the Cython core, but never fail the install over it."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # no compiler / cython missing
            print(f"WARNING: compiled kernels skipped ({exc}); "
                  "mdkit will use the pure-numpy fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"WARNING: building {ext.name} failed ({exc}); "
                  "mdkit will use the pure-numpy fallback")


try:
    from Cython.Build import cythonize
    extensions = cythonize(
        [Extension(
            "mdkit.kernels._fastcore",
            ["src/mdkit/kernels/_fastcore.pyx"],
            include_dirs=[numpy.get_include()],
            extra_compile_args=["-O3"],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        )],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions, cmdclass={"build_ext": optional_build_ext})
