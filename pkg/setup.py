"""Build script for the optional compiled kernels.

The package is fully functional without the extension: trackpost._backend
falls back to the pure NumPy kernels when trackpost._ckernels is missing.
Set TRACKPOST_NO_EXT=1 to skip the extension build entirely.
"""

import os
import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Tolerate a missing or broken C toolchain instead of failing the install."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            self._skip(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            self._skip(exc)

    @staticmethod
    def _skip(exc):
        print(
            f"warning: compiled kernels not built ({exc}); "
            "falling back to the pure Python backend",
            file=sys.stderr,
        )


def _extensions():
    if os.environ.get("TRACKPOST_NO_EXT"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "trackpost._ckernels",
        ["src/trackpost/_ckernels.pyx"],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=_extensions(), cmdclass={"build_ext": OptionalBuildExt})
