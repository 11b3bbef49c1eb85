"""Build script: compiles the optional evaluation kernel.

The package works without the compiled extension (a pure-Python kernel is
selected at import time), so any failure to build it downgrades to a
plain-Python install instead of aborting.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """build_ext that gives up quietly if the C toolchain is unusable."""

    def run(self):
        try:
            build_ext.run(self)
        except Exception as exc:  # noqa: BLE001 - any build failure is non-fatal
            self._warn(exc)

    def build_extension(self, ext):
        try:
            build_ext.build_extension(self, ext)
        except Exception as exc:  # noqa: BLE001
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(
            "WARNING: building the compiled evaluation kernel failed "
            f"({exc!r}); falling back to the pure-Python kernel.",
            file=sys.stderr,
        )


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        print(
            "WARNING: Cython not available; installing without the compiled "
            "evaluation kernel.",
            file=sys.stderr,
        )
        return []
    return cythonize(
        [Extension("jetconn._ckernel", ["src/jetconn/_ckernel.pyx"])],
        language_level=3,
    )


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
