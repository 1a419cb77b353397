"""Build script: compiles the trajectory kernel extension when Cython and a C
compiler are available.  The package works without it (pure-Python kernel is
selected at import), so a failed extension build downgrades to a warning."""

import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Let the install proceed if the extension cannot be compiled."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(
            "WARNING: building the compiled trajectory kernel failed "
            f"({exc!r}); falling back to the pure-Python kernel.",
            file=sys.stderr,
        )


ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    # -ffp-contract=off: the pure-Python kernel is the bit-for-bit reference;
    # fused multiply-adds would break kernel parity.
    ext_modules = cythonize(
        [
            Extension(
                "volqso._kernel",
                ["src/volqso/_kernel.pyx"],
                extra_compile_args=["-O3", "-ffp-contract=off"],
                language="c",
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "initializedcheck": False,
            "cdivision": True,
        },
    )
except ImportError:
    print("WARNING: Cython not available; installing with the pure-Python "
          "kernel only.", file=sys.stderr)

setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
