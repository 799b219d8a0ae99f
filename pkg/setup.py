"""Build the optional compiled SDE stepping core.

The extension is a performance add-on: if Cython or a C compiler is
unavailable the build falls through and the package uses the pure-Python
stepping backend in ``koopspec._sde_fallback`` (selected at import time).

``-ffp-contract=off`` keeps the compiled arithmetic bit-identical to the
pure-Python path, which evaluates the same expressions with libm.
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Skip extension compilation instead of failing the install."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"koopspec: skipping compiled extension ({exc})")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"koopspec: skipping {ext.name} ({exc})")


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "koopspec._sde",
        sources=["src/koopspec/_sde.pyx"],
        extra_compile_args=["-O2", "-ffp-contract=off"],
    )
    return cythonize(
        [ext],
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "language_level": "3",
        },
    )


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
