import os

from setuptools import setup

ext_modules = []
if not os.environ.get("MEMFREQ_NO_EXT"):
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [Extension("memfreq._kernels", ["src/memfreq/_kernels.pyx"],
                       extra_compile_args=["-O2", "-ffp-contract=off"])],
            compiler_directives={"language_level": "3", "boundscheck": False,
                                 "wraparound": False, "cdivision": True},
        )
    except ImportError:
        # Cython unavailable: the pure-Python kernels are used instead.
        ext_modules = []

setup(ext_modules=ext_modules)
