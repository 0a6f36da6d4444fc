"""Build the optional compiled kernels.  If Cython or a C compiler is
missing the package installs without them and falls back to pure Python."""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("WPTRACE_NO_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [Extension("wptrace._ckernels", ["src/wptrace/_ckernels.pyx"],
                       include_dirs=[numpy.get_include()],
                       extra_compile_args=["-O3"])],
            compiler_directives={"language_level": 3, "boundscheck": False,
                                 "wraparound": False, "cdivision": True},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
