"""Build hook for the optional compiled kernels.

The package works without the extension: latspell.core.backend falls back to
the pure-numpy kernels if the compiled module is missing or fails to import.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext = Extension(
        "latspell.core._kernels",
        sources=["src/latspell/core/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    ext.optional = True  # a failed compile must not fail the install
    ext_modules = cythonize([ext], compiler_directives={"language_level": "3"})
except ImportError:
    pass

setup(ext_modules=ext_modules)
