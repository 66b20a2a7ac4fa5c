"""Build hook for the optional compiled kernel.

If Cython or a C compiler is unavailable the package still installs and
falls back to ``rfisim._kernels_py`` at import time.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("rfisim._kernels", ["src/rfisim/_kernels.pyx"])],
        compiler_directives={"language_level": "3"},
    )
    for ext in ext_modules:
        ext.optional = True

setup(ext_modules=ext_modules)
