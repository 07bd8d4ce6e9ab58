"""Build script for the optional compiled alignment kernel.

The package works without the extension (a pure-Python kernel is selected
at import time), so the extension is marked optional and any compile
failure degrades to the fallback instead of breaking the install.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "gec_ensemble._alignment_fast",
                sources=["src/gec_ensemble/_alignment_fast.pyx"],
                optional=True,
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
