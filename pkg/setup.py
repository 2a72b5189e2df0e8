"""Build script for the optional compiled temporal kernel.

The package is fully functional without the extension; motionkit.kinetic
falls back to the numpy implementation when the compiled module is absent
(or when MOTIONKIT_PURE_PYTHON=1 is set).
"""

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = []
if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "motionkit._kinetic_c",
                ["src/motionkit/_kinetic_c.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=extensions)
