import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "windcomfort.oracle._lbm",
                ["src/windcomfort/oracle/_lbm.pyx"],
                include_dirs=[np.get_include()],
                # Keep IEEE semantics so the compiled kernel matches the
                # NumPy fallback bit for bit (no fast-math, no FMA fusion).
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
