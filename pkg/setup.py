import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

_DIRECTIVES = {
    "language_level": "3",
    "boundscheck": False,
    "wraparound": False,
    "cdivision": True,
    "initializedcheck": False,
}

extensions = [
    Extension(
        f"edsketch.{name}",
        [f"src/edsketch/{name}.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    for name in ("_chash", "_cedit", "_coracle")
]

setup(ext_modules=cythonize(extensions, compiler_directives=_DIRECTIVES))
