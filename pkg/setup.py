from setuptools import Extension, setup
from Cython.Build import cythonize

setup(
    ext_modules=cythonize(
        [
            Extension(
                "catdiff._sweep",
                ["src/catdiff/_sweep.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
)
