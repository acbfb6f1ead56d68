from setuptools import Extension, setup
from Cython.Build import cythonize

setup(
    ext_modules=cythonize(
        [
            Extension(
                "niltri._kernel._orbits_cy",
                ["src/niltri/_kernel/_orbits_cy.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
)
