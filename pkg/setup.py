"""Build script for the optional compiled kernels.

The package works without the extension: ``passnet_lab.kernels`` falls
back to the pure-Python implementations when the compiled module is
missing, so the extension is marked optional and a failed build does not
fail the install.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "passnet_lab._kernels",
                ["src/passnet_lab/_kernels.pyx"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
