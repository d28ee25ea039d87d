import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

ext = Extension(
    "complexflow._kernels",
    ["src/complexflow/_kernels.pyx"],
    include_dirs=[np.get_include()],
    extra_compile_args=["-O3", "-fopenmp"],
    extra_link_args=["-fopenmp"],
)

setup(ext_modules=cythonize([ext], language_level=3))
