from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; scdopt.kernels falls back
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("scdopt._kernels", ["src/scdopt/_kernels.pyx"])],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
