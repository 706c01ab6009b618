from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # the pure Python store is used instead
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension('obddkit._cstore', ['src/obddkit/_cstore.pyx'], extra_compile_args=['-O3'])],
        language_level=3,
    )

setup(ext_modules=ext_modules)
