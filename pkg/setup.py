from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = [
    Extension(
        "fastfish.backends._core",
        ["src/fastfish/backends/_core.pyx"],
        extra_compile_args=["-O3"],
    )
]

# The compiled kernels are optional: without Cython the package installs with
# the pure-numpy fallback only.
ext_modules = (
    cythonize(extensions, compiler_directives={"language_level": "3"})
    if cythonize is not None
    else []
)

setup(ext_modules=ext_modules)
