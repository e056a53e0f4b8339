import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("ASMCMC_NO_EXT", "") == "":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "asmcmc._core._ckernel",
                    ["src/asmcmc/_core/_ckernel.pyx"],
                    # contraction into FMA would break bit-equality with the fallback
                    extra_compile_args=["-O2", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
