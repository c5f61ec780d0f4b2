from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

core_sources = [
    "src/gemm.cpp",
    "src/models.cpp",
    "src/complexity.cpp",
    "src/channel_data.cpp",
    "src/binkernel.cpp",
    "src/trainer.cpp",
]

ext = Pybind11Extension(
    "bcsinet._bcsinet",
    ["bindings/module.cpp"] + core_sources,
    include_dirs=["include", "vendor"],
    libraries=["openblas"],
    cxx_std=20,
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
