import glob

from pybind11.setup_helpers import ParallelCompile, Pybind11Extension, build_ext
from setuptools import setup

ParallelCompile("NPY_NUM_BUILD_JOBS", default=4).install()

ext = Pybind11Extension(
    "hostcap._core",
    sources=["python/bindings.cpp"] + sorted(glob.glob("src/*.cpp")),
    include_dirs=["include", "vendor"],
    cxx_std=20,
    extra_compile_args=["-pthread"],
    extra_link_args=["-pthread"],
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
