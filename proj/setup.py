"""Builds the _tsparse extension by driving the project's CMake build."""

import os
import subprocess
import sys
from pathlib import Path

from setuptools import setup
from setuptools.command.build_ext import build_ext
from setuptools.extension import Extension


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        source_dir = Path(__file__).resolve().parent
        out_dir = Path(self.get_ext_fullpath(ext.name)).resolve().parent
        build_dir = Path(self.build_temp) / "cmake"
        build_dir.mkdir(parents=True, exist_ok=True)

        import pybind11

        args = [
            f"-DCMAKE_BUILD_TYPE={'Debug' if self.debug else 'Release'}",
            "-DTSPARSE_BUILD_PYTHON=ON",
            "-DTSPARSE_BUILD_TESTS=OFF",
            "-DTSPARSE_BUILD_CLI=OFF",
            f"-Dpybind11_DIR={pybind11.get_cmake_dir()}",
            f"-DPYTHON_EXECUTABLE={sys.executable}",
        ]
        subprocess.run(
            ["cmake", "-S", str(source_dir), "-B", str(build_dir), *args],
            check=True,
        )
        subprocess.run(
            [
                "cmake",
                "--build",
                str(build_dir),
                "--target",
                "_tsparse",
                "-j",
                str(os.cpu_count() or 2),
            ],
            check=True,
        )
        built = next(build_dir.glob("_tsparse*.so"))
        dest = out_dir / built.name
        dest.parent.mkdir(parents=True, exist_ok=True)
        self.copy_file(str(built), str(dest))


setup(
    ext_modules=[CMakeExtension("tsparse._tsparse")],
    cmdclass={"build_ext": CMakeBuild},
)
