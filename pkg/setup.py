#! /usr/bin/env python

from setuptools import setup, find_packages

setup(
    name="LutGEMM",
    version="0.1",
    description="LUT-based GEMV on binary-coding quantized weights",
    packages=find_packages(exclude=["tests"]),
    license='MIT',
    install_requires=[
        'numpy',
        'pandas',
        'tqdm',
    ],
    extras_require={
        'test': ['pytest'],
    },
    entry_points={
        'console_scripts': ['lutgemm = LutGEMM.cli:main'],
    },
)
