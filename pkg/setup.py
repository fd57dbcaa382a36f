# See LICENSE.rst for license details.

import os

from setuptools import setup, find_packages

base_dir = os.path.dirname(__file__)

setup(
    name='arbor',
    version='0.1.0',
    author='The arbor developers',
    license='MIT',
    description=(
        "Interruptible exact sampling from passively observed Markov chains."
    ),
    long_description=open('README.rst').read(),
    classifiers=[
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python :: 3',
    ],
    packages=find_packages(exclude=["tests"]),
    zip_safe=False,
    include_package_data=True,
    python_requires=">=3.11",
    install_requires=[
        'networkx',
        'numba',
        'numpy',
        'scipy',
    ],
    entry_points={
        'console_scripts': [
            'arbor = arbor.cli:main',
        ],
    },
    extras_require=dict(
        test=[
            'mypy',
            'pytest',
            'pytest-cov',
            'sybil',
            'testfixtures',
        ],
        build=[
            'furo',
            'setuptools',
            'setuptools-git',
            'sphinx',
            'twine',
            'wheel'
        ]
    ),
)
