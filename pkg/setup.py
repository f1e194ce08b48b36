#!/usr/bin/env python3

# much of the structure here was cribbed from
# https://github.com/pypa/sampleproject

from setuptools import setup
from os import path

here = path.abspath(path.dirname(__file__))

# Get the long description from the README file
with open(path.join(here, 'README.md'), encoding='utf-8') as f:
    long_description = f.read()

version = {}
with open("intuiphys/version.py") as f:
    exec(f.read(), version)

setup(
    name='intuiphys',
    version=version['__version__'],
    description='2.1D intuitive physics scenarios, experience summaries and obstacle mask learning',
    long_description=long_description,
    long_description_content_type='text/markdown',
    author='The intuiphys developers',
    license='GPLv3+',
    keywords=['intuitive physics', 'meta-learning', 'dynamic image', 'simulation'],
    classifiers=[
        'Development Status :: 4 - Beta',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: GNU General Public License v3 or later (GPLv3+)',
        'Environment :: Console',
        'Operating System :: POSIX',
        'Topic :: Scientific/Engineering :: Artificial Intelligence',
        'Programming Language :: Python :: 3 :: Only'],

    python_requires='>=3.8',
    install_requires=[
        'numpy>=1.20',
        'scipy>=1.6',
    ],
    extras_require={
        'test': ['pytest'],
    },

    packages=[
        'intuiphys',
        'intuiphys.families',
        ],
    entry_points={
        'console_scripts': [
            'intuiphys = intuiphys.__main__:main',
        ],
    },
)
