#!/usr/bin/env python

from setuptools import setup

# Load module version from dpbound/version.py
__version__ = '0.0.0'  # value will be replaced on the next line
exec(open('src/dpbound/version.py').read())

setup(
    name='dpbound',
    version=__version__,
    description='Exact privacy and accuracy bound synthesis for discrete randomized algorithms',
    long_description='Compiles a small probabilistic language to binary decision diagrams '
                     'and synthesizes tight epsilon-DP and (alpha, beta)-accuracy bounds '
                     'by exact weighted model counting',
    package_dir={'': 'src'},
    packages=['dpbound', 'dpbound.lang', 'dpbound.error_code'],
    package_data={'dpbound.lang': ['*.lark']},
    keywords='differential privacy accuracy binary decision diagram weighted model counting',
    license='BSD',
    classifiers="""\
Intended Audience :: Science/Research
License :: OSI Approved :: BSD License
Operating System :: OS Independent
Programming Language :: Python :: 3
Programming Language :: Python :: 3.8
Topic :: Scientific/Engineering :: Mathematics
Topic :: Security
Development Status :: 3 - Alpha
""".splitlines(),
    python_requires='>=3.8',
    install_requires=[
        'lark>=1.1',
        'numpy',
    ],
    extras_require={
        'test': ['pytest', ],
    },
    entry_points={
        'console_scripts': [
            'dpbound = dpbound.cli:main',
        ],
    },
)
