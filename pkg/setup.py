#!/usr/bin/env python
"""GARCH estimation by the empirical characteristic function.

Estimates GARCH(r, s) models driven by Levy increments by matching the
empirical characteristic function of the inverted noise, with a maximum
likelihood baseline, moment stability diagnostics and Monte Carlo studies
of the asymptotic covariance.

"""

from setuptools import setup, find_packages

DOCLINES = __doc__.split("\n")

CLASSIFIERS = """\
Development Status :: 3 - Alpha
Intended Audience :: Science/Research
Intended Audience :: Developers
License :: OSI Approved :: BSD License
Programming Language :: Python
Programming Language :: Python :: 3
Topic :: Scientific/Engineering :: Mathematics
Topic :: Office/Business :: Financial
Operating System :: Microsoft :: Windows
Operating System :: POSIX
Operating System :: Unix
Operating System :: MacOS
"""

# pylint: disable=invalid-name

version = {}
with open('garchecf/_version.py') as f:
    exec(f.read(), version)  # pylint: disable=exec-used

setup(
    name='garchecf',
    description=DOCLINES[0],
    long_description="\n".join(DOCLINES[2:]),
    license='BSD 3-Clause',
    classifiers=[_f for _f in CLASSIFIERS.split('\n') if _f],
    platforms=["Windows", "Linux", "Solaris", "Mac OS-X", "Unix"],
    python_requires='>=3.7',
    install_requires=[
        'joblib >= 0.14',
        'numpy >= 1.17',
        'pandas >= 0.25',
        'scipy >= 1.6'],
    tests_require=['nose'],
    test_suite='nose.collector',
    entry_points={
        'console_scripts': ['garchecf=garchecf.cli:main'],
    },
    packages=find_packages(exclude=['test']),
    version=version['__version__'],
)
