from setuptools import setup, find_packages

import re

VERSIONFILE = "slonqs/__version__.py"
verstrline = open(VERSIONFILE, "rt").read()
VSRE = r"^__version__ = ['\"]([^'\"]*)['\"]"
mo = re.search(VSRE, verstrline, re.M)
if mo:
    verstr = mo.group(1)
else:
    raise RuntimeError("Unable to find version string in %s." % (VERSIONFILE,))


with open('requirements.txt') as f:
    requirements = f.read().splitlines()
    requirements = [l for l in requirements if l and not l.startswith('#')]

with open("README.md") as f:
    long_description = f.read()

setup(
    name='slonqs',
    version=verstr,
    packages=find_packages(include=["slonqs", "slonqs.*"]),
    license='GNU GPL V3',
    description='Sequential local optimization of RBM quantum states for tilted Ising models',
    long_description=long_description,
    long_description_content_type="text/markdown",
    keywords='neural quantum states RBM stochastic reconfiguration Ising',
    classifiers=[
        'Development Status :: 3 - Alpha',

        'Intended Audience :: Science/Research',
        'Topic :: Scientific/Engineering :: Physics',

        'License :: OSI Approved :: GNU General Public License v3 or later (GPLv3+)',

        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
    ],
    install_requires=requirements,
    extras_require={'test': ['pytest']},
    entry_points={
        'console_scripts': ['slonqs=slonqs.cli:cli'],
    },
    python_requires='>=3.8',
    zip_safe=False,

    include_package_data=True

)
