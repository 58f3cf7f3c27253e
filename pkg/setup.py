"""
"""

import os
from setuptools import setup, find_packages

PACKAGENAME = "epx-standby"


def read(file_name):
    """Read a text file and return the content as a string."""
    with open(
        os.path.join(os.path.dirname(__file__), file_name), encoding="utf-8"
    ) as f:
        return f.read()


VERSION = read("epxstandby/VERSION").strip()

dev_requirements = ["tox", "black"]

setup(
    name=PACKAGENAME,
    version=VERSION,
    description="Python tools for redundant systems with warm stand-by units",
    long_description=(
        "A package which simulates, estimates and tests the reliability of "
        "systems with one main unit and warm stand-by units"
    ),
    python_requires=">=3.8",
    install_requires=[
        "numpy",
        "pandas>=1.5",
        "scipy",
        "plotly<6",
        "kaleido==0.2.1",
        "pytest",
    ],
    extras_require={"dev": dev_requirements},
    packages=find_packages(),
    package_data={
        "epxstandby": [
            "VERSION",
            "data/*.json",
        ],
    },
    entry_points={
        "console_scripts": ["epx-standby = epxstandby.cli:main"],
    },
)
