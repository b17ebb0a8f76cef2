"""
Setup script for restricted-proj
"""

import os
from setuptools import setup, find_packages

# Read the contents of README file
with open(os.path.join(os.path.dirname(__file__), "README.md"), "r") as f:
    readme = f.read()

requirements = [
    "numpy>=1.22.0",
    "pandas>=1.3.0",
    "pydantic>=2.0",
    "python-dotenv>=0.19.0",
]

setup(
    name="restricted-proj",
    version="0.1.0",
    description="Numerical lab for restricted projections, truncated energies and non-concentration",
    long_description=readme,
    long_description_content_type="text/markdown",
    packages=find_packages(),
    include_package_data=True,
    package_data={
        "restricted_proj": ["data/*.json", "examples/*.json"],
    },
    install_requires=requirements,
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.9",
    entry_points={
        "console_scripts": [
            "restricted-proj=restricted_proj.cli:main",
        ],
    },
)
