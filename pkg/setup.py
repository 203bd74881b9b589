"""
Setup file for furdyn.
Allows installation with: pip install -e .
"""
from setuptools import setup, find_packages

setup(
    name="furdyn",
    version="0.1.0",
    packages=find_packages(exclude=["tests", "examples", "examples.*"]),
    py_modules=["main"],
    include_package_data=True,
    package_data={
        "config": ["config.yaml"],
        "integrations.reports": ["report.schema.json"],
    },
    install_requires=[
        "numpy",
        "python-dotenv",
        "pydantic>=2",
        "PyYAML",
        "jsonschema",
    ],
    extras_require={
        "dev": [
            "pytest",
            "pytest-cov",
            "black",
            "flake8",
            "mypy",
        ],
    },
    entry_points={
        "console_scripts": [
            "furdyn=main:main",
        ],
    },
    python_requires=">=3.9",
)
