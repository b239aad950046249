from setuptools import find_packages, setup
from holifd import __version__

setup(
    name="holifd",
    packages=find_packages(exclude=["tests", "tests.*"]),
    setup_requires=["wheel"],
    install_requires=[
        "numpy>=1.20",
        "pandas>=1.2",
        "sympy>=1.8",
        "matplotlib>=3.3",
    ],
    python_requires=">=3.8",
    entry_points={"console_scripts": ["holifd=holifd.cli:main"]},
    version=__version__,
    description="Holistic finite differences for Burgers' equation with projected initial conditions",
)
