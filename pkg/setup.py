import setuptools

with open("README.md", "r") as fh:
    long_description = fh.read()

setuptools.setup(
    name="bernoulli-series",
    version="0.1.0",
    description="Exact multiple Bernoulli series of root systems, Witten volumes and zeta values",
    long_description=long_description,
    long_description_content_type="text/markdown",
    py_modules=[
        "cli",
        "config",
        "errors",
        "exactcore",
        "oracle",
        "residue",
        "rootsys",
        "szenes",
        "witten",
    ],
    install_requires=[
        "click>=8.0",
        "colorama",
        "mpmath",
        "numpy",
        "pydantic>=2",
        "python-dotenv",
        "simplejson",
        "sympy>=1.9",
    ],
    entry_points={"console_scripts": ["bernoulli-series = cli:main"]},
    python_requires=">=3.8",
)
