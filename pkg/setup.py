from setuptools import find_packages, setup


with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="sbbm-fem",
    version="0.1.0",
    description="Finite element and Euler-Maruyama solver for the stochastic generalized BBM equation",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "tests.*"]),
    py_modules=["main"],
    install_requires=[
        "pydantic~=2.10.4",
        "pydantic_core~=2.27.2",
        "loguru~=0.7.3",
        "numpy",
        "scipy",
        "python-dotenv",
        "aiofiles~=24.1.0",
        "tomli>=1.1.0; python_version < '3.11'",
    ],
    extras_require={"test": ["pytest"]},
    classifiers=[
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.12",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    python_requires=">=3.10",
    entry_points={
        "console_scripts": [
            "sbbm=main:main",
        ],
    },
)
