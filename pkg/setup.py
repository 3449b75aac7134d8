import re

from setuptools import setup

with open('src/glucoguard/version.py', 'r') as fd:
    __version__ = re.search(r'^__version__\s*=\s*[\'"]([^\'"]*)[\'"]', fd.read(), re.MULTILINE).group(1)


# Lower bounds are the versions tested against. numpy >= 1.17 for default_rng,
# pandas >= 1.5 for the lineterminator argument of DataFrame.to_csv.
install_requires = [
    "Flask>=2.0",
    "numpy>=1.17",
    "pandas>=1.5",
    "PyYAML>=5.3",
    "requests>=2.22",
    "typing-extensions>=3.7.4.1",
    "voluptuous>=0.11.7",
    "Werkzeug>=2.0",
]

testing_extras = [
    "black",
    "coverage",
    "eradicate",
    "isort",
    "mypy",
    "parsable",
    "pylama",
    "pytest",
    "pytest-black",
    "pytest-isort",
    "types-PyYAML",
    "types-requests",
    "wheel",
]

setup(
    name="glucoguard",
    version=__version__,
    description="Hypoglycemia detection, glucagon dosing and a permissioned patient data ledger",
    classifiers=["Programming Language :: Python :: 3",],
    keywords="",
    packages=[
        "glucoguard",
        "glucoguard.common",
        "glucoguard.datagen",
        "glucoguard.detector",
        "glucoguard.devices",
        "glucoguard.dosing",
        "glucoguard.fog",
        "glucoguard.gateway",
        "glucoguard.identity",
        "glucoguard.ledger",
        "glucoguard.tools",
    ],
    package_dir={"": "src"},
    include_package_data=True,
    zip_safe=False,
    install_requires=install_requires,
    extras_require={"testing": testing_extras,},
    entry_points={
        "console_scripts": [
            "glucoguard = glucoguard.tools.glucoguard:main",
        ]
    },
)
