from setuptools import setup, find_packages

name = 'magnonlink'
version = '0.1.0'

with open('README.md', 'r') as f:
    readme = f.read()

setup(
    name=name,
    version=version,
    packages=find_packages(exclude=['examples', 'examples.*']),
    description=('Steady states, hysteresis and link budgets of a '
                 'gain-driven cavity coupled to a magnon'),
    long_description=readme,
    long_description_content_type='text/markdown',
    license='MIT',
    python_requires='>=3.9',
    install_requires=[
        'numpy',
        'scipy',
        'pandas',
        'click',
        'tabulate',
        'appdirs'
    ],
    extras_require={
        'test': ['hypothesis']
    },
    tests_require=['hypothesis'],
    test_suite='magnonlink.tests',
    entry_points={
        'console_scripts': ['magnonlink = magnonlink.cli:main']
    },
    package_data={
        'magnonlink': ['presets.json', 'default.cfg'],
        'magnonlink.tests': ['data/*.json']
    }
)
