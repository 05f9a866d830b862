#! /usr/bin/env python

from setuptools import setup

setup(
    name='reeb-bypass',
    version='0.1.1',
    description='Numerical toolkit for Reeb dynamics of contact bypass attachments',
    keywords='contact geometry reeb flow conley-zehnder bypass chord diagrams',
    author='Heiko Mueller',
    author_email='heiko.muller@gmail.com',
    license='GPLv3',
    packages=['reebcli'],
    package_data={'': ['LICENSE']},
    install_requires=[
        'numpy',
        'scipy'
    ],
    entry_points={
        'console_scripts': [
            'reeb-bypass=reebcli.cli:main'
        ]
    }
)
