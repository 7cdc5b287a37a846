import os
from setuptools import setup


# Utility function to read the README file.
def read(fname):
    return open(os.path.join(os.path.dirname(__file__), fname)).read()

setup(
    name='maxent_income',
    description='Maximum entropy income distributions of consumers and industries, with Boltzmann, Bose-Einstein and Pareto fits.',
    packages=['maxent_income', 'maxent_income.tests', 'maxent_income.income', 'maxent_income.statistics', 'maxent_income.solver', 'maxent_income.ensemble', 'maxent_income.fitting'],
    license='MIT',
    long_description=read('README.md'),
    long_description_content_type='text/markdown',
    version='0.1.0',
    install_requires=[
        'matplotlib>=3.3',
        'networkx>=3.0',
        'numpy>=2.0',
        'pandas>=2.0',
        'scipy',
    ],
    entry_points={
        'console_scripts': ['maxent-income=maxent_income.cli:main'],
    },
    classifiers=[
        # How mature is this project? Common values are
        #   3 - Alpha
        #   4 - Beta
        #   5 - Production/Stable
        'Development Status :: 3 - Alpha',

        # Indicate who your project is intended for
        'Intended Audience :: Science/Research',
        'Topic :: Scientific/Engineering :: Physics',
        'Topic :: Scientific/Engineering :: Mathematics',

        # Pick your license as you wish (should match "license" above)
        'License :: OSI Approved :: MIT License',

        # Supported Python versions
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
        'Programming Language :: Python :: 3.12',
    ],

)
