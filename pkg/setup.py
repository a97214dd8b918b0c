from setuptools import setup
from twinbeam._version import __version__

setup(
    # Project information
    name='twinbeam',
    version=__version__,
    description='Stochastic and plane-wave simulation of twin-beam '
                'spatial quantum correlations',
    packages=['twinbeam',
              'twinbeam.spdc',
              'twinbeam.cli'],
    package_data={'twinbeam': ['presets/*/*.json']},
    scripts=['twinbeam/cli/twinbeam'],
    install_requires=['numpy', 'scipy', 'joblib', 'pandas'],
    python_requires='>=3.7',
)
