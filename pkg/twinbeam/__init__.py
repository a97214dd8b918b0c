"""
Twin-beam spatial correlations from high-gain parametric down-conversion
"""

from ._version import __version__
