"""Radial pseudospectral workbench for the 3D fractional Hartree equation.

Thin wrapper over the C++ core; all numerics live in the extension module.
"""

from ._fhartree import *  # noqa: F401,F403
from ._fhartree import __version__  # noqa: F401
