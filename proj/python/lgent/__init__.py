"""Laguerre-Gaussian two-photon entanglement toolkit.

Simulates the spatial-mode structure of photon pairs from spontaneous
parametric down-conversion, synthesizes mutually unbiased measurement bases
and Type-1 holograms, generates realistic coincidence data, and certifies
entanglement dimensionality from fidelity bounds.
"""

from lgent._core import *  # noqa: F401,F403
from lgent._core import __doc__ as _core_doc

__version__ = "0.1.0"
__doc__ = _core_doc or __doc__
