"""Numerical laboratory for U(1) Seiberg-Witten equations with n spinors
on a flat periodic 3-torus.

Submodules:

* ``quat``      exact quaternion algebra, moment map, Killing fields
* ``lattice``   periodic lattice fields, covariant differences, curvature
* ``solver``    residuals, energy, gradients, projected descent, continuation
* ``analysis``  zero sets, Hoelder fits, Z/2 monodromy, homology class
* ``synthetic`` constructed model fields used as test oracles
* ``snapshot``  binary field snapshot format
* ``cli``       command line entry points (solve / continue / analyze / check)
"""

__version__ = "0.1.0"

from .lattice import LatticeGeometry
from .solver import ContinuationState, SolveOptions, SolveReport, continue_alpha, solve

__all__ = [
    "__version__",
    "LatticeGeometry",
    "SolveOptions",
    "SolveReport",
    "ContinuationState",
    "solve",
    "continue_alpha",
]
