"""Numerical verification that geometric Ising weights are Fisher zeros.

For an oriented immersion of a triangulated sphere, complex weights built
from dihedral and face angles make the even-subgraph generating function of
the dual graph vanish.  The package rebuilds every object of the argument
(planar decomposition, Kac-Ward matrix, SU(2) connection, spinor
eigenvector) and checks each identity numerically.
"""

from .errors import KWZError
from .immersion import generate, load_mesh, save_mesh, validate_immersion
from .pipeline import Tolerances, VerificationReport, run
from .surface_graph import build_triangulation, dual_graph, subdivide

__all__ = [
    "KWZError",
    "Tolerances",
    "VerificationReport",
    "build_triangulation",
    "dual_graph",
    "generate",
    "load_mesh",
    "run",
    "save_mesh",
    "subdivide",
    "validate_immersion",
]

__version__ = "0.1.0"
