"""Complex Ising weights attached to an immersion.

The weight of a dual edge combines the dihedral phase with the two face
angles opposite the shared edge::

    y = exp(i theta / 2) * sqrt(tan(phi / 2) * tan(phi' / 2))

On the subdivided graph the weight is split into two real corner factors
and a unit-modulus middle factor, and then further into directed weights
for the Kac-Ward matrix.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import PhiOutOfRange, SingularCoupling
from .immersion import EdgeAngles
from .surface_graph import DaggerGraph

PHI_TOL = 1e-9


def _check_phi(phi):
    if not (0.0 < phi < math.pi - PHI_TOL):
        raise PhiOutOfRange(f"face angle {phi!r} outside (0, pi)")


def lb_weight(theta: float, phi_u: float, phi_up: float) -> complex:
    _check_phi(phi_u)
    _check_phi(phi_up)
    # per-factor nonnegative roots, as in the split weights
    modulus = math.sqrt(math.tan(phi_u / 2)) * math.sqrt(math.tan(phi_up / 2))
    return cmath.exp(0.5j * theta) * modulus


@dataclass(frozen=True)
class WeightSystem:
    """Weights on the dual, subdivided and directed subdivided graphs.

    Attributes
    ----------
    y_star : ndarray, shape (|E*|,)
        Dual-edge weights.
    y_dagger : ndarray, shape (|E_dagger|,)
        Undirected weights on the subdivided graph, indexed like
        ``dagger.graph.edges``.
    y_directed : ndarray, shape (2 |E_dagger|,)
        Directed weights, indexed like the directed edges of
        ``dagger.graph``.
    """

    dagger: DaggerGraph
    y_star: np.ndarray
    y_dagger: np.ndarray
    y_directed: np.ndarray | None = None


def split_weights(angles: EdgeAngles, dagger: DaggerGraph) -> WeightSystem:
    m = len(angles.theta)
    y_star = np.empty(m, dtype=complex)
    y_dagger = np.empty(len(dagger.graph.edges), dtype=complex)
    for e in range(m):
        th, pu, pup = angles.theta[e], angles.phi_u[e], angles.phi_up[e]
        y_star[e] = lb_weight(th, pu, pup)
        chain = dagger.chain[e]
        y_dagger[chain[0]] = math.sqrt(math.tan(pu / 2))
        y_dagger[chain[-1]] = math.sqrt(math.tan(pup / 2))
        # the unit phase is shared evenly over the middle path
        k = len(chain) - 2
        for j in chain[1:-1]:
            y_dagger[j] = cmath.exp(0.5j * th / k)
    return WeightSystem(dagger, y_star, y_dagger)


def direct_weights(ws: WeightSystem, angles: EdgeAngles) -> WeightSystem:
    """Attach directed weights.

    The corner weight sits on the edge leaving the face, the edge entering
    the face gets 1, and both directions of the middle edge carry
    ``exp(i theta / 4)`` (``exp(i theta / 4k)`` on each of ``k`` pieces of
    a bent middle path).
    """
    dg = ws.dagger
    g = dg.graph
    yd = np.empty(g.n_directed, dtype=complex)
    for e, chain in enumerate(dg.chain):
        k = len(chain) - 2
        mid = cmath.exp(0.25j * angles.theta[e] / k)
        for j in (chain[0], chain[-1]):
            a, b = g.edges[j]
            face, middle = (a, b) if not dg.is_middle(a) else (b, a)
            yd[g.directed_index(face, middle)] = ws.y_dagger[j]
            yd[g.directed_index(middle, face)] = 1.0
        for j in chain[1:-1]:
            yd[2 * j] = mid
            yd[2 * j + 1] = mid
    return WeightSystem(dg, ws.y_star, ws.y_dagger, yd)


def coupling_from_weight(x: complex) -> complex:
    """Coupling constant ``J`` with ``tanh J = x`` (principal branch)."""
    if x == 1 or x == -1:
        raise SingularCoupling(f"tanh J = {x} has no finite solution")
    return cmath.atanh(x)
