"""SU(2) connection on the dual graph and the spinor eigenvector.

SU(2) elements are plain ``(2, 2)`` complex arrays of the form
``[[a + bi, c + di], [-c + di, a - bi]]`` with ``a^2 + b^2 + c^2 + d^2 = 1``.
Row spinors are transported by right multiplication,
``xi[u'] = xi[u] @ U[u -> u']``.
"""

from __future__ import annotations

import cmath
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InconsistentPropagation,
    IsometryResidual,
    NonUnitQuaternion,
    NotUnitary,
    ZeroSpinor,
)
from .immersion import EdgeAngles, Immersion
from .surface_graph import DaggerGraph, DualGraph, FaceLoop
from .unfolding import PlanarDecomposition, TurningData, turning_angle

UNITARY_TOL = 1e-10
GIMBAL_TOL = 1e-12
FLATNESS_TOL = 1e-8
PROPAGATION_TOL = 1e-8

I2 = np.eye(2, dtype=complex)


# --- elementary SU(2) --------------------------------------------------------------

def su2_from_abcd(a, b, c, d) -> np.ndarray:
    return np.array([[a + 1j * b, c + 1j * d], [-c + 1j * d, a - 1j * b]])


def su2_z(gamma: float) -> np.ndarray:
    return np.diag([cmath.exp(0.5j * gamma), cmath.exp(-0.5j * gamma)])


def su2_x(gamma: float) -> np.ndarray:
    c, s = math.cos(gamma / 2), math.sin(gamma / 2)
    return np.array([[c, s], [-s, c]], dtype=complex)


def su2_residual(U) -> float:
    """Deviation of ``U`` from SU(2) (unitarity and unit determinant)."""
    U = np.asarray(U)
    return max(float(np.abs(U @ U.conj().T - I2).max()), abs(np.linalg.det(U) - 1))


def upsilon(alpha: float, beta: float, theta: float) -> np.ndarray:
    """Connection element of a directed dual edge.

    ``alpha`` is the winding of the path between the two faces, ``beta`` the
    direction of the shared side in the tail face and ``theta`` the dihedral
    phase.
    """
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    U = np.array([
        [cmath.exp(-0.5j * alpha) * c, -1j * cmath.exp(0.5j * alpha + 1j * beta) * s],
        [-1j * cmath.exp(-0.5j * alpha - 1j * beta) * s, cmath.exp(0.5j * alpha) * c],
    ])
    if su2_residual(U) > UNITARY_TOL:
        raise NotUnitary("connection element is not in SU(2)")
    return U


def euler_decompose(U) -> tuple[float, float, float]:
    """Angles ``(psi, vartheta, phi)`` with ``U = su2_z(psi) su2_x(vartheta) su2_z(phi)``.

    ``vartheta`` lies in ``[0, pi]``.  When it is 0 or pi only ``psi + phi``
    (resp. ``psi - phi``) is determined and ``phi = 0`` is returned.
    """
    a, b = complex(U[0, 0]), complex(U[0, 1])
    vartheta = 2.0 * math.atan2(abs(b), abs(a))
    if abs(b) < GIMBAL_TOL:
        return 2.0 * cmath.phase(a), 0.0, 0.0
    if abs(a) < GIMBAL_TOL:
        return 2.0 * cmath.phase(b), math.pi, 0.0
    sum_, diff = 2.0 * cmath.phase(a), 2.0 * cmath.phase(b)
    return 0.5 * (sum_ + diff), vartheta, 0.5 * (sum_ - diff)


def euler_compose(psi: float, vartheta: float, phi: float) -> np.ndarray:
    return su2_z(psi) @ su2_x(vartheta) @ su2_z(phi)


# --- quaternions ---------------------------------------------------------------------

@dataclass(frozen=True)
class Quaternion:
    """``a + b i + c j + d k``."""

    a: float
    b: float
    c: float
    d: float

    def __mul__(self, o: "Quaternion") -> "Quaternion":
        a1, b1, c1, d1 = self.a, self.b, self.c, self.d
        a2, b2, c2, d2 = o.a, o.b, o.c, o.d
        return Quaternion(
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        )

    def __neg__(self) -> "Quaternion":
        return Quaternion(-self.a, -self.b, -self.c, -self.d)

    def conj(self) -> "Quaternion":
        return Quaternion(self.a, -self.b, -self.c, -self.d)

    def norm(self) -> float:
        return math.sqrt(self.a ** 2 + self.b ** 2 + self.c ** 2 + self.d ** 2)

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d])

    def to_su2(self) -> np.ndarray:
        return su2_from_abcd(self.a, self.b, self.c, self.d)


def to_quaternion(U) -> Quaternion:
    return Quaternion(U[0, 0].real, U[0, 0].imag, U[0, 1].real, U[0, 1].imag)


def vector_to_pure(v) -> Quaternion:
    """Pure quaternion of a vector: ``(x, y, z) -> z i + y j + x k``."""
    x, y, z = (float(t) for t in v)
    return Quaternion(0.0, z, y, x)


def pure_to_vector(q: Quaternion) -> np.ndarray:
    return np.array([q.d, q.c, q.b])


def rotate(q: Quaternion, v) -> np.ndarray:
    """Rotate ``v`` by ``q p q^-1`` under the ``(x, y, z) <-> (k, j, i)`` identification."""
    if abs(q.norm() - 1.0) > 1e-10:
        raise NonUnitQuaternion(f"|q| = {q.norm()}")
    return pure_to_vector(q * vector_to_pure(v) * q.conj())


def rotation_matrix(q: Quaternion) -> np.ndarray:
    """Matrix of :func:`rotate` in the standard basis."""
    return np.column_stack([rotate(q, e) for e in np.eye(3)])


def _basis_permutation(order) -> np.ndarray:
    P = np.zeros((3, 3))
    for row, col in enumerate(order):
        P[row, col] = 1.0
    return P


#: slot of :func:`rotate` holding each local frame axis (r, n x r, n); with
#: rotate() reading (k, j, i) this identifies the frame with (j, k, i)
FRAME_AXES = (1, 0, 2)
# rows: frame axis, cols: (x, y, z) slots of rotate()
_FRAME_P = _basis_permutation(FRAME_AXES)


def frame_rotation(U) -> np.ndarray:
    """Rotation of a local frame ``(r, n x r, n)`` associated with ``U``.

    ``U = su2_z(psi) su2_x(t) su2_z(phi)`` maps to ``R_z(psi) R_x(t) R_z(phi)``
    (right-handed elementary rotations) in local frame coordinates.
    """
    R = rotation_matrix(to_quaternion(U))
    return _FRAME_P @ R @ _FRAME_P.T


# --- connection -----------------------------------------------------------------------

@dataclass(frozen=True)
class Connection:
    """``elements[d]`` is the SU(2) element of directed dual edge ``d``."""

    dual: DualGraph
    elements: np.ndarray = field(repr=False)

    def __getitem__(self, d: int) -> np.ndarray:
        return self.elements[d]


def build_connection(td: TurningData, angles: EdgeAngles, dual: DualGraph,
                     theta_override: dict | None = None) -> Connection:
    """Connection from turning data and dihedral phases.

    ``theta_override`` maps dual edge indices to replacement phases (used for
    negative controls).
    """
    els = np.empty((dual.n_directed, 2, 2), dtype=complex)
    for d in range(dual.n_directed):
        e = d // 2
        th = angles.theta[e]
        if theta_override and e in theta_override:
            th = theta_override[e]
        els[d] = upsilon(td.alpha[d], td.beta[d], th)
    return Connection(dual, els)


def holonomy(c: Connection, loop: FaceLoop) -> np.ndarray:
    H = I2.copy()
    for d in loop.directed_edges:
        H = H @ c[d]
    return H


def flatness_check(c: Connection, loops) -> float:
    """Largest entrywise deviation of a loop holonomy from the identity."""
    return max(float(np.abs(holonomy(c, lp) - I2).max()) for lp in loops)


@dataclass(frozen=True)
class SpinorField:
    xi: np.ndarray
    root: int
    tree: tuple[int, ...]
    max_residual: float


def propagate_spinors(c: Connection, xi0, root: int = 0, order: str = "bfs",
                      tol: float = PROPAGATION_TOL) -> SpinorField:
    """Transport ``xi0`` from face ``root`` along a spanning tree.

    ``order`` selects a breadth-first or depth-first tree.  Every edge off
    the tree is checked for consistency.

    Raises
    ------
    InconsistentPropagation
        If some edge disagrees by more than ``tol * |xi0|``.
    """
    dual = c.dual
    g = dual.graph
    xi0 = np.asarray(xi0, dtype=complex)
    xi = np.zeros((dual.n_vertices, 2), dtype=complex)
    xi[root] = xi0
    seen = {root}
    tree = []
    frontier = deque([root])
    while frontier:
        u = frontier.popleft() if order == "bfs" else frontier.pop()
        for w, j in g.adjacency[u]:
            if w in seen:
                continue
            d = dual.directed_between(u, w)
            xi[w] = xi[u] @ c[d]
            seen.add(w)
            tree.append(j)
            frontier.append(w)
    res = 0.0
    for d in range(dual.n_directed):
        u, w = dual.directed(d)
        res = max(res, float(np.linalg.norm(xi[u] @ c[d] - xi[w])))
    scale = float(np.linalg.norm(xi0))
    if res > tol * max(scale, 1e-300) and scale > 0:
        raise InconsistentPropagation(f"spinor transport residual {res:.3e}")
    return SpinorField(xi, root, tuple(tree), res)


def assemble_eigenvector(sf: SpinorField, pd: PlanarDecomposition, td: TurningData,
                         dagger: DaggerGraph, angles: EdgeAngles) -> np.ndarray:
    """Candidate fixed vector of the transition matrix from a spinor field.

    Around each face ``u`` the entries on edges leaving and entering ``u``
    are ``rho (xi+ +- xi- exp(-i beta))``; each middle-edge entry follows
    from the next entry along the path, times the weights of the two pieces
    and ``exp(i/2 turn)``; on a straight segment this is
    ``exp(i theta / 4) exp(i/2 turn)`` times the entry leaving the head
    middle vertex towards its face.

    Raises
    ------
    ZeroSpinor
    """
    if not np.any(sf.xi):
        raise ZeroSpinor("spinor field vanishes identically")
    dual = dagger.dual
    g = dagger.graph
    z = pd.positions
    phi = np.zeros(g.n_directed, dtype=complex)
    for d in range(dual.n_directed):
        u, _ = dual.directed(d)
        m = dagger.middle(d)
        plus, minus = sf.xi[u]
        lem = td.rho[d] * np.exp(-1j * td.beta[d])
        phi[g.directed_index(u, m)] = plus * td.rho[d] + minus * lem
        phi[g.directed_index(m, u)] = plus * td.rho[d] - minus * lem
    for d in range(dual.n_directed):
        # walk the middle path backwards from the piece entering the head face
        path = dagger.directed_path(d)
        k = len(path) - 3
        half = cmath.exp(0.25j * angles.theta[d // 2] / k)
        for j in range(k, 0, -1):
            a, w, c = path[j], path[j + 1], path[j + 2]
            turn = turning_angle(z[w] - z[a], z[c] - z[w])
            phase = half * (half if j < k else 1.0) * cmath.exp(0.5j * turn)
            phi[g.directed_index(a, w)] = phase * phi[g.directed_index(w, c)]
    return phi


def eigen_residual(lam: np.ndarray, phi: np.ndarray) -> float:
    return float(np.linalg.norm(lam @ phi - phi) / np.linalg.norm(phi))


# --- frames --------------------------------------------------------------------------

@dataclass(frozen=True)
class FramedImmersion:
    """Unit in-plane vector ``r[u]`` and the rigid motion ``rotations[u]``."""

    r: np.ndarray
    rotations: np.ndarray
    normals: np.ndarray

    def frame(self, u: int) -> np.ndarray:
        """Columns ``(r, n x r, n)``."""
        r, n = self.r[u], self.normals[u]
        return np.column_stack([r, np.cross(n, r), n])


def frames(imm: Immersion, pd: PlanarDecomposition, tol: float = 1e-10) -> FramedImmersion:
    """Frames induced by folding the flat triangles onto the immersion.

    For each face the orientation preserving rigid motion taking the flat
    triangle to the immersed one with ``e3 -> n_u`` is recovered; ``r_u`` is
    the image of the flat direction ``(0, 1, 0)``.

    Raises
    ------
    IsometryResidual
    """
    nf = imm.triangulation.n_faces
    r = np.empty((nf, 3))
    rots = np.empty((nf, 3, 3))
    for u in range(nf):
        x1, x2, x3 = imm.face_coords(u)
        z1, z2, z3 = pd.corners[u]
        Z = np.array([[(z2 - z1).real, (z3 - z1).real, 0.0],
                      [(z2 - z1).imag, (z3 - z1).imag, 0.0],
                      [0.0, 0.0, 1.0]])
        X = np.column_stack([x2 - x1, x3 - x1, imm.normals[u]])
        R = X @ np.linalg.inv(Z)
        if (np.abs(R.T @ R - np.eye(3)).max() > tol * 10 or
                abs(np.linalg.det(R) - 1.0) > tol * 10):
            raise IsometryResidual(f"face {u}: flat and immersed triangles are not congruent")
        rots[u] = R
        r[u] = R[:, 1]
    return FramedImmersion(r, rots, imm.normals)


def frame_transport_residual(fi: FramedImmersion, c: Connection) -> float:
    """Largest entry of ``F[u'] - F[u] @ frame_rotation(U[u -> u'])`` over directed edges."""
    worst = 0.0
    for d in range(c.dual.n_directed):
        u, up = c.dual.directed(d)
        diff = fi.frame(up) - fi.frame(u) @ frame_rotation(c[d])
        worst = max(worst, float(np.abs(diff).max()))
    return worst
