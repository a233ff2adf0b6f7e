"""Oriented immersions of a triangulated sphere in R^3.

An immersion assigns coordinates to the vertices; every face must span a
plane and carries a unit normal.  The normals follow one global rule:
with faces stored counterclockwise as seen from outside (the mesh file
convention), ``n_u = HANDEDNESS * unit((x2 - x1) x (x3 - x1))`` with
``HANDEDNESS = -1``, so that each stored triple runs clockwise when looking
down onto the tip of its normal.  Faces may interpenetrate; only
degeneracy is rejected.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import ConvexHull

from .errors import DegenerateFace, InvalidMesh, OrientationMismatch
from .surface_graph import DualGraph, Triangulation, build_triangulation, dual_graph

#: sign relating the stored face order to the normal (see module docstring)
HANDEDNESS = -1
#: sign of the dihedral phase relative to the right-hand rule about x_v1 - x_v2;
#: frozen by the eigenvector calibration test
THETA_SIGN = 1

#: a face is degenerate if its smallest altitude is below this times its longest side
DEGENERACY_TOL = 1e-9
ACUTE_TOL = 1e-12


def _unit(v):
    return v / np.linalg.norm(v)


def _degenerate(a, b, c) -> bool:
    sides = [np.linalg.norm(b - a), np.linalg.norm(c - b), np.linalg.norm(a - c)]
    longest = max(sides)
    if longest == 0.0:
        return True
    twice_area = np.linalg.norm(np.cross(b - a, c - a))
    return twice_area / longest < DEGENERACY_TOL * longest


def interior_angles(a, b, c) -> np.ndarray:
    """Angles of triangle ``abc`` at ``a``, ``b`` and ``c``."""
    a, b, c = (np.asarray(p, dtype=float) for p in (a, b, c))

    def ang(p, q, r):
        s, t = q - p, r - p
        return math.atan2(np.linalg.norm(np.cross(s, t)), float(np.dot(s, t)))

    return np.array([ang(a, b, c), ang(b, c, a), ang(c, a, b)])


def circumcenter(a, b, c) -> np.ndarray:
    u, w = b - a, c - a
    uxw = np.cross(u, w)
    num = np.dot(w, w) * np.cross(uxw, u) + np.dot(u, u) * np.cross(w, uxw)
    return a + num / (2.0 * np.dot(uxw, uxw))


def incenter(a, b, c) -> np.ndarray:
    la, lb, lc = np.linalg.norm(b - c), np.linalg.norm(c - a), np.linalg.norm(a - b)
    return (la * a + lb * b + lc * c) / (la + lb + lc)


def face_point(a, b, c) -> np.ndarray:
    """Point of the open triangle used as the face's centre.

    The circumcentre for acute triangles, the incentre otherwise; in both
    cases the perpendicular feet on all three sides fall strictly inside
    the sides.
    """
    a, b, c = (np.asarray(p, dtype=float) for p in (a, b, c))
    if _degenerate(a, b, c):
        raise DegenerateFace("collinear face points")
    if np.all(interior_angles(a, b, c) < math.pi / 2 - ACUTE_TOL):
        return circumcenter(a, b, c)
    return incenter(a, b, c)


def perpendicular_foot(p, a, b):
    """Foot of the perpendicular from ``p`` to line ``ab`` and its parameter."""
    ab = b - a
    s = float(np.dot(p - a, ab) / np.dot(ab, ab))
    return a + s * ab, s


@dataclass(frozen=True)
class Immersion:
    triangulation: Triangulation
    dual: DualGraph
    coords: np.ndarray = field(repr=False)
    normals: np.ndarray = field(repr=False)
    face_points: np.ndarray = field(repr=False)
    handedness: int = HANDEDNESS

    def face_coords(self, u: int) -> np.ndarray:
        return self.coords[list(self.triangulation.faces[u])]


def validate_immersion(t: Triangulation, coords, handedness: int = HANDEDNESS,
                       normals=None) -> Immersion:
    """Check an immersion and compute normals and face points.

    Parameters
    ----------
    t : Triangulation
    coords : array_like, shape (V, 3)
    handedness : {-1, +1}
        Sign applied to the cross product of the stored face order.
    normals : array_like, shape (U, 3), optional
        Explicit normals.  They must be unit, orthogonal to their faces and
        satisfy the orientation condition across every dual edge.

    Raises
    ------
    DegenerateFace, OrientationMismatch, InvalidMesh
    """
    x = np.asarray(coords, dtype=float)
    if x.shape != (t.vertex_count, 3):
        raise InvalidMesh(f"expected coordinates of shape ({t.vertex_count}, 3), got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidMesh("non-finite coordinates")

    n = np.empty((t.n_faces, 3))
    fp = np.empty((t.n_faces, 3))
    for u, f in enumerate(t.faces):
        a, b, c = x[list(f)]
        if _degenerate(a, b, c):
            raise DegenerateFace(f"face {u} {f} is degenerate")
        n[u] = handedness * _unit(np.cross(b - a, c - a))
        fp[u] = face_point(a, b, c)

    if normals is not None:
        given = np.asarray(normals, dtype=float)
        if given.shape != n.shape:
            raise InvalidMesh(f"expected normals of shape {n.shape}")
        for u, f in enumerate(t.faces):
            a, b, c = x[list(f)]
            if abs(np.linalg.norm(given[u]) - 1.0) > 1e-9:
                raise InvalidMesh(f"normal of face {u} is not unit")
            if abs(np.dot(given[u], n[u])) < 1.0 - 1e-9:
                raise InvalidMesh(f"normal of face {u} is not orthogonal to its plane")
        n = given

    d = dual_graph(t)
    for e in d.edges:
        x1, x2, x3, x3p = x[e.v1], x[e.v2], x[e.v3], x[e.v3p]
        s = np.linalg.det(np.array([x2 - x1, x3 - x1, n[e.u]]))
        sp = np.linalg.det(np.array([x1 - x2, x3p - x2, n[e.up]]))
        if s * sp <= 0:
            raise OrientationMismatch(f"faces {e.u} and {e.up} are not compatibly oriented")

    return Immersion(t, d, x, n, fp, handedness)


# --- per-edge angles ----------------------------------------------------------------

def dihedral_angle(imm: Immersion, d: int) -> float:
    """Signed angle from the tail face normal to the head face normal.

    ``d`` is a directed dual edge; the rotation axis is ``x_v1 - x_v2`` for
    the shared pair ``(v1, v2)`` in the tail face's order.  Both
    orientations of a dual edge give the same value.
    """
    u, up = imm.dual.directed(d)
    v1, v2 = imm.dual.shared_pair(d)
    axis = _unit(imm.coords[v1] - imm.coords[v2])
    nu, nup = imm.normals[u], imm.normals[up]
    return THETA_SIGN * math.atan2(float(np.dot(np.cross(nu, nup), axis)), float(np.dot(nu, nup)))


def face_angle(imm: Immersion, d: int) -> float:
    """Interior angle of the tail face of ``d`` at the vertex off the shared edge."""
    v1, v2 = imm.dual.shared_pair(d)
    v3 = imm.dual.opposite(d)
    x = imm.coords
    s, t = x[v1] - x[v3], x[v2] - x[v3]
    if _degenerate(x[v1], x[v2], x[v3]):
        raise DegenerateFace(f"face {imm.dual.directed(d)[0]} is degenerate")
    return math.atan2(float(np.linalg.norm(np.cross(s, t))), float(np.dot(s, t)))


@dataclass(frozen=True)
class EdgeAngles:
    """Per dual edge ``e``: dihedral phase and the two opposite face angles."""

    theta: np.ndarray
    phi_u: np.ndarray
    phi_up: np.ndarray


def edge_angles(imm: Immersion) -> EdgeAngles:
    m = len(imm.dual.edges)
    theta = np.array([dihedral_angle(imm, 2 * e) for e in range(m)])
    phi_u = np.array([face_angle(imm, 2 * e) for e in range(m)])
    phi_up = np.array([face_angle(imm, 2 * e + 1) for e in range(m)])
    return EdgeAngles(theta, phi_u, phi_up)


# --- mesh generators ---------------------------------------------------------------

TETRAHEDRON_COORDS = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
TETRAHEDRON_FACES = ((0, 1, 2), (0, 2, 3), (0, 3, 1), (1, 3, 2))

MAX_PERTURB_ATTEMPTS = 32


def _orient_outward(points, simplices):
    centre = points.mean(axis=0)
    faces = []
    for a, b, c in simplices:
        nrm = np.cross(points[b] - points[a], points[c] - points[a])
        if np.dot(nrm, points[a] + points[b] + points[c] - 3 * centre) < 0:
            b, c = c, b
        faces.append((int(a), int(b), int(c)))
    return faces


def bipyramid(height: float = 1.0):
    """Double pyramid over an equilateral triangle in the ``z = 0`` plane."""
    ring = [(math.cos(2 * math.pi * k / 3), math.sin(2 * math.pi * k / 3), 0.0) for k in range(3)]
    pts = np.array(ring + [(0.0, 0.0, height), (0.0, 0.0, -height)])
    faces = [(0, 1, 3), (1, 2, 3), (2, 0, 3), (1, 0, 4), (2, 1, 4), (0, 2, 4)]
    return build_triangulation(5, faces), pts


def random_convex(n: int, seed: int):
    """Convex hull of ``n`` uniform points on the unit sphere, faces outward."""
    if n < 4:
        raise ValueError("need at least 4 points")
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(n, 3))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    hull = ConvexHull(pts)
    if len(hull.vertices) != n:
        raise DegenerateFace("a sampled point is not a hull vertex")
    return build_triangulation(n, _orient_outward(pts, hull.simplices)), pts


def perturbed(n: int, amplitude: float, seed: int):
    """``random_convex(n)`` with radial noise of relative size ``amplitude``.

    The result need not be convex or embedded, but every face is kept
    non-degenerate (retrying with fresh noise a bounded number of times).
    """
    t, pts = random_convex(n, seed)
    for attempt in range(MAX_PERTURB_ATTEMPTS):
        rng = np.random.default_rng([seed, attempt, 1])
        scale = 1.0 + amplitude * rng.uniform(-1.0, 1.0, size=(n, 1))
        x = pts * scale
        try:
            validate_immersion(t, x)
        except DegenerateFace:
            continue
        return t, x
    raise DegenerateFace(f"no non-degenerate perturbation after {MAX_PERTURB_ATTEMPTS} attempts")


def generate(kind: str, n: int = 12, amplitude: float = 0.2, seed: int = 0):
    """Build a test mesh; returns ``(Triangulation, coords)``.

    ``kind`` is one of ``tetrahedron``, ``bipyramid``, ``random_convex``
    (``random-convex`` is accepted too) or ``perturbed``.
    """
    kind = kind.replace("-", "_")
    if kind == "tetrahedron":
        return build_triangulation(4, TETRAHEDRON_FACES), TETRAHEDRON_COORDS.copy()
    if kind == "bipyramid":
        return bipyramid()
    if kind == "random_convex":
        return random_convex(n, seed)
    if kind == "perturbed":
        return perturbed(n, amplitude, seed)
    raise ValueError(f"unknown mesh kind {kind!r}")


# --- mesh interchange ---------------------------------------------------------------

def mesh_to_json(t: Triangulation, coords) -> str:
    doc = {
        "vertices": [[float(c) for c in p] for p in np.asarray(coords)],
        "faces": [list(f) for f in t.faces],
    }
    return json.dumps(doc)


def parse_mesh(doc) -> tuple[Triangulation, np.ndarray]:
    try:
        verts = np.asarray(doc["vertices"], dtype=float)
        faces = [tuple(int(i) for i in f) for f in doc["faces"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidMesh(f"malformed mesh document: {exc}") from exc
    if verts.ndim != 2 or verts.shape[1] != 3:
        raise InvalidMesh("vertices must be a list of [x, y, z]")
    return build_triangulation(len(verts), faces), verts


def load_mesh(path) -> tuple[Triangulation, np.ndarray]:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidMesh(f"{path}: not valid JSON ({exc})") from exc
    return parse_mesh(doc)


def save_mesh(path, t: Triangulation, coords) -> None:
    Path(path).write_text(mesh_to_json(t, coords) + "\n")
