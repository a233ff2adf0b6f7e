"""Planar decompositions of an immersion.

The faces of the immersion are laid flat in the complex plane as disjoint
isometric triangles (corners clockwise in stored order), arranged along a
straight-line embedding of the dual graph.  The foot of the perpendicular
from each face point to a side is joined by a "middle path" to the matching
foot in the neighbouring triangle: a single segment when possible, else a
polyline whose bends become extra degree-two vertices.  Together with the
segments from each face point to its three feet this is a straight-line
planar embedding of the subdivided dual graph.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import CrossingDetected, DecompositionFailed, LayoutSingular, ZeroLengthSegment
from .immersion import Immersion
from .surface_graph import DaggerGraph, DualGraph, face_loops, subdivide

MAX_DOUBLINGS = 20
SEPARATION_TOL = 1e-12
FOOT_TOL = 1e-9
ISOMETRY_TOL = 1e-9


def turning_angle(e1: complex, e2: complex) -> float:
    """Turning angle from displacement ``e1`` to displacement ``e2``, in (-pi, pi]."""
    if e1 == 0 or e2 == 0:
        raise ZeroLengthSegment("turning angle of a zero-length segment")
    a = cmath.phase(e2 / e1)
    return math.pi if a == -math.pi else a


# --- segment geometry (vectorised over pairs) -------------------------------------

def _cross(a, b):
    return a.real * b.imag - a.imag * b.real


def _point_segment_dist(p, a, b):
    ab = b - a
    denom = np.abs(ab) ** 2
    s = np.clip(np.real((p - a) * np.conj(ab)) / np.where(denom > 0, denom, 1.0), 0.0, 1.0)
    return np.abs(p - (a + s * ab))


def segment_distances(a1, b1, a2, b2):
    """Distances between closed segments ``[a1, b1]`` and ``[a2, b2]`` (broadcast)."""
    d1 = _cross(b1 - a1, a2 - a1)
    d2 = _cross(b1 - a1, b2 - a1)
    d3 = _cross(b2 - a2, a1 - a2)
    d4 = _cross(b2 - a2, b1 - a2)
    crossing = (np.sign(d1) * np.sign(d2) < 0) & (np.sign(d3) * np.sign(d4) < 0)
    dist = np.minimum.reduce([
        _point_segment_dist(a1, a2, b2), _point_segment_dist(b1, a2, b2),
        _point_segment_dist(a2, a1, b1), _point_segment_dist(b2, a1, b1),
    ])
    return np.where(crossing, 0.0, dist)


def _inside_triangles(p, tri):
    """Whether points ``p`` (shape (N,)) lie in closed triangles ``tri`` (shape (M, 3))."""
    p = p[:, None]
    s = [_cross(tri[None, :, (k + 1) % 3] - tri[None, :, k], p - tri[None, :, k]) for k in range(3)]
    s = np.stack(s)
    return np.all(s <= 0, axis=0) | np.all(s >= 0, axis=0)


def segments_cross(segs) -> bool:
    """True if any two of the segments (shape (N, 2) complex) touch, ignoring shared endpoints."""
    a, b = segs[:, 0], segs[:, 1]
    i, j = np.triu_indices(len(segs), 1)
    share = (np.isclose(a[i], a[j]) | np.isclose(a[i], b[j]) |
             np.isclose(b[i], a[j]) | np.isclose(b[i], b[j]))
    d = segment_distances(a[i], b[i], a[j], b[j])
    scale = max(np.abs(segs).max(), 1.0)
    # segments sharing an endpoint may only meet there: check they are not collinear-overlapping
    ang = np.abs(np.angle((b[i] - a[i]) / (b[j] - a[j])))
    overlap = share & (np.minimum(ang, math.pi - ang) < 1e-12)
    return bool(np.any((~share & (d <= SEPARATION_TOL * scale)) | overlap))


# --- Tutte layout -------------------------------------------------------------------

def _rotation_sign(d: DualGraph, z, u) -> int:
    """+1 if the neighbours of ``u`` appear counterclockwise in rotation order, else -1."""
    dirs = [z[d.directed(k)[1]] - z[u] for k in d.rotation[u]]
    total = sum(cmath.phase(dirs[(i + 1) % 3] / dirs[i]) % (2 * math.pi) for i in range(3))
    return 1 if total < 3 * math.pi else -1


def tutte_layout(d: DualGraph, outer: int | None = None) -> np.ndarray:
    """Barycentric straight-line embedding of the dual graph.

    The dual vertices around primal vertex ``outer`` (default: one of
    maximal degree) are pinned to a regular polygon; every other vertex is
    the average of its neighbours.  The result is mirrored if needed so that
    each vertex sees its neighbours clockwise in rotation order.

    Returns
    -------
    ndarray of complex, shape (|U|,)
    """
    t = d.triangulation
    if outer is None:
        deg = t.vertex_degrees
        outer = int(np.argmax(deg))
    loop = face_loops(d)[outer]
    n = d.n_vertices
    k = len(loop.faces)
    z = np.zeros(n, dtype=complex)
    pinned = np.zeros(n, dtype=bool)
    for i, u in enumerate(loop.faces):
        z[u] = cmath.exp(2j * math.pi * i / k)
        pinned[u] = True

    free = np.flatnonzero(~pinned)
    if len(free):
        pos = {u: i for i, u in enumerate(free)}
        A = np.zeros((len(free), len(free)))
        rhs = np.zeros(len(free), dtype=complex)
        g = d.graph
        for u in free:
            i = pos[u]
            A[i, i] = g.degree(u)
            for w, _ in g.adjacency[u]:
                if pinned[w]:
                    rhs[i] += z[w]
                else:
                    A[i, pos[w]] -= 1.0
        try:
            z[free] = scipy.linalg.solve(A, rhs)
        except (scipy.linalg.LinAlgError, ValueError) as exc:
            raise LayoutSingular(str(exc)) from exc
        if not np.all(np.isfinite(z)):
            raise LayoutSingular("non-finite layout")

    signs = {_rotation_sign(d, z, u) for u in range(n)}
    if signs == {1}:
        z = np.conj(z)
    elif signs != {-1}:
        raise CrossingDetected("layout rotation system is inconsistent")

    segs = np.array([[z[e.u], z[e.up]] for e in d.edges])
    if segments_cross(segs):
        raise CrossingDetected("barycentric layout has crossing edges")
    return z


# --- decomposition ------------------------------------------------------------------

def _local_triangle(imm: Immersion, u: int):
    """Clockwise plane copy of face ``u`` (corners in stored order) and its face point."""
    x1, x2, x3 = imm.face_coords(u)
    e1 = (x2 - x1) / np.linalg.norm(x2 - x1)
    w = (x3 - x1) - np.dot(x3 - x1, e1) * e1
    e2 = w / np.linalg.norm(w)

    def to_plane(p):
        q = p - x1
        # minus sign on the second axis makes the stored order clockwise
        return complex(np.dot(q, e1), -np.dot(q, e2))

    corners = np.array([to_plane(x1), to_plane(x2), to_plane(x3)])
    return corners, to_plane(imm.face_points[u])


def _foot(p, a, b):
    ab = b - a
    s = (np.conj(ab) * (p - a)).real / abs(ab) ** 2
    return a + s * ab, s


@dataclass(frozen=True)
class PlanarDecomposition:
    """Flattened triangles and middle paths.

    Attributes
    ----------
    corners : ndarray, shape (|U|, 3)
        Plane position of each face's corners, in stored vertex order.
    z_face : ndarray, shape (|U|,)
        Image of the face point of each face.
    z_mid : ndarray, shape (2 |E*|,)
        ``z_mid[d]`` is the foot of the perpendicular from the tail face
        point onto the shared side, for directed dual edge ``d``.
    bends : tuple of ndarray
        ``bends[e]`` lists the interior vertices of the middle path of dual
        edge ``e``, ordered from ``z_mid[2e]`` to ``z_mid[2e + 1]``.  Empty
        for a straight middle segment.
    scale : float
        Layout scale factor used.
    """

    immersion: Immersion
    layout: np.ndarray = field(repr=False)
    scale: float
    corners: np.ndarray = field(repr=False)
    z_face: np.ndarray = field(repr=False)
    z_mid: np.ndarray = field(repr=False)
    bends: tuple = field(repr=False, default=())

    def __post_init__(self):
        if not self.bends:
            empty = np.zeros(0, dtype=complex)
            object.__setattr__(self, "bends", tuple(empty for _ in self.immersion.dual.edges))

    @property
    def n_bends(self) -> int:
        return sum(len(b) for b in self.bends)

    def dagger(self) -> DaggerGraph:
        """Subdivided dual graph matching :attr:`positions`."""
        return subdivide(self.immersion.dual, [len(b) for b in self.bends])

    @property
    def positions(self) -> np.ndarray:
        """Positions of all vertices of :meth:`dagger`."""
        return np.concatenate([self.z_face, self.z_mid, *self.bends])

    def corner(self, u: int, v: int) -> complex:
        return self.corners[u][self.immersion.triangulation.faces[u].index(v)]

    def middle_path(self, d: int) -> np.ndarray:
        """Vertices of the middle path of directed dual edge ``d``, foot to foot."""
        e = d // 2
        p = np.concatenate([[self.z_mid[2 * e]], self.bends[e], [self.z_mid[2 * e + 1]]])
        return p if d % 2 == 0 else p[::-1]

    def middle_segments(self) -> np.ndarray:
        """All straight pieces of all middle paths, shape (N, 2)."""
        return np.concatenate([_pieces(self.middle_path(2 * e)) for e in range(len(self.bends))])


def _pieces(path):
    return np.stack([path[:-1], path[1:]], axis=1)


def _flat_faces(imm: Immersion):
    """Local triangle, face point and feet (relative to the face point) of every face."""
    out = []
    for u in range(imm.dual.n_vertices):
        tri, c = _local_triangle(imm, u)
        feet = np.array([_foot(c, tri[k], tri[(k + 1) % 3])[0] - c for k in range(3)])
        out.append((tri - c, feet))
    return out


def _place(imm: Immersion, layout, L: float, flat=None):
    """Straight middle segments; each triangle rotated by a circular mean."""
    d = imm.dual
    nf = d.n_vertices
    flat = _flat_faces(imm) if flat is None else flat
    corners = np.empty((nf, 3), dtype=complex)
    z_face = np.empty(nf, dtype=complex)
    z_mid = np.empty(d.n_directed, dtype=complex)
    for u in range(nf):
        tri, feet = flat[u]
        targets = np.array([layout[d.directed(dk)[1]] - layout[u] for dk in d.rotation[u]])
        mean = np.sum(np.conj(feet / np.abs(feet)) * targets / np.abs(targets))
        rot = mean / abs(mean) if abs(mean) > 0 else 1.0
        centre = L * layout[u]
        corners[u] = centre + rot * tri
        z_face[u] = centre
        for k, dk in enumerate(d.rotation[u]):
            z_mid[dk] = centre + rot * feet[k]
    return PlanarDecomposition(imm, layout, L, corners, z_face, z_mid)


ARC_STEP = math.pi / 12
#: arc radii around a face point, in units of the face's circumradius about it
ARC_RADII = (2.0, 3.0)


def _arcs(feet, targets, radius):
    """Local routing from the feet of one face to its three layout directions.

    The face is rotated so that side 0 points straight at its neighbour.  The
    other two paths leave their feet radially, follow an arc around the
    face point and then run along their layout edge.  Arcs that would
    cross are put on different radii.

    Returns the rotation and, per side, the path points after the foot
    (relative to the face point).
    """
    nrm = np.angle(feet)
    dirs = np.angle(targets)
    rot = cmath.exp(1j * (dirs[0] - nrm[0]))
    tau = 2 * math.pi
    a = [(nrm[k] - nrm[0]) % tau for k in range(3)]
    b = [(dirs[k] - dirs[0]) % tau for k in range(3)]
    span = {k: (min(a[k], b[k]), max(a[k], b[k])) for k in (1, 2)}

    def inside(x, k):
        lo, hi = span[k]
        return lo < x < hi

    # arc k must pass outside the radial from foot j and inside the radial
    # towards the neighbour of j
    outer = set()
    for k, j in ((1, 2), (2, 1)):
        if inside(a[j], k):
            outer.add(k)
        if inside(b[j], k):
            outer.add(j)
    if len(outer) > 1:
        raise DecompositionFailed("local routing arcs cannot be separated")
    r = {k: ARC_RADII[1] if k in outer else ARC_RADII[0] for k in (1, 2)}

    out = [np.zeros(0, dtype=complex)]
    for k in (1, 2):
        if abs(a[k] - b[k]) < 1e-12:
            out.append(np.zeros(0, dtype=complex))
            continue
        steps = max(1, math.ceil(abs(b[k] - a[k]) / ARC_STEP))
        ang = dirs[0] + np.linspace(a[k], b[k], steps + 1)
        out.append(r[k] * radius * np.exp(1j * ang))
    return rot, out


def _route(imm: Immersion, layout, L: float, flat=None):
    """Middle paths with local arcs; main pieces lie on the layout edges."""
    d = imm.dual
    nf = d.n_vertices
    flat = _flat_faces(imm) if flat is None else flat
    corners = np.empty((nf, 3), dtype=complex)
    z_face = np.empty(nf, dtype=complex)
    z_mid = np.empty(d.n_directed, dtype=complex)
    half = [None] * d.n_directed
    for u in range(nf):
        tri, feet = flat[u]
        targets = np.array([layout[d.directed(dk)[1]] - layout[u] for dk in d.rotation[u]])
        # anchor on the side that needs the least turning
        best = None
        for s in range(3):
            order = [(s + k) % 3 for k in range(3)]
            rot, pts = _arcs(feet[order], targets[order], np.abs(tri).max())
            cost = sum(len(p) for p in pts)
            if best is None or cost < best[0]:
                best = (cost, order, rot, pts)
        _, order, rot, pts = best
        centre = L * layout[u]
        corners[u] = centre + rot * tri
        z_face[u] = centre
        for k, p in zip(order, pts):
            dk = d.rotation[u][k]
            z_mid[dk] = centre + rot * feet[k]
            half[dk] = centre + p
    bends = tuple(np.concatenate([half[2 * e], half[2 * e + 1][::-1]]) for e in range(len(d.edges)))
    return PlanarDecomposition(imm, layout, L, corners, z_face, z_mid, bends)


def _segment_triangle_hits(a, b, tri, skip):
    """Whether segments ``[a, b]`` (shape (N,)) meet closed triangles (shape (M, 3)).

    ``skip`` is a boolean (N, M) mask of pairs to ignore.
    """
    hit = _inside_triangles(a, tri) | _inside_triangles(b, tri)
    for k in range(3):
        d = segment_distances(a[:, None], b[:, None], tri[None, :, k], tri[None, :, (k + 1) % 3])
        hit |= d <= 0
    return hit & ~skip


def verify_decomposition(pd: PlanarDecomposition) -> str | None:
    """Return ``None`` if ``pd`` is a valid planar decomposition, else a reason."""
    imm = pd.immersion
    d = imm.dual
    t = imm.triangulation
    tri = pd.corners
    nf = len(tri)

    for u, f in enumerate(t.faces):
        x = imm.coords[list(f)]
        for k in range(3):
            l3 = np.linalg.norm(x[(k + 1) % 3] - x[k])
            l2 = abs(tri[u][(k + 1) % 3] - tri[u][k])
            if abs(l2 - l3) > ISOMETRY_TOL * l3:
                return f"face {u} is not isometric to its immersed copy"
        a, b, c = tri[u]
        if _cross(b - a, c - a) >= 0:
            return f"face {u} is not clockwise"

    for dk in range(d.n_directed):
        u, _ = d.directed(dk)
        v1, v2 = d.shared_pair(dk)
        a, b = pd.corner(u, v1), pd.corner(u, v2)
        _, s = _foot(pd.z_face[u], a, b)
        if not (FOOT_TOL < s < 1 - FOOT_TOL):
            return f"projection point of {d.directed(dk)} is not inside its side"
        path = pd.middle_path(dk)
        seg = path[1] - path[0]
        if np.any(np.abs(np.diff(path)) == 0):
            return f"middle path of {d.directed(dk)} has a zero-length piece"
        # outward normal of side a -> b in a clockwise triangle is i (b - a)
        outward = 1j * (b - a)
        if (np.conj(outward) * seg).real <= SEPARATION_TOL * abs(outward) * abs(seg):
            return f"middle path of {d.directed(dk)} enters its triangle"

    scale = max(np.abs(np.concatenate([tri.ravel(), pd.positions])).max(), 1.0)
    tol = SEPARATION_TOL * scale

    sides_a = tri.ravel()
    sides_b = np.roll(tri, -1, axis=1).ravel()
    side_owner = np.repeat(np.arange(nf), 3)

    # triangles pairwise disjoint
    i, j = np.triu_indices(3 * nf, 1)
    keep = side_owner[i] != side_owner[j]
    dist = segment_distances(sides_a[i[keep]], sides_b[i[keep]], sides_a[j[keep]], sides_b[j[keep]])
    if np.any(dist <= tol):
        return "two triangles overlap"
    inside = _inside_triangles(tri[:, 0], tri)
    np.fill_diagonal(inside, False)
    if np.any(inside):
        return "a triangle contains another"

    # pieces of all middle paths, with owner path and position along it
    segs, owner, pos, last = [], [], [], []
    for e in range(len(d.edges)):
        p = _pieces(pd.middle_path(2 * e))
        segs.append(p)
        owner += [e] * len(p)
        pos += list(range(len(p)))
        last += [len(p) - 1] * len(p)
    segs = np.concatenate(segs)
    owner, pos, last = np.array(owner), np.array(pos), np.array(last)
    n = len(segs)

    for e in range(len(d.edges)):
        p = pd.middle_path(2 * e)
        for k in range(1, len(p) - 1):
            if abs(turning_angle(p[k] - p[k - 1], p[k + 1] - p[k])) >= math.pi - 1e-12:
                return f"middle path of dual edge {e} doubles back"

    # pieces pairwise disjoint, apart from consecutive pieces of one path
    if n > 1:
        i, j = np.triu_indices(n, 1)
        adjacent = (owner[i] == owner[j]) & (np.abs(pos[i] - pos[j]) == 1)
        i, j = i[~adjacent], j[~adjacent]
        for lo in range(0, len(i), 1 << 20):
            ii, jj = i[lo:lo + (1 << 20)], j[lo:lo + (1 << 20)]
            dist = segment_distances(segs[ii, 0], segs[ii, 1], segs[jj, 0], segs[jj, 1])
            if np.any(dist <= tol):
                return "two middle paths meet"

    # pieces avoid all triangles, except where a path leaves or enters its own
    ends = np.array([(e.u, e.up) for e in d.edges])
    skip = np.zeros((n, nf), dtype=bool)
    first = pos == 0
    skip[np.flatnonzero(first), ends[owner[first], 0]] = True
    fin = pos == last
    skip[np.flatnonzero(fin), ends[owner[fin], 1]] = True
    if np.any(_segment_triangle_hits(segs[:, 0], segs[:, 1], tri, skip)):
        return "a middle path meets a triangle"
    # near misses count as contact
    for k in range(3):
        dist = segment_distances(segs[:, 0, None], segs[:, 1, None],
                                 tri[None, :, k], tri[None, :, (k + 1) % 3])
        if np.any((dist <= tol) & ~skip):
            return "a middle path touches a triangle"
    return None


def initial_scale(imm: Immersion, layout) -> float:
    """Scale at which layout edges are eight times longer than the largest face."""
    d = imm.dual
    shortest = min(abs(layout[e.u] - layout[e.up]) for e in d.edges)
    radius = max(np.linalg.norm(imm.coords[list(f)] - imm.face_points[u], axis=1).max()
                 for u, f in enumerate(imm.triangulation.faces))
    return 4.0 * 2.0 * radius / shortest


def _search(place, imm, layout, L, max_doublings):
    reason = None
    for _ in range(max_doublings + 1):
        pd = place(imm, layout, L)
        reason = verify_decomposition(pd)
        if reason is None:
            return pd, None
        L *= 2.0
    return None, reason


def build_decomposition(imm: Immersion, layout=None, L: float | None = None,
                        max_doublings: int = MAX_DOUBLINGS,
                        routing: str = "auto") -> PlanarDecomposition:
    """Place the flattened faces along ``layout`` at scale ``L``.

    Each triangle is centred on ``L * layout[u]``.  With straight middle
    segments it is rotated so that the directions from its face point to its
    three side feet best match the layout directions to the corresponding
    neighbours (circular mean).  If the placement is not a valid planar
    decomposition the scale is doubled, at most ``max_doublings`` times.

    Straight segments cannot always work: along the outer face every
    segment turns by less than pi, which is not enough when the outer face
    has few sides (the regular tetrahedron is the basic example).  With
    ``routing="auto"`` such cases fall back to bent middle paths, which
    go around each face on short arcs and otherwise follow the layout
    edges; these are valid once the scale is large enough.

    Parameters
    ----------
    routing : {"auto", "straight", "bent"}

    Raises
    ------
    DecompositionFailed
    """
    if routing not in ("auto", "straight", "bent"):
        raise ValueError(f"unknown routing {routing!r}")
    if layout is None:
        layout = tutte_layout(imm.dual)
    if L is None:
        L = initial_scale(imm, layout)
    flat = _flat_faces(imm)
    reasons = []
    if routing in ("auto", "straight"):
        pd, reason = _search(lambda i, z, s: _place(i, z, s, flat), imm, layout, L, max_doublings)
        if pd is not None:
            return pd
        reasons.append(f"straight: {reason}")
    if routing in ("auto", "bent"):
        pd, reason = _search(lambda i, z, s: _route(i, z, s, flat), imm, layout, L, max_doublings)
        if pd is not None:
            return pd
        reasons.append(f"bent: {reason}")
    raise DecompositionFailed(f"no valid decomposition after {max_doublings} doublings ("
                              + "; ".join(reasons) + ")")


# --- turning data ---------------------------------------------------------------------

@dataclass(frozen=True)
class TurningData:
    """Per directed dual edge ``d``: side direction, side scale and path winding.

    ``beta[d]`` is the direction of ``z_{u v1} - z_{u v2}`` for the shared
    pair in the tail face's order, ``rho[d] ** 2`` that side's length and
    ``alpha[d]`` the total turning along face point -> foot -> (bends) ->
    foot -> face point.
    """

    beta: np.ndarray
    alpha: np.ndarray
    rho: np.ndarray

    def angle_residual(self) -> np.ndarray:
        """``|exp(i (beta - beta')) + exp(-i alpha)|`` per directed dual edge."""
        idx = np.arange(len(self.beta))
        return np.abs(np.exp(1j * (self.beta - self.beta[idx ^ 1])) + np.exp(-1j * self.alpha))


def turning_data(pd: PlanarDecomposition) -> TurningData:
    d = pd.immersion.dual
    nd = d.n_directed
    beta = np.empty(nd)
    alpha = np.empty(nd)
    rho = np.empty(nd)
    for dk in range(nd):
        u, up = d.directed(dk)
        v1, v2 = d.shared_pair(dk)
        side = pd.corner(u, v1) - pd.corner(u, v2)
        beta[dk] = cmath.phase(side)
        rho[dk] = math.sqrt(abs(side))
        p = np.concatenate([[pd.z_face[u]], pd.middle_path(dk), [pd.z_face[up]]])
        alpha[dk] = sum(turning_angle(p[k] - p[k - 1], p[k + 1] - p[k]) for k in range(1, len(p) - 1))
    return TurningData(beta, alpha, rho)
