"""Combinatorics of a triangulated sphere.

Holds the triangulation ``G``, its trivalent dual ``G*``, the graph obtained
by cutting every dual edge into a chain (three pieces, or more when the
middle path bends), and the cycle-space helpers used to enumerate even
subgraphs.

Indexing conventions
--------------------
* Faces of the triangulation (= dual vertices) are numbered by their
  position in the face list.
* Dual edges are the sorted face pairs ``(u, u')`` with ``u < u'``.  Dual
  edge ``e`` has two orientations: directed dual edge ``2*e`` is ``u -> u'``
  and ``2*e + 1`` is ``u' -> u``.
* In the subdivided graph, face ``u`` keeps index ``u``, the middle vertex
  attached to directed dual edge ``d`` gets index ``n_faces + d`` and bend
  vertices follow, grouped by dual edge.
* For any :class:`Graph`, edge ``j = (a, b)`` with ``a < b`` has directed
  copies ``2*j = a -> b`` and ``2*j + 1 = b -> a``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

from .errors import (
    Disconnected,
    InconsistentOrientation,
    InvalidMesh,
    NonManifoldEdge,
    NotSphere,
)


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices ``0 .. n-1``.

    Edges are stored as ``(a, b)`` with ``a < b``; adjacency lists keep the
    order in which edges were given.
    """

    n: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        norm = []
        for a, b in self.edges:
            if a == b:
                raise InvalidMesh(f"loop edge at vertex {a}")
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise InvalidMesh(f"edge ({a}, {b}) out of range for n={self.n}")
            norm.append((min(a, b), max(a, b)))
        if len(set(norm)) != len(norm):
            raise InvalidMesh("multigraphs are not supported")
        object.__setattr__(self, "edges", tuple(norm))

    @cached_property
    def edge_index(self) -> dict[tuple[int, int], int]:
        return {e: j for j, e in enumerate(self.edges)}

    @cached_property
    def adjacency(self) -> list[list[tuple[int, int]]]:
        """``adjacency[v]`` lists ``(neighbour, edge index)`` pairs."""
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.n)]
        for j, (a, b) in enumerate(self.edges):
            adj[a].append((b, j))
            adj[b].append((a, j))
        return adj

    @property
    def n_directed(self) -> int:
        return 2 * len(self.edges)

    def directed(self, k: int) -> tuple[int, int]:
        """Tail and head of directed edge ``k``."""
        a, b = self.edges[k // 2]
        return (a, b) if k % 2 == 0 else (b, a)

    def directed_index(self, tail: int, head: int) -> int:
        if tail < head:
            return 2 * self.edge_index[(tail, head)]
        return 2 * self.edge_index[(head, tail)] + 1

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        seen = _bfs_order(self, 0)[0]
        return len(seen) == self.n


def _bfs_order(g: Graph, root: int):
    """BFS visiting neighbours in stored order.

    Returns the visit order and, for each reached vertex, the
    ``(parent, edge index)`` used to reach it.
    """
    parent = {root: (None, None)}
    order = [root]
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for w, j in g.adjacency[v]:
            if w not in parent:
                parent[w] = (v, j)
                order.append(w)
                queue.append(w)
    return order, parent


def cycle_space_basis(g: Graph) -> list[tuple[int, ...]]:
    """Fundamental cycles with respect to a BFS spanning tree rooted at 0.

    Each cycle is returned as a sorted tuple of edge indices.  The
    symmetric-difference span of the basis is exactly the set of even
    subgraphs of ``g``.

    Raises
    ------
    Disconnected
        If ``g`` is not connected.
    """
    if g.n == 0:
        return []
    order, parent = _bfs_order(g, 0)
    if len(order) != g.n:
        raise Disconnected(f"graph has unreachable vertices ({g.n - len(order)})")
    tree = {j for (_, j) in parent.values() if j is not None}
    depth = {0: 0}
    for v in order[1:]:
        depth[v] = depth[parent[v][0]] + 1

    basis = []
    for j, (a, b) in enumerate(g.edges):
        if j in tree:
            continue
        cyc = {j}
        x, y = a, b
        while x != y:
            if depth[x] < depth[y]:
                x, y = y, x
            p, pj = parent[x]
            cyc ^= {pj}
            x = p
        basis.append(tuple(sorted(cyc)))
    return basis


# --- triangulation ------------------------------------------------------------

@dataclass(frozen=True)
class Triangulation:
    """Consistently oriented triangulation of the sphere.

    Use :func:`build_triangulation` to construct one; it validates all
    invariants.
    """

    vertex_count: int
    faces: tuple[tuple[int, int, int], ...]
    edges: tuple[tuple[int, int], ...] = field(repr=False)
    #: directed edge (a, b) -> face whose cyclic order contains a -> b
    halfedge_face: dict = field(repr=False, compare=False)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def euler_characteristic(self) -> int:
        return self.vertex_count - len(self.edges) + len(self.faces)

    @cached_property
    def corners(self) -> tuple[tuple[int, int], ...]:
        return tuple((u, v) for u, f in enumerate(self.faces) for v in f)

    @cached_property
    def vertex_degrees(self) -> list[int]:
        deg = [0] * self.vertex_count
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def primal_graph(self) -> Graph:
        return Graph(self.vertex_count, self.edges)


def _face_halfedges(face):
    a, b, c = face
    return ((a, b), (b, c), (c, a))


def build_triangulation(vertex_count: int, faces) -> Triangulation:
    """Validate a face list and return the triangulation.

    Parameters
    ----------
    vertex_count : int
        Number of vertices; faces index ``0 .. vertex_count - 1``.
    faces : sequence of triples
        Ordered vertex triples.  All faces must induce the same orientation,
        i.e. every edge is traversed once in each direction.

    Raises
    ------
    InvalidMesh, NonManifoldEdge, InconsistentOrientation, Disconnected, NotSphere
    """
    faces = tuple(tuple(int(v) for v in f) for f in faces)
    for f in faces:
        if len(f) != 3:
            raise InvalidMesh(f"face {f} is not a triangle")
        if len(set(f)) != 3:
            raise InvalidMesh(f"face {f} repeats a vertex")
        if not all(0 <= v < vertex_count for v in f):
            raise InvalidMesh(f"face {f} indexes outside 0..{vertex_count - 1}")

    undirected: dict[tuple[int, int], list[int]] = {}
    halfedge_face: dict[tuple[int, int], int] = {}
    for u, f in enumerate(faces):
        for a, b in _face_halfedges(f):
            undirected.setdefault((min(a, b), max(a, b)), []).append(u)
    for e, us in undirected.items():
        if len(us) != 2:
            raise NonManifoldEdge(f"edge {e} belongs to {len(us)} faces")
    for u, f in enumerate(faces):
        for h in _face_halfedges(f):
            if h in halfedge_face:
                raise InconsistentOrientation(
                    f"faces {halfedge_face[h]} and {u} both traverse {h[0]}->{h[1]}"
                )
            halfedge_face[h] = u

    edges = tuple(sorted(undirected))
    g = Graph(vertex_count, edges)
    if not g.is_connected():
        raise Disconnected("triangulation is not connected")
    t = Triangulation(vertex_count, faces, edges, halfedge_face)
    if t.euler_characteristic != 2:
        raise NotSphere(f"Euler characteristic is {t.euler_characteristic}, expected 2")
    return t


# --- dual graph ---------------------------------------------------------------

@dataclass(frozen=True)
class DualEdge:
    """Dual edge between faces ``u < up`` sharing the primal edge ``{v1, v2}``.

    ``v1 -> v2`` is a step of ``u``'s cyclic order (so ``up`` traverses
    ``v2 -> v1``); ``v3`` and ``v3p`` are the vertices opposite the shared
    edge in ``u`` and ``up``.
    """

    u: int
    up: int
    v1: int
    v2: int
    v3: int
    v3p: int


@dataclass(frozen=True)
class DualGraph:
    triangulation: Triangulation
    edges: tuple[DualEdge, ...]
    #: rotation[u] = three directed dual edges leaving u, in the face's order
    #: (across sides v1v2, v2v3, v3v1 of the stored triple)
    rotation: tuple[tuple[int, int, int], ...]

    @property
    def n_vertices(self) -> int:
        return self.triangulation.n_faces

    @cached_property
    def graph(self) -> Graph:
        return Graph(self.n_vertices, tuple((e.u, e.up) for e in self.edges))

    @property
    def n_directed(self) -> int:
        return 2 * len(self.edges)

    def directed(self, d: int) -> tuple[int, int]:
        """Tail and head faces of directed dual edge ``d``."""
        e = self.edges[d // 2]
        return (e.u, e.up) if d % 2 == 0 else (e.up, e.u)

    def reverse(self, d: int) -> int:
        return d ^ 1

    def shared_pair(self, d: int) -> tuple[int, int]:
        """Shared primal edge in the tail face's cyclic order."""
        e = self.edges[d // 2]
        return (e.v1, e.v2) if d % 2 == 0 else (e.v2, e.v1)

    def opposite(self, d: int) -> int:
        """Vertex of the tail face not on the shared edge."""
        e = self.edges[d // 2]
        return e.v3 if d % 2 == 0 else e.v3p

    def directed_between(self, u: int, w: int) -> int:
        j = self.graph.edge_index[(min(u, w), max(u, w))]
        return 2 * j if u < w else 2 * j + 1


def dual_graph(t: Triangulation) -> DualGraph:
    """Planar dual with rotation system and shared-edge annotation."""
    records = []
    for (a, b) in t.edges:
        fa = t.halfedge_face[(a, b)]
        fb = t.halfedge_face[(b, a)]
        if fa < fb:
            u, up, v1, v2 = fa, fb, a, b
        else:
            u, up, v1, v2 = fb, fa, b, a
        (v3,) = set(t.faces[u]) - {v1, v2}
        (v3p,) = set(t.faces[up]) - {v1, v2}
        records.append(DualEdge(u, up, v1, v2, v3, v3p))
    records.sort(key=lambda e: (e.u, e.up))
    d = DualGraph(t, tuple(records), ())

    rotation = []
    for u, f in enumerate(t.faces):
        out = []
        for a, b in _face_halfedges(f):
            w = t.halfedge_face[(b, a)]
            out.append(d.directed_between(u, w))
        rotation.append(tuple(out))
    object.__setattr__(d, "rotation", tuple(rotation))
    return d


# --- subdivided graph -----------------------------------------------------------

@dataclass(frozen=True)
class DaggerGraph:
    """Dual graph with every edge cut into a chain.

    Dual edge ``{u, u'}`` becomes ``u - (uu') - [bends] - (u'u) - u'``; with
    no bends this is the chain of three edges ``{u, uu'}``, ``{uu', u'u}``,
    ``{u'u, u'}``.  Bend vertices are numbered after all middle vertices.
    """

    dual: DualGraph
    graph: Graph
    #: path[e] = dagger vertices from u to u' for dual edge e
    path: tuple[tuple[int, ...], ...]
    #: chain[e] = dagger edge indices along path[e]
    chain: tuple[tuple[int, ...], ...]

    @property
    def n_faces(self) -> int:
        return self.dual.n_vertices

    def middle(self, d: int) -> int:
        """Dagger vertex standing for directed dual edge ``d``."""
        return self.n_faces + d

    def is_middle(self, w: int) -> bool:
        """True for the vertices of the middle paths (including bends)."""
        return w >= self.n_faces

    def directed_path(self, d: int) -> tuple[int, ...]:
        """Dagger vertices from the tail to the head of directed dual edge ``d``."""
        p = self.path[d // 2]
        return p if d % 2 == 0 else p[::-1]


def subdivide(d: DualGraph, bends=None) -> DaggerGraph:
    """Cut every dual edge into a chain.

    Parameters
    ----------
    bends : sequence of int, optional
        Number of extra vertices on the middle part of each dual edge.
    """
    nf = d.n_vertices
    m = len(d.edges)
    bends = [0] * m if bends is None else [int(b) for b in bends]
    nxt = nf + d.n_directed
    paths = []
    for e, de in enumerate(d.edges):
        extra = tuple(range(nxt, nxt + bends[e]))
        nxt += bends[e]
        paths.append((de.u, nf + 2 * e) + extra + (nf + 2 * e + 1, de.up))
    edges = sorted((min(a, b), max(a, b)) for p in paths for a, b in zip(p, p[1:]))
    g = Graph(nxt, tuple(edges))
    chain = tuple(tuple(g.edge_index[(min(a, b), max(a, b))] for a, b in zip(p, p[1:]))
                  for p in paths)
    return DaggerGraph(d, g, tuple(paths), chain)


# --- face loops -------------------------------------------------------------------

@dataclass(frozen=True)
class FaceLoop:
    """Closed walk of dual edges around primal vertex ``vertex``."""

    vertex: int
    faces: tuple[int, ...]
    directed_edges: tuple[int, ...]


def face_loops(d: DualGraph) -> list[FaceLoop]:
    """One loop per primal vertex, following the stored face orientation.

    Starting from a face ``(v, a, b)`` the walk crosses the edge ``{v, b}``
    into the face that contains ``v -> b``, and so on until it closes.
    """
    t = d.triangulation
    start: dict[int, int] = {}
    for u, f in enumerate(t.faces):
        for v in f:
            start.setdefault(v, u)

    loops = []
    for v in range(t.vertex_count):
        u0 = start[v]
        faces = [u0]
        u = u0
        while True:
            f = t.faces[u]
            i = f.index(v)
            b = f[(i + 2) % 3]
            u = t.halfedge_face[(v, b)]
            if u == u0:
                break
            faces.append(u)
        k = len(faces)
        darts = tuple(d.directed_between(faces[i], faces[(i + 1) % k]) for i in range(k))
        loops.append(FaceLoop(v, tuple(faces), darts))
    return loops
