"""Kac-Ward transition matrix of a planar straight-line graph.

For directed edges ``e1 = a -> w`` and ``e2 = w -> c`` with ``c != a`` the
transition entry is::

    Lambda[e1, e2] = y[w -> a] * y[w -> c] * exp(i/2 * turn(e1, e2))

(note the reversed first edge) and all other entries vanish.  The
Kac-Ward identity states ``det(Id - Lambda) = Z(x) ** 2`` where
``x[{a, b}] = y[a -> b] * y[b -> a]`` and ``Z`` is the even subgraph
generating function.
"""

from __future__ import annotations

import cmath
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.spatial import Delaunay

from .errors import SelfTestFailed, SvdFailure
from .oracle import partition_function
from .surface_graph import Graph
from .unfolding import turning_angle


@dataclass(frozen=True)
class KacWardMatrix:
    graph: Graph
    positions: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    matrix: np.ndarray = field(repr=False)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def involution(self) -> np.ndarray:
        """Permutation matrix ``J`` exchanging each directed edge with its reverse."""
        n = self.dimension
        J = np.zeros((n, n))
        J[np.arange(n), np.arange(n) ^ 1] = 1.0
        return J

    def out_edges(self, w: int) -> list[int]:
        return [self.graph.directed_index(w, c) for c, _ in self.graph.adjacency[w]]


def transition_matrix(graph: Graph, positions, weights, flip_turning_at=None) -> KacWardMatrix:
    """Assemble the transition matrix.

    Parameters
    ----------
    graph : Graph
        Planar graph; ``positions`` must be a straight-line embedding.
    positions : array_like of complex, shape (n,)
    weights : array_like of complex, shape (2 |E|,)
        Directed weights indexed as ``graph.directed``.
    flip_turning_at : int, optional
        Debugging aid: negate the turning-angle phase of transitions through
        this vertex (the identity then generally fails).
    """
    z = np.asarray(positions, dtype=complex)
    y = np.asarray(weights, dtype=complex)
    n = graph.n_directed
    lam = np.zeros((n, n), dtype=complex)
    for e1 in range(n):
        a, w = graph.directed(e1)
        back = y[e1 ^ 1]
        if back == 0:
            continue
        for c, _ in graph.adjacency[w]:
            if c == a:
                continue
            e2 = graph.directed_index(w, c)
            turn = turning_angle(z[w] - z[a], z[c] - z[w])
            if w == flip_turning_at:
                turn = -turn
            lam[e1, e2] = back * y[e2] * cmath.exp(0.5j * turn)
    return KacWardMatrix(graph, z, y, lam)


def blocks(m: KacWardMatrix) -> list[np.ndarray]:
    """Blocks of ``J Lambda``, one per vertex, indexed by its out-edges.

    ``block_w[i, j] = y[w w_i] * y[w w_j] * exp(i/2 * turn(w_i w, w w_j))``
    for ``i != j`` and zero on the diagonal.
    """
    g, z, y = m.graph, m.positions, m.weights
    out = []
    for w in range(g.n):
        nbrs = [c for c, _ in g.adjacency[w]]
        k = len(nbrs)
        B = np.zeros((k, k), dtype=complex)
        for i, a in enumerate(nbrs):
            for j, c in enumerate(nbrs):
                if i == j:
                    continue
                turn = turning_angle(z[w] - z[a], z[c] - z[w])
                B[i, j] = (y[g.directed_index(w, a)] * y[g.directed_index(w, c)]
                           * cmath.exp(0.5j * turn))
        out.append(B)
    return out


def hermitian_defect(m: KacWardMatrix, vertices=None) -> float:
    """Largest ``|B - B^*|`` entry over the blocks of ``vertices`` (default: all)."""
    bl = blocks(m)
    vertices = range(len(bl)) if vertices is None else vertices
    return max((float(np.abs(bl[w] - bl[w].conj().T).max()) for w in vertices if bl[w].size),
               default=0.0)


def kw_determinant(m: KacWardMatrix) -> complex:
    """``det(Id - Lambda)`` from a partially pivoted LU factorisation."""
    n = m.dimension
    if n == 0:
        return 1.0 + 0j
    lu, piv = scipy.linalg.lu_factor(np.eye(n) - m.matrix, check_finite=True)
    swaps = int(np.count_nonzero(piv != np.arange(n)))
    return complex((-1) ** swaps * np.prod(np.diag(lu)))


def zero_score(m: KacWardMatrix, det: complex | None = None) -> float:
    """``|det(Id - Lambda)|`` divided by ``prod_rows max(1, max_j |Lambda_ij|)``.

    Rows with entries of modulus at most one leave the determinant as is,
    so a genuine nonzero stays visible however large the matrix is.
    """
    if det is None:
        det = kw_determinant(m)
    if m.dimension == 0:
        return abs(det)
    rowmax = np.abs(m.matrix).max(axis=1)
    return float(abs(det) / np.prod(np.maximum(1.0, rowmax)))


def singular_values(m: KacWardMatrix) -> np.ndarray:
    """All singular values of ``Id - Lambda`` in ascending order."""
    try:
        s = scipy.linalg.svdvals(np.eye(m.dimension) - m.matrix)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise SvdFailure(str(exc)) from exc
    return np.sort(s)


def kernel_singular_values(m: KacWardMatrix, k: int) -> np.ndarray:
    if k > m.dimension:
        raise ValueError(f"k={k} exceeds dimension {m.dimension}")
    return singular_values(m)[:k]


# --- self-test ----------------------------------------------------------------------

KW_RTOL = 1e-9
MAX_SELFTEST_EDGES = 16


def random_planar_graph(rng: np.random.Generator, max_edges: int, max_points: int = 8):
    """Random connected subgraph of a Delaunay triangulation of random points.

    Returns ``(Graph, positions)``.
    """
    npts = int(rng.integers(3, max_points + 1))
    while True:
        pts = rng.uniform(size=(npts, 2))
        try:
            tri = Delaunay(pts)
        except Exception:  # qhull rejects (near-)collinear samples
            continue
        break
    cand = set()
    for s in tri.simplices:
        for i in range(3):
            a, b = int(s[i]), int(s[(i + 1) % 3])
            cand.add((min(a, b), max(a, b)))
    cand = sorted(cand)
    order = rng.permutation(len(cand))
    # random spanning tree first, then extra edges up to a random budget
    parent = list(range(npts))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    tree, rest = [], []
    for k in order:
        a, b = cand[k]
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            tree.append(cand[k])
        else:
            rest.append(cand[k])
    budget = int(rng.integers(len(tree), max(len(tree), min(max_edges, len(cand))) + 1))
    edges = tree + rest[: max(0, budget - len(tree))]
    if len(edges) > max_edges:
        # only possible when the tree alone exceeds the budget
        edges = edges[:max_edges]
    g = Graph(npts, tuple(edges))
    if not g.is_connected():
        return random_planar_graph(rng, max_edges, max_points=max(3, npts - 1))
    z = pts[:, 0] + 1j * pts[:, 1]
    return g, z


def random_directed_weights(rng: np.random.Generator, g: Graph):
    """Directed weights whose products are uniform in the closed unit disc."""
    m = len(g.edges)
    x = np.sqrt(rng.uniform(size=m)) * np.exp(2j * math.pi * rng.uniform(size=m))
    y = np.empty(2 * m, dtype=complex)
    root = np.sqrt(x)
    lam = np.exp(rng.uniform(-0.5, 0.5, size=m) + 2j * math.pi * rng.uniform(size=m))
    y[0::2] = root * lam
    y[1::2] = root / lam
    return x, y


def resplit(rng: np.random.Generator, y):
    """Rescale a directed split while keeping every product ``y[ab] * y[ba]``."""
    m = len(y) // 2
    lam = np.exp(rng.uniform(-0.5, 0.5, size=m) + 2j * math.pi * rng.uniform(size=m))
    out = np.array(y, dtype=complex)
    out[0::2] *= lam
    out[1::2] /= lam
    return out


def reembed(rng: np.random.Generator, z):
    """Image of an embedding under a random invertible affine map (possibly a reflection)."""
    while True:
        A = rng.normal(size=(2, 2))
        if abs(np.linalg.det(A)) > 0.2:
            break
    p = np.stack([z.real, z.imag])
    q = A @ p + rng.normal(size=(2, 1))
    return q[0] + 1j * q[1]


@dataclass
class TrialResult:
    seed: int
    n_vertices: int
    n_edges: int
    det: complex
    z_oracle: complex
    identity_error: float
    resplit_error: float
    embedding_error: float
    passed: bool


@dataclass
class SelfTestReport:
    seed: int
    trials: list[TrialResult]
    elapsed: float

    @property
    def passed(self) -> bool:
        return all(t.passed for t in self.trials)

    def to_dict(self) -> dict:
        def c(z):
            return [z.real, z.imag]
        return {
            "seed": self.seed,
            "trials": len(self.trials),
            "passed": self.passed,
            "elapsed_s": self.elapsed,
            "failures": [t.seed for t in self.trials if not t.passed],
            "max_identity_error": max((t.identity_error for t in self.trials), default=0.0),
            "max_resplit_error": max((t.resplit_error for t in self.trials), default=0.0),
            "max_embedding_error": max((t.embedding_error for t in self.trials), default=0.0),
            "records": [
                {"seed": t.seed, "V": t.n_vertices, "E": t.n_edges, "det": c(t.det),
                 "z_oracle": c(t.z_oracle), "identity_error": t.identity_error,
                 "resplit_error": t.resplit_error, "embedding_error": t.embedding_error,
                 "passed": t.passed}
                for t in self.trials
            ],
        }


def _trial(trial_seed: int, max_edges: int, flip_turning: bool) -> TrialResult:
    rng = np.random.default_rng(trial_seed)
    g, z = random_planar_graph(rng, max_edges)
    x, y = random_directed_weights(rng, g)
    flip = 0 if flip_turning else None
    det = kw_determinant(transition_matrix(g, z, y, flip_turning_at=flip))
    zo = partition_function(g, x)
    ref = max(1.0, abs(zo) ** 2)
    identity_error = abs(det - zo ** 2) / ref
    det_b = kw_determinant(transition_matrix(g, z, resplit(rng, y), flip_turning_at=flip))
    det_c = kw_determinant(transition_matrix(g, reembed(rng, z), y, flip_turning_at=flip))
    scale = max(1.0, abs(det))
    resplit_error = abs(det_b - det) / scale
    embedding_error = abs(det_c - det) / scale
    passed = identity_error <= KW_RTOL and resplit_error <= KW_RTOL and embedding_error <= KW_RTOL
    return TrialResult(trial_seed, g.n, len(g.edges), det, zo, identity_error,
                       resplit_error, embedding_error, passed)


def thread_count() -> int:
    try:
        cap = int(os.environ.get("KWZ_THREADS", "0"))
    except ValueError:
        cap = 0
    avail = os.cpu_count() or 1
    return max(1, min(cap, avail) if cap > 0 else avail)


def kw_selftest(seed: int = 0, trials: int = 50, max_edges: int = 14,
                flip_turning: bool = False, strict: bool = False) -> SelfTestReport:
    """Check the Kac-Ward identity on random small planar graphs.

    Each trial draws a random connected planar straight-line graph and
    random complex directed weights, then checks ``det(Id - Lambda) = Z^2``
    against the brute-force oracle, and that the determinant is unchanged by
    re-splitting the directed weights and by re-embedding the graph.

    Parameters
    ----------
    strict : bool
        Raise :class:`SelfTestFailed` on the first failing trial.
    """
    if max_edges > MAX_SELFTEST_EDGES:
        raise ValueError(f"max_edges must be at most {MAX_SELFTEST_EDGES}")
    start = time.perf_counter()
    seeds = [int(s) for s in np.random.SeedSequence(seed).generate_state(trials)] if trials else []
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        results = list(pool.map(lambda s: _trial(s, max_edges, flip_turning), seeds))
    report = SelfTestReport(seed, results, time.perf_counter() - start)
    if strict:
        for r in results:
            if not r.passed:
                raise SelfTestFailed(f"Kac-Ward self-test failed for trial seed {r.seed}", seed=r.seed)
    return report
