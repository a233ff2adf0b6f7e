"""Brute-force generating function of even subgraphs.

``Z(x) = sum over even subgraphs w of prod_{e in w} x_e``.  Even subgraphs
are enumerated as the span of a fundamental cycle basis, in Gray-code
order; each subgraph's edge product is recomputed from scratch (no
division by previously included weights, which is unstable near zero).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from itertools import combinations

import numpy as np

from .errors import TooLarge
from .surface_graph import Graph, cycle_space_basis

MAX_CYCLE_DIM = 26
CHUNK = 1 << 14


def _basis_matrix(g: Graph, basis) -> np.ndarray:
    B = np.zeros((len(basis), len(g.edges)), dtype=np.uint8)
    for i, cyc in enumerate(basis):
        B[i, list(cyc)] = 1
    return B


def _gray_masks(B: np.ndarray, start: int, stop: int) -> np.ndarray:
    """Edge membership of Gray-code combinations ``start <= k < stop``."""
    k = np.arange(start, stop, dtype=np.int64)
    gray = k ^ (k >> 1)
    dim = B.shape[0]
    bits = ((gray[:, None] >> np.arange(dim, dtype=np.int64)) & 1).astype(np.int64)
    return (bits @ B.astype(np.int64)) & 1


def _terms(B, x, start, stop):
    for lo in range(start, stop, CHUNK):
        hi = min(stop, lo + CHUNK)
        mask = _gray_masks(B, lo, hi).astype(bool)
        yield np.prod(np.where(mask, x[None, :], 1.0), axis=1)


def _partial_sum(B, x, start, stop):
    """Compensated real and imaginary sums over one Gray-code range."""
    re, im = [], []
    for t in _terms(B, x, start, stop):
        re.append(math.fsum(t.real.tolist()))
        im.append(math.fsum(t.imag.tolist()))
    return math.fsum(re), math.fsum(im)


def _check(g: Graph, max_dim: int):
    basis = cycle_space_basis(g)
    if len(basis) > max_dim:
        raise TooLarge(f"cycle space dimension {len(basis)} exceeds {max_dim}")
    return basis


def cycle_dimension(g: Graph) -> int:
    return len(g.edges) - g.n + 1


def enumerate_even_subgraphs(g: Graph, max_dim: int = MAX_CYCLE_DIM):
    """Yield every even subgraph as a sorted tuple of edge indices."""
    basis = _check(g, max_dim)
    B = _basis_matrix(g, basis)
    total = 1 << len(basis)
    for lo in range(0, total, CHUNK):
        for row in _gray_masks(B, lo, min(total, lo + CHUNK)):
            yield tuple(int(j) for j in np.flatnonzero(row))


def partition_function(g: Graph, x, max_dim: int = MAX_CYCLE_DIM,
                       threads: int | None = None) -> complex:
    """Compensated sum of edge-weight products over all even subgraphs.

    Parameters
    ----------
    g : Graph
        Connected graph.
    x : array_like of complex, shape (|E|,)
    max_dim : int
        Largest cycle-space dimension accepted.
    threads : int, optional
        Worker threads; defaults to ``KWZ_THREADS`` or the CPU count.

    Raises
    ------
    TooLarge, Disconnected
    """
    x = np.asarray(x, dtype=complex)
    if x.shape != (len(g.edges),):
        raise ValueError(f"expected {len(g.edges)} weights, got shape {x.shape}")
    basis = _check(g, max_dim)
    B = _basis_matrix(g, basis)
    total = 1 << len(basis)
    if threads is None:
        cap = int(os.environ.get("KWZ_THREADS", "0") or 0)
        threads = cap if cap > 0 else (os.cpu_count() or 1)
    nparts = max(1, min(threads, total // CHUNK))
    bounds = [total * i // nparts for i in range(nparts + 1)]
    if nparts == 1:
        parts = [_partial_sum(B, x, 0, total)]
    else:
        with ThreadPoolExecutor(max_workers=nparts) as pool:
            parts = list(pool.map(lambda i: _partial_sum(B, x, bounds[i], bounds[i + 1]),
                                  range(nparts)))
    return complex(math.fsum(p[0] for p in parts), math.fsum(p[1] for p in parts))


def even_subgraphs_brute_force(g: Graph) -> list[tuple[int, ...]]:
    """Degree-parity filter over all ``2 ** |E|`` edge subsets."""
    m = len(g.edges)
    if m > 22:
        raise TooLarge(f"{m} edges is too many for exhaustive filtering")
    out = []
    for r in range(m + 1):
        for sub in combinations(range(m), r):
            deg = [0] * g.n
            for j in sub:
                a, b = g.edges[j]
                deg[a] += 1
                deg[b] += 1
            if all(k % 2 == 0 for k in deg):
                out.append(sub)
    return out


def partition_function_brute_force(g: Graph, x) -> complex:
    x = np.asarray(x, dtype=complex)
    terms = [complex(np.prod(x[list(s)])) if s else 1 + 0j for s in even_subgraphs_brute_force(g)]
    return complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))
