import math

import numpy as np
import pytest

from kwz import errors
from kwz import immersion as im
from kwz.kac_ward import random_directed_weights, random_planar_graph
from kwz.oracle import (cycle_dimension, enumerate_even_subgraphs, partition_function,
                        partition_function_brute_force)
from kwz.surface_graph import Graph, dual_graph, subdivide
from kwz.weights import split_weights

K4 = Graph(4, ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)))


def test_k4_polynomial():
    for t in (0.3, -0.7, 0.2 + 0.5j):
        assert partition_function(K4, [t] * 6) == pytest.approx(1 + 4 * t ** 3 + 3 * t ** 4, abs=1e-15)


def test_k4_even_subgraphs():
    subs = list(enumerate_even_subgraphs(K4))
    sizes = sorted(len(s) for s in subs)
    assert sizes == [0, 3, 3, 3, 3, 4, 4, 4]


def test_tetrahedron_weight_is_a_root():
    y = (1 - 1j * math.sqrt(2)) / 3
    assert abs(partition_function(K4, [y] * 6)) <= 1e-15
    assert abs(partition_function(K4, [y.conjugate()] * 6)) <= 1e-15


def test_cycle_and_tree():
    x = [0.5, 2.0, -1j]
    assert partition_function(Graph(3, ((0, 1), (1, 2), (0, 2))), x) == pytest.approx(1 - 1j)
    assert partition_function(Graph(4, ((0, 1), (1, 2), (1, 3))), x) == 1.0


def test_zero_and_unit_weights():
    g = dual_graph(im.generate("bipyramid")[0]).graph
    assert partition_function(g, np.zeros(9)) == 1.0
    assert partition_function(g, np.ones(9)) == 2 ** cycle_dimension(g)
    assert cycle_dimension(g) == 4


@pytest.mark.parametrize("seed", range(8))
def test_agrees_with_parity_filter(seed):
    rng = np.random.default_rng(seed)
    g, _ = random_planar_graph(rng, 14)
    x, _ = random_directed_weights(rng, g)
    assert partition_function(g, x) == pytest.approx(partition_function_brute_force(g, x), abs=1e-13)


def test_conjugate_weights_conjugate_z():
    rng = np.random.default_rng(11)
    g, _ = random_planar_graph(rng, 14)
    x, _ = random_directed_weights(rng, g)
    assert partition_function(g, x.conj()) == pytest.approx(partition_function(g, x).conjugate(),
                                                            abs=1e-14)


def test_threading_does_not_change_value():
    t, _ = im.random_convex(12, seed=1)
    g = dual_graph(t).graph
    x = np.exp(1j * np.arange(len(g.edges))) * 0.8
    assert partition_function(g, x, threads=1) == pytest.approx(partition_function(g, x, threads=4),
                                                                abs=1e-14)


def test_subdivision_invariance(tetra):
    t, x = tetra
    imm = im.validate_immersion(t, x)
    a = im.edge_angles(imm)
    dg = subdivide(imm.dual, [0, 1, 0, 2, 0, 0])
    ws = split_weights(a, dg)
    assert cycle_dimension(dg.graph) == 3
    assert partition_function(dg.graph, ws.y_dagger) == pytest.approx(
        partition_function(imm.dual.graph, ws.y_star), abs=1e-15)


def test_dimension_limit():
    t, _ = im.random_convex(12, seed=1)
    g = dual_graph(t).graph
    with pytest.raises(errors.TooLarge):
        partition_function(g, np.ones(len(g.edges)), max_dim=cycle_dimension(g) - 1)
    with pytest.raises(ValueError):
        partition_function(g, np.ones(3))
