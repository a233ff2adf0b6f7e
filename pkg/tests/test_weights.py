import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kwz import errors
from kwz import immersion as im
from kwz.surface_graph import subdivide
from kwz.weights import coupling_from_weight, direct_weights, lb_weight, split_weights

angles = st.floats(-math.pi, math.pi, allow_nan=False)
face = st.floats(1e-3, math.pi - 1e-3)


def _system(t, x, bends=None):
    imm = im.validate_immersion(t, x)
    a = im.edge_angles(imm)
    dg = subdivide(imm.dual, bends)
    return a, dg, direct_weights(split_weights(a, dg), a)


def test_tetrahedron_weight(tetra):
    a, _, ws = _system(*tetra)
    sign = np.sign(a.theta[0])
    np.testing.assert_allclose(ws.y_star, (1 + sign * 1j * math.sqrt(2)) / 3, atol=1e-15)
    np.testing.assert_allclose(np.abs(ws.y_star), 1 / math.sqrt(3), atol=1e-15)


def test_tetrahedron_corner_weights(tetra):
    _, dg, ws = _system(*tetra)
    for ch in dg.chain:
        assert ws.y_dagger[ch[0]] == pytest.approx(3 ** -0.25, abs=1e-15)
        assert ws.y_dagger[ch[-1]] == pytest.approx(3 ** -0.25, abs=1e-15)
        assert abs(ws.y_dagger[ch[1]]) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("bends", [None, [0, 3, 1, 0, 2, 0, 0, 5, 1]])
def test_chain_products_reproduce_dual_weight(bipyramid, bends):
    _, dg, ws = _system(*bipyramid, bends=bends)
    for e, ch in enumerate(dg.chain):
        assert np.prod(ws.y_dagger[list(ch)]) == pytest.approx(ws.y_star[e], abs=1e-15)


def test_directed_products_match_undirected():
    t, x = im.perturbed(11, 0.3, seed=5)
    _, dg, ws = _system(t, x, bends=[e % 3 for e in range(27)])
    yd = ws.y_directed
    np.testing.assert_allclose(yd[0::2] * yd[1::2], ws.y_dagger, atol=1e-15)
    # weight entering a face is 1
    g = dg.graph
    for e, path in enumerate(dg.path):
        assert yd[g.directed_index(path[1], path[0])] == 1.0
        assert yd[g.directed_index(path[-2], path[-1])] == 1.0


def test_flat_pair_gives_real_weight(split_tetra):
    a, dg, ws = _system(*split_tetra)
    flat = np.abs(a.theta) < 1e-14
    assert flat.sum() == 3
    assert np.all(ws.y_star[flat].real > 0)
    np.testing.assert_allclose(ws.y_star[flat].imag, 0.0, atol=1e-15)


def test_face_angle_range():
    with pytest.raises(errors.PhiOutOfRange):
        lb_weight(0.2, math.pi, 1.0)
    with pytest.raises(errors.PhiOutOfRange):
        lb_weight(0.2, 1.0, 0.0)
    assert lb_weight(0.0, math.pi / 2, math.pi / 2) == pytest.approx(1.0)


@given(angles, face, face)
def test_reflected_phase_conjugates_weight(theta, p, q):
    assert lb_weight(-theta, p, q) == pytest.approx(lb_weight(theta, p, q).conjugate(), abs=1e-12)
    assert abs(lb_weight(theta, p, q)) == pytest.approx(
        math.sqrt(math.tan(p / 2) * math.tan(q / 2)), rel=1e-12)


def test_coupling_examples():
    assert coupling_from_weight(1j) == pytest.approx(1j * math.pi / 4, abs=1e-15)
    x = math.tanh(1.0)
    assert coupling_from_weight(x) == pytest.approx(1.0, abs=1e-15)
    y = (1 - 1j * math.sqrt(2)) / 3
    assert cmath.tanh(coupling_from_weight(y)) == pytest.approx(y, abs=1e-15)
    for bad in (1, -1):
        with pytest.raises(errors.SingularCoupling):
            coupling_from_weight(bad)
