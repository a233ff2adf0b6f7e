import numpy as np
import pytest

from kwz import immersion as im
from kwz.surface_graph import build_triangulation, dual_graph

OCTAHEDRON_COORDS = np.array([[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]],
                             dtype=float)
OCTAHEDRON_FACES = ((0, 2, 4), (2, 1, 4), (1, 3, 4), (3, 0, 4),
                    (2, 0, 5), (1, 2, 5), (3, 1, 5), (0, 3, 5))


def octahedron():
    return build_triangulation(6, OCTAHEDRON_FACES), OCTAHEDRON_COORDS.copy()


def split_face_tetrahedron():
    """Regular tetrahedron with face (1, 3, 2) coned off at its centroid."""
    x = np.vstack([im.TETRAHEDRON_COORDS, im.TETRAHEDRON_COORDS[[1, 2, 3]].mean(axis=0)])
    faces = [f for f in im.TETRAHEDRON_FACES if f != (1, 3, 2)]
    faces += [(1, 3, 4), (3, 2, 4), (2, 1, 4)]
    return build_triangulation(5, faces), x


@pytest.fixture
def tetra():
    return im.generate("tetrahedron")


@pytest.fixture
def bipyramid():
    return im.generate("bipyramid")


@pytest.fixture
def octa():
    return octahedron()


@pytest.fixture
def split_tetra():
    return split_face_tetrahedron()


@pytest.fixture
def tetra_imm(tetra):
    return im.validate_immersion(*tetra)


@pytest.fixture
def bipyramid_imm(bipyramid):
    return im.validate_immersion(*bipyramid)


@pytest.fixture
def tetra_dual(tetra):
    return dual_graph(tetra[0])
