"""End-to-end verification of the vanishing of the loop polynomial.

:func:`run` chains every stage (validation, angles, weights, planar
decomposition, Kac-Ward matrix, connection, spinors, eigenvector) and
:class:`VerificationReport` records the numbers together with pass flags
that can be recomputed from them.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from . import kac_ward, su2
from .immersion import EdgeAngles, Immersion, edge_angles, validate_immersion
from .oracle import MAX_CYCLE_DIM, cycle_dimension, partition_function
from .surface_graph import DaggerGraph, Triangulation, face_loops
from .unfolding import PlanarDecomposition, TurningData, build_decomposition, turning_data
from .weights import WeightSystem, direct_weights, split_weights

#: cycle dimension up to which the oracle runs unless asked otherwise
AUTO_ORACLE_DIM = 16
BASIS_SPINORS = ((1.0, 0.0), (0.0, 1.0))


@dataclass(frozen=True)
class Tolerances:
    zero: float = 1e-9
    holonomy: float = 1e-8
    residual: float = 1e-8
    oracle: float = 1e-9
    #: two smallest singular values relative to the largest
    kernel: float = 1e-8
    #: third smallest singular value relative to the largest
    gap: float = 1e-4
    angle: float = 1e-10
    invariance: float = 1e-9


@dataclass
class Artifacts:
    """Intermediate objects of one pipeline run."""

    immersion: Immersion
    angles: EdgeAngles
    decomposition: PlanarDecomposition
    dagger: DaggerGraph
    weights: WeightSystem
    turning: TurningData
    matrix: kac_ward.KacWardMatrix
    connection: su2.Connection
    eigenvectors: list = field(default_factory=list)


def face_block_residuals(m: kac_ward.KacWardMatrix, dagger: DaggerGraph, td: TurningData):
    """Spectral and eigenvector errors of the face blocks.

    Returns ``(spectrum_error, eigenvector_error)``: the largest distance of
    a face-block spectrum from ``{-1, 0, 1}`` and the largest residual of
    ``B v = v`` for ``v = rho`` and ``B v = -v`` for ``v = rho exp(-i beta)``.
    """
    bl = kac_ward.blocks(m)
    nf = dagger.n_faces
    g = dagger.graph
    spec_err = vec_err = 0.0
    for u in range(nf):
        B = bl[u]
        ev = np.sort(np.linalg.eigvals(B).real)
        spec_err = max(spec_err, float(np.abs(ev - [-1.0, 0.0, 1.0]).max()),
                       float(np.abs(np.linalg.eigvals(B).imag).max()))
        ds = [c - nf for c, _ in g.adjacency[u]]
        plus = td.rho[ds]
        minus = td.rho[ds] * np.exp(-1j * td.beta[ds])
        vec_err = max(vec_err, float(np.abs(B @ plus - plus).max()),
                      float(np.abs(B @ minus + minus).max()))
    return spec_err, vec_err


@dataclass
class VerificationReport:
    """Numbers and pass flags of one run.

    ``flags`` can always be rebuilt from the stored numbers with
    :meth:`recompute_flags`.
    """

    vertices: int
    edges: int
    faces: int
    dual_edges: int
    dagger_vertices: int
    bends: int
    theta_range: tuple[float, float]
    phi_range: tuple[float, float]
    z_det: complex
    zero_score: float
    kernel_sigmas: list[float]
    sigma_max: float
    holonomy_max_dev: float
    eigenvector_residual: float
    eigenvector_rank: int
    angle_residual: float
    face_block_spectrum: float
    face_block_vectors: float
    split_invariance: float
    z_oracle: complex | None
    cycle_dim: int
    seed: int
    layout_scale: float
    tolerances: Tolerances = field(default_factory=Tolerances)
    flags: dict = field(default_factory=dict)

    def recompute_flags(self) -> dict:
        tol = self.tolerances
        s = self.kernel_sigmas
        smax = self.sigma_max
        flags = {
            "zero": self.zero_score <= tol.zero,
            "holonomy": self.holonomy_max_dev <= tol.holonomy,
            "eigenvector": self.eigenvector_residual <= tol.residual and self.eigenvector_rank == 2,
            "kernel": (len(s) >= 3 and s[0] <= tol.kernel * smax and s[1] <= tol.kernel * smax
                       and s[2] >= tol.gap * smax),
            "angle_identity": self.angle_residual <= tol.angle,
            "face_blocks": self.face_block_spectrum <= tol.angle and self.face_block_vectors <= tol.angle,
            "split_invariance": self.split_invariance <= tol.invariance,
        }
        if self.z_oracle is not None:
            zo = self.z_oracle
            flags["oracle"] = (abs(zo) <= tol.oracle
                               and abs(self.z_det - zo * zo) <= tol.oracle * max(1.0, abs(zo) ** 2))
        return flags

    @property
    def passed(self) -> bool:
        return all(self.flags.values())

    def to_dict(self) -> dict:
        def c(z):
            return None if z is None else [z.real, z.imag]

        d = dataclasses.asdict(self)
        d["z_det"] = c(self.z_det)
        d["z_oracle"] = c(self.z_oracle)
        d["passed"] = self.passed
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationReport":
        d = dict(d)
        d.pop("passed", None)
        d["z_det"] = complex(*d["z_det"])
        d["z_oracle"] = None if d["z_oracle"] is None else complex(*d["z_oracle"])
        d["tolerances"] = Tolerances(**d["tolerances"])
        d["theta_range"] = tuple(d["theta_range"])
        d["phi_range"] = tuple(d["phi_range"])
        return cls(**d)


def build(t: Triangulation, coords, *, routing: str = "auto", layout=None) -> Artifacts:
    """Run every construction step without judging the results."""
    imm = validate_immersion(t, coords)
    angles = edge_angles(imm)
    pd = build_decomposition(imm, layout=layout, routing=routing)
    dg = pd.dagger()
    ws = direct_weights(split_weights(angles, dg), angles)
    td = turning_data(pd)
    m = kac_ward.transition_matrix(dg.graph, pd.positions, ws.y_directed)
    conn = su2.build_connection(td, angles, imm.dual)
    return Artifacts(imm, angles, pd, dg, ws, td, m, conn)


def run(t: Triangulation, coords, tol: Tolerances = Tolerances(), seed: int = 0,
        oracle: bool | None = None, routing: str = "auto"):
    """Build everything, check every claim and return ``(report, artifacts)``.

    Parameters
    ----------
    oracle : bool, optional
        Force (True) or skip (False) the brute-force cross-check; by default
        it runs when the cycle dimension is at most ``AUTO_ORACLE_DIM``.
    seed : int
        Seeds the random re-split of the directed weights.
    """
    art = build(t, coords, routing=routing)
    imm, m, dg = art.immersion, art.matrix, art.dagger

    det = kac_ward.kw_determinant(m)
    zs = kac_ward.zero_score(m, det)
    sv = kac_ward.singular_values(m)

    hol = su2.flatness_check(art.connection, face_loops(imm.dual))
    residual = 0.0
    vecs = []
    for xi0 in BASIS_SPINORS:
        sf = su2.propagate_spinors(art.connection, xi0, tol=math.inf)
        phi = su2.assemble_eigenvector(sf, art.decomposition, art.turning, dg, art.angles)
        residual = max(residual, su2.eigen_residual(m.matrix, phi))
        vecs.append(phi)
    art.eigenvectors = vecs
    rank = int(np.linalg.matrix_rank(np.column_stack(vecs), tol=1e-8 * max(np.abs(vecs).max(), 1.0)))

    spec_err, vec_err = face_block_residuals(m, dg, art.turning)

    rng = np.random.default_rng(seed)
    y2 = kac_ward.resplit(rng, art.weights.y_directed)
    det2 = kac_ward.kw_determinant(kac_ward.transition_matrix(dg.graph, m.positions, y2))
    split = abs(det2 - det) / max(1.0, abs(det))

    dim = cycle_dimension(imm.dual.graph)
    use_oracle = dim <= AUTO_ORACLE_DIM if oracle is None else oracle
    zo = None
    if use_oracle:
        zo = partition_function(imm.dual.graph, art.weights.y_star, max_dim=MAX_CYCLE_DIM)

    a = art.angles
    phis = np.concatenate([a.phi_u, a.phi_up])
    report = VerificationReport(
        vertices=t.vertex_count, edges=len(t.edges), faces=t.n_faces,
        dual_edges=len(imm.dual.edges), dagger_vertices=dg.graph.n,
        bends=art.decomposition.n_bends,
        theta_range=(float(a.theta.min()), float(a.theta.max())),
        phi_range=(float(phis.min()), float(phis.max())),
        z_det=complex(det), zero_score=zs,
        kernel_sigmas=[float(x) for x in sv[:3]], sigma_max=float(sv[-1]),
        holonomy_max_dev=hol, eigenvector_residual=residual, eigenvector_rank=rank,
        angle_residual=float(art.turning.angle_residual().max()),
        face_block_spectrum=spec_err, face_block_vectors=vec_err,
        split_invariance=float(split), z_oracle=zo, cycle_dim=dim, seed=seed,
        layout_scale=float(art.decomposition.scale), tolerances=tol,
    )
    report.flags = report.recompute_flags()
    return report, art
