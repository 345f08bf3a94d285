"""Spin flipping and arbitrary pure-state preparation from three mixed supplies."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ..core import (
    BlochVector,
    DensityMatrix,
    QubitPair,
    StateVector,
    bell_state,
    bloch_from_density,
    density_from_bloch,
    partial_trace,
    tensor,
)
from ..errors import DegenerateSuppliesError, InsufficientSupplyError, InvalidArgumentError
from ..jmeasure import JOutcome, postselect_j
from .purification import PurifyResult, SupplySpec, purification_schedule, purify

DET_TOL = 1e-9
FLIP_SUCCESS = 0.75


def spin_flip_branch(rho: DensityMatrix) -> tuple[float, DensityMatrix]:
    """Exact triplet branch of the flip: probability and the free singlet half.

    Qubit 0 is the input, qubits 1-2 hold a singlet; J is measured on (0, 1).
    """
    if rho.n_qubits != 1:
        raise InvalidArgumentError("spin_flip expects a single-qubit state")
    joint = tensor([rho, bell_state("psi_minus")])
    post, p = postselect_j(joint, QubitPair(0, 1), JOutcome.J1)
    return p, partial_trace(post, [2])


def spin_flip(rho: DensityMatrix, rng) -> DensityMatrix | None:
    """Sampled flip: Bloch vector r -> -r/3 on success, ``None`` on the singlet outcome."""
    p1, flipped = spin_flip_branch(rho)
    return flipped if rng.random() < p1 else None


def flipped_bloch(b: BlochVector) -> BlochVector:
    return BlochVector.from_array(-b.as_array() / 3)


def six_vertices(supplies) -> list[BlochVector]:
    """The three supply vectors followed by their flipped images."""
    vs = [s.bloch if isinstance(s, SupplySpec) else BlochVector.from_array(s) for s in supplies]
    if len(vs) != 3:
        raise InvalidArgumentError("exactly three supplies are required")
    det = np.linalg.det(np.array([v.as_array() for v in vs]))
    if abs(det) <= DET_TOL:
        raise DegenerateSuppliesError(f"supply Bloch vectors are linearly dependent (det={det:.3g})")
    return vs + [flipped_bloch(v) for v in vs]


def hull_facets(points, tol: float = 1e-12) -> list[tuple[np.ndarray, float, tuple[int, ...]]]:
    """Supporting planes of the convex hull of a small 3-D point set.

    Every triple of points spanning a plane that has all points on one side is
    a facet plane.  Returns ``(unit_normal, offset, vertex_indices)`` with the
    hull on the side ``normal . x <= offset``; coplanar triples are merged.
    """
    pts = np.array([p.as_array() if isinstance(p, BlochVector) else p for p in points], dtype=float)
    facets: dict[tuple, tuple[np.ndarray, float, set]] = {}
    for a, b, c in itertools.combinations(range(len(pts)), 3):
        nrm = np.cross(pts[b] - pts[a], pts[c] - pts[a])
        ln = np.linalg.norm(nrm)
        if ln < tol:
            continue
        nrm = nrm / ln
        off = float(nrm @ pts[a])
        side = pts @ nrm - off
        if np.all(side <= tol):
            pass
        elif np.all(side >= -tol):
            nrm, off, side = -nrm, -off, -side
        else:
            continue
        key = tuple(np.round(np.append(nrm, off), 9))
        on = {i for i in range(len(pts)) if abs(side[i]) <= 1e-9}
        if key in facets:
            facets[key][2].update(on)
        else:
            facets[key] = (nrm, off, on)
    return [(n, o, tuple(sorted(v))) for n, o, v in facets.values()]


def inscribed_radius(points) -> float:
    """Radius of the largest origin-centred ball inside the hull (0 if origin outside)."""
    offs = [o for _, o, _ in hull_facets(points)]
    return max(0.0, min(offs))


def mixture_weights(vertices, target, tol: float = 1e-12) -> tuple[tuple[int, ...], np.ndarray]:
    """Convex weights over four vertices reproducing ``target``.

    Tries every tetrahedron of vertices, keeps those containing the point and
    picks the one with the largest minimum weight (first in lexicographic
    vertex order among ties).
    """
    pts = np.array([v.as_array() if isinstance(v, BlochVector) else v for v in vertices], dtype=float)
    t = np.append(np.asarray(target, dtype=float), 1.0)
    best = None
    for combo in itertools.combinations(range(len(pts)), 4):
        m = np.vstack([pts[list(combo)].T, np.ones(4)])
        if abs(np.linalg.det(m)) < 1e-12:
            continue
        w = np.linalg.solve(m, t)
        if w.min() < -tol:
            continue
        if best is None or w.min() > best[1].min() + 1e-15:
            best = (combo, w)
    if best is None:
        raise InvalidArgumentError("target lies outside the hull of the vertices")
    combo, w = best
    w = np.clip(w, 0, None)
    return combo, w / w.sum()


@dataclass
class PreparationResult:
    state: DensityMatrix
    target: StateVector
    mixed_bloch: BlochVector
    vertices_used: tuple[int, ...]
    weights: np.ndarray
    purification: PurifyResult
    supply_usage: list[int] = field(default_factory=list)
    singlets_used: int = 0

    @property
    def bloch(self) -> BlochVector:
        return bloch_from_density(self.state)


def _aligned_vertex(vertices: list[BlochVector], u: np.ndarray) -> int | None:
    best = None
    for k, v in enumerate(vertices):
        if v.length > 0 and np.allclose(v.direction(), u, atol=1e-12, rtol=0):
            if best is None or v.length > vertices[best].length:
                best = k
    return best


def prepare_pure(target: StateVector, supplies, epsilon: float, rng, copies: int | None = None) -> PreparationResult:
    """Prepare ``target`` with fidelity >= 1 - epsilon from three mixed supplies.

    The six vertices (supplies and their flips) are mixed into a state with
    Bloch vector ``s * u`` where ``u`` is the target direction and ``s`` the
    inscribed radius of their hull (or a single vertex already pointing along
    ``u``), and that mixture is purified to Bloch length >= 1 - epsilon.
    Fidelity with a pure target equals (1 + r)/2, so the output fidelity is
    at least 1 - epsilon/2.
    """
    supplies = list(supplies)
    vertices = six_vertices(supplies)
    if not isinstance(target, StateVector) or target.n_qubits != 1:
        raise InvalidArgumentError("target must be a single-qubit pure state")
    u = bloch_from_density(target.normalized()).direction()

    k = _aligned_vertex(vertices, u)
    if k is not None:
        combo, w = (k,), np.array([1.0])
        point = vertices[k].as_array()
    else:
        s = inscribed_radius(vertices)
        point = s * u
        combo, w = mixture_weights(vertices, point)
    mixed = BlochVector.from_array(point)

    schedule = purification_schedule(mixed.length, epsilon) if mixed.length < 1 else None
    if copies is None:
        copies = 8 * (schedule.demand_estimate if schedule else 1)

    # draw which vertex each copy comes from; flipped vertices cost extra attempts
    usage = [0, 0, 0]
    singlets = 0
    picks = rng.multinomial(copies, w)
    for idx, m in zip(combo, picks):
        m = int(m)
        if m == 0:
            continue
        if idx < 3:
            usage[idx] += m
        else:
            attempts = m + int(rng.negative_binomial(m, FLIP_SUCCESS))
            usage[idx - 3] += attempts
            singlets += attempts
    for i, (used, sup) in enumerate(zip(usage, supplies)):
        avail = sup.count_available if isinstance(sup, SupplySpec) else math.inf
        if used > avail:
            raise InsufficientSupplyError(
                f"supply {i} needs {used} qubits but has {avail}",
                {"usage": usage, "copies": copies},
            )

    pur = purify(SupplySpec(mixed, copies), epsilon, rng)
    return PreparationResult(
        state=pur.state,
        target=target,
        mixed_bloch=mixed,
        vertices_used=tuple(combo),
        weights=w,
        purification=pur,
        supply_usage=usage,
        singlets_used=singlets,
    )


def mixed_state_from_vertices(vertices, combo, weights) -> DensityMatrix:
    """Density matrix of the probabilistic mixture (used to cross-check weights)."""
    m = sum(wt * density_from_bloch(vertices[i]).matrix for i, wt in zip(combo, weights))
    return DensityMatrix(m)


__all__ = [
    "FLIP_SUCCESS",
    "PreparationResult",
    "flipped_bloch",
    "hull_facets",
    "inscribed_radius",
    "mixed_state_from_vertices",
    "mixture_weights",
    "prepare_pure",
    "six_vertices",
    "spin_flip",
    "spin_flip_branch",
]
