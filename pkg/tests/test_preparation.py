import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.spatial import ConvexHull

from relqc.core import BlochVector, StateVector, bloch_from_density, density_from_bloch, fidelity, ket
from relqc.errors import DegenerateSuppliesError, InsufficientSupplyError
from relqc.protocols.preparation import (
    FLIP_SUCCESS,
    flipped_bloch,
    hull_facets,
    inscribed_radius,
    mixed_state_from_vertices,
    mixture_weights,
    prepare_pure,
    six_vertices,
    spin_flip,
    spin_flip_branch,
)
from relqc.protocols.purification import SupplySpec

AXES = [SupplySpec(BlochVector(0.9, 0, 0), 10**7), SupplySpec(BlochVector(0, 0.9, 0), 10**7),
        SupplySpec(BlochVector(0, 0, 0.9), 10**7)]


@pytest.mark.parametrize("r,want", [((0, 0, 1), (0, 0, -1 / 3)), ((0, 0, 0), (0, 0, 0)), ((0.6, 0, 0), (-0.2, 0, 0))])
def test_spin_flip_examples(r, want):
    p, out = spin_flip_branch(density_from_bloch(r))
    assert math.isclose(p, 0.75, abs_tol=1e-12)
    assert np.allclose(bloch_from_density(out).as_array(), want, atol=1e-12)


@given(st.integers(0, 2**32 - 1))
def test_spin_flip_linear_map(seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=3)
    v *= rng.uniform(0, 1) / np.linalg.norm(v)
    p, out = spin_flip_branch(density_from_bloch(v))
    assert math.isclose(p, FLIP_SUCCESS, abs_tol=1e-12)
    assert np.allclose(bloch_from_density(out).as_array(), -v / 3, atol=1e-12)


def test_spin_flip_sampling(rng):
    rho = density_from_bloch((0, 0.5, 0))
    ok = sum(spin_flip(rho, rng) is not None for _ in range(4000))
    assert abs(ok / 4000 - 0.75) < 4 * math.sqrt(0.75 * 0.25 / 4000)


def test_six_vertices_axes():
    vs = six_vertices(AXES)
    lengths = sorted(v.length for v in vs)
    assert np.allclose(lengths, [0.3] * 3 + [0.9] * 3)
    assert np.allclose(vs[3].as_array(), [-0.3, 0, 0])
    assert flipped_bloch(BlochVector(0, 0, 0.9)) == BlochVector.from_array([0, 0, -0.3])


def test_coplanar_supplies_rejected():
    with pytest.raises(DegenerateSuppliesError):
        six_vertices([SupplySpec(BlochVector(0.5, 0, 0), 1), SupplySpec(BlochVector(0, 0.5, 0), 1),
                      SupplySpec(BlochVector(0.3, 0.3, 0), 1)])


def _scipy_radius(points):
    hull = ConvexHull(np.array([p.as_array() for p in points]))
    return float(np.min(-hull.equations[:, 3]))


def test_inscribed_radius_axes_against_scipy():
    vs = six_vertices(AXES)
    # octahedron-like hull with vertices 0.9 e_i and -0.3 e_i: facet distances
    # are 1/sqrt(sum 1/v_i^2) over sign choices; the smallest is all -0.3
    assert math.isclose(inscribed_radius(vs), 0.3 / math.sqrt(3), abs_tol=1e-12)
    assert math.isclose(inscribed_radius(vs), _scipy_radius(vs), abs_tol=1e-12)


@given(st.integers(0, 2**32 - 1))
def test_hull_matches_scipy(seed):
    rng = np.random.default_rng(seed)
    sup = []
    for _ in range(3):
        v = rng.normal(size=3)
        sup.append(SupplySpec(BlochVector.from_array(v / np.linalg.norm(v) * rng.uniform(0.3, 1)), 1))
    try:
        vs = six_vertices(sup)
    except DegenerateSuppliesError:
        return
    pts = np.array([v.as_array() for v in vs])
    hull = ConvexHull(pts)
    got = hull_facets(vs)
    # same set of supporting planes
    ours = sorted(tuple(np.round(np.append(n, o), 6)) for n, o, _ in got)
    theirs = sorted({tuple(np.round(np.append(e[:3], -e[3]), 6)) for e in hull.equations})
    assert ours == theirs
    assert math.isclose(inscribed_radius(vs), max(0.0, _scipy_radius(vs)), abs_tol=1e-9)


@given(st.integers(0, 2**32 - 1))
def test_mixture_weights_reproduce_point(seed):
    rng = np.random.default_rng(seed)
    vs = six_vertices(AXES)
    u = rng.normal(size=3)
    u /= np.linalg.norm(u)
    point = inscribed_radius(vs) * u
    combo, w = mixture_weights(vs, point)
    assert len(combo) == 4 and np.all(w >= 0) and math.isclose(w.sum(), 1)
    got = bloch_from_density(mixed_state_from_vertices(vs, combo, w)).as_array()
    assert np.allclose(got, point, atol=1e-10)


def test_prepare_pure_z(rng):
    res = prepare_pure(ket("0"), AXES, 0.1, rng)
    b = res.bloch
    assert b.length >= 0.9 - 1e-12 and np.allclose(b.direction(), [0, 0, 1])
    assert res.vertices_used == (2,)  # the z supply already points along the target


def test_prepare_pure_minus_z_uses_flips(rng):
    res = prepare_pure(ket("1"), AXES, 0.1, rng)
    assert np.allclose(res.bloch.direction(), [0, 0, -1], atol=1e-10)
    assert fidelity(res.state, ket("1")) >= 1 - 0.1
    assert res.vertices_used == (5,) and res.singlets_used > 0


def test_prepare_pure_generic_direction(rng):
    target = StateVector([np.cos(0.4), np.exp(0.7j) * np.sin(0.4)])
    res = prepare_pure(target, AXES, 0.05, rng)
    assert fidelity(res.state, target) >= 1 - 0.05
    assert any(i >= 3 for i in res.vertices_used) or len(res.vertices_used) == 4


def test_prepare_pure_insufficient(rng):
    small = [SupplySpec(s.bloch, 5) for s in AXES]
    target = StateVector([np.cos(0.4), np.sin(0.4)])
    with pytest.raises(InsufficientSupplyError):
        prepare_pure(target, small, 0.01, rng)
