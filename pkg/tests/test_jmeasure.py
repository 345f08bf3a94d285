import numpy as np
import pytest
from hypothesis import given, strategies as st

from relqc.core import (
    StateVector,
    apply_collective_unitary,
    bell_state,
    embed_operator,
    fidelity,
    haar_unitary,
    ket,
    random_density,
    random_state_vector,
)
from relqc.errors import ImpossibleBranchError, InvalidPairError
from relqc.jmeasure import (
    J0_KERNEL,
    J1_KERNEL,
    SINGLET,
    SWAP_KERNEL,
    JOutcome,
    j_outcome_probabilities,
    j_projectors,
    measure_j,
    postselect_j,
)

seeds = st.integers(0, 2**32 - 1)


def test_exactly_two_outcomes():
    assert [o.value for o in JOutcome] == [0, 1]


def test_projector_ranks_and_swap_form():
    pr = j_projectors((0, 1), 2)
    assert np.linalg.matrix_rank(pr.j0) == 1
    assert np.linalg.matrix_rank(pr.j1) == 3
    assert np.allclose(pr.j1, (np.eye(4) + SWAP_KERNEL) / 2, atol=1e-12)
    assert np.allclose(J1_KERNEL, (np.eye(4) + SWAP_KERNEL) / 2, atol=1e-12)


@pytest.mark.parametrize("pair,n", [((0, 1), 2), ((0, 2), 3), ((2, 1), 3), ((1, 3), 4)])
def test_projector_algebra(pair, n):
    pr = j_projectors(pair, n)
    d = 2**n
    assert np.allclose(pr.j0 @ pr.j0, pr.j0, atol=1e-10)
    assert np.allclose(pr.j1 @ pr.j1, pr.j1, atol=1e-10)
    assert np.allclose(pr.j0 @ pr.j1, 0, atol=1e-10)
    assert np.allclose(pr.j0 + pr.j1, np.eye(d), atol=1e-10)
    # the fast kernels are the same operators
    assert np.allclose(embed_operator(J0_KERNEL, list(pair), n), pr.j0, atol=1e-12)


def test_locality_commutes_with_spectator(rng):
    pr = j_projectors((0, 2), 3)
    u = embed_operator(haar_unitary(rng), [1], 3)
    assert np.allclose(pr.j0 @ u, u @ pr.j0, atol=1e-12)


def test_singlet_is_psi_minus_up_to_phase():
    assert np.isclose(fidelity(StateVector(SINGLET), bell_state("psi_minus")), 1)


@pytest.mark.parametrize("label,want", [("01", (0.5, 0.5)), ("00", (0.0, 1.0))])
def test_probability_examples(label, want):
    assert np.allclose(j_outcome_probabilities(ket(label), (0, 1)), want, atol=1e-12)


def test_singlet_probability():
    assert np.allclose(j_outcome_probabilities(bell_state("psi_minus"), (0, 1)), (1, 0), atol=1e-12)


def test_measure_examples(rng):
    for _ in range(5):
        o, post, rec = measure_j(bell_state("psi_minus"), (0, 1), rng)
        assert o is JOutcome.J0 and np.isclose(fidelity(post, bell_state("psi_minus")), 1)
    post, p = postselect_j(ket("01"), (0, 1), JOutcome.J1)
    assert np.isclose(p, 0.5) and np.isclose(fidelity(post, bell_state("psi_plus")), 1)
    post, p = postselect_j(ket("+-"), (0, 1), JOutcome.J1)
    assert np.isclose(fidelity(post, bell_state("phi_minus")), 1)


def test_postselect_examples():
    post, p = postselect_j(ket("00"), (0, 1), JOutcome.J1)
    assert np.isclose(p, 1) and np.isclose(fidelity(post, ket("00")), 1)
    post, p = postselect_j(ket("ij"), (0, 1), JOutcome.J1)
    assert np.isclose(p, 0.5, atol=1e-12) and np.isclose(fidelity(post, bell_state("phi_plus")), 1)
    with pytest.raises(ImpossibleBranchError):
        postselect_j(bell_state("psi_minus"), (0, 1), JOutcome.J1)


def test_zero_probability_branch_never_sampled():
    rng = np.random.default_rng(0)
    for _ in range(200):
        o, _, _ = measure_j(ket("00"), (0, 1), rng)
        assert o is JOutcome.J1


def test_invalid_pairs():
    with pytest.raises(InvalidPairError):
        j_outcome_probabilities(ket("00"), (0, 0))
    with pytest.raises(InvalidPairError):
        j_outcome_probabilities(ket("00"), (0, 2))
    with pytest.raises(InvalidPairError):
        j_projectors((1, 1), 2)


def test_record_contents(rng):
    o, post, rec = measure_j(ket("01"), (0, 1), rng, step_index=7)
    assert rec.step_index == 7 and rec.outcome is o and np.isclose(rec.probability, 0.5)
    assert tuple(rec.pair) == (0, 1)


@given(seeds, st.integers(2, 4), st.booleans())
def test_kernel_matches_full_matrix(seed, n, mixed):
    rng = np.random.default_rng(seed)
    i, j = rng.choice(n, 2, replace=False)
    s = random_density(n, rng) if mixed else random_state_vector(n, rng)
    pr = j_projectors((int(i), int(j)), n)
    rho = s.to_density().matrix
    p0 = np.real(np.trace(pr.j0 @ rho))
    got = j_outcome_probabilities(s, (int(i), int(j)))
    assert np.isclose(got[0], p0, atol=1e-12) and np.isclose(sum(got), 1, atol=1e-12)
    if p0 > 1e-9:
        post, p = postselect_j(s, (int(i), int(j)), JOutcome.J0)
        want = pr.j0 @ rho @ pr.j0 / p0
        assert np.isclose(p, p0, atol=1e-12)
        assert np.allclose(post.to_density().matrix, want, atol=1e-10)


@given(seeds, st.integers(2, 4))
def test_rotational_invariance(seed, n):
    rng = np.random.default_rng(seed)
    s = random_state_vector(n, rng)
    u = haar_unitary(rng)
    i, j = (int(x) for x in rng.choice(n, 2, replace=False))
    r = apply_collective_unitary(s, u)
    assert np.allclose(j_outcome_probabilities(s, (i, j)), j_outcome_probabilities(r, (i, j)), atol=1e-10)
    # measurement commutes with the collective rotation
    a, _ = postselect_j(s, (i, j), JOutcome.J1)
    b, _ = postselect_j(r, (i, j), JOutcome.J1)
    assert np.isclose(fidelity(apply_collective_unitary(a, u), b), 1, atol=1e-10)


def test_measure_frequencies(rng):
    hits = sum(measure_j(ket("01"), (0, 1), rng)[0] is JOutcome.J0 for _ in range(4000))
    assert abs(hits / 4000 - 0.5) < 4 * np.sqrt(0.25 / 4000)


def test_unnormalized_input_probabilities_are_relative():
    s = StateVector(2 * ket("01").amplitudes)
    assert np.allclose(j_outcome_probabilities(s, (0, 1)), (0.5, 0.5))
