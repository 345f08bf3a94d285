import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from relqc.core import (
    SINGLE_KETS,
    StateVector,
    discard_qubits,
    fidelity,
    ket,
    random_state_vector,
)
from relqc.cluster.fusion import SEED_PAIRS, seed_input_state
from relqc.errors import InvalidArgumentError
from relqc.jmeasure import JOutcome, postselect_j
from relqc.protocols.programmable import (
    PHI,
    PHI_PERP,
    error_probability,
    hamming_one_superposition,
    program_schedule,
    programmable_measurement,
    programmable_measurement_exact,
)


def test_schedule_examples():
    assert program_schedule(1) == [[(1, 2)]]
    assert program_schedule(2) == [[(1, 2)], [(1, 3), (2, 4)]]
    assert program_schedule(3)[-1] == [(1, 5), (2, 6), (3, 7), (4, 8)]
    with pytest.raises(InvalidArgumentError):
        program_schedule(0)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_exact_error_probability(n):
    assert math.isclose(error_probability(n), 2.0**-n, abs_tol=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_phi_never_errs(n):
    phi = StateVector([np.cos(0.3), np.exp(0.2j) * np.sin(0.3)])
    res = programmable_measurement_exact(phi, 0, phi, n)
    assert res.p_phi_perp < 1e-12


@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_error_is_basis_independent(seed, n):
    rng = np.random.default_rng(seed)
    phi = random_state_vector(1, rng).amplitudes
    perp = np.array([-np.conj(phi[1]), np.conj(phi[0])])
    res = programmable_measurement_exact(StateVector(perp), 0, phi, n)
    assert math.isclose(res.p_phi, 2.0**-n, abs_tol=1e-12)


def test_error_trajectory_is_hamming_one():
    n = 3
    res = programmable_measurement_exact(ket("1"), 0, ket("0"), n)
    for r, state in enumerate(res.trajectory):
        k = 2 ** (r + 1)
        rest = 2**n - k
        want = hamming_one_superposition(k)
        if rest:
            want = np.kron(ket("0" * rest).amplitudes, want)
        assert math.isclose(fidelity(state, StateVector(want)), 1, abs_tol=1e-10)


def test_hamming_one():
    v = hamming_one_superposition(3)
    assert np.isclose(np.linalg.norm(v), 1)
    assert set(np.flatnonzero(v)) == {1, 2, 4}


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_remote_collapse_fidelity(n):
    rng = np.random.default_rng(n)
    phi = random_state_vector(1, rng).amplitudes
    perp = np.array([-np.conj(phi[1]), np.conj(phi[0])])
    a, b = random_state_vector(1, rng).amplitudes, random_state_vector(1, rng).amplitudes
    psi = StateVector((np.kron(a, phi) + np.kron(b, perp)) / np.sqrt(2))
    res = programmable_measurement_exact(psi, 0, phi, n, keep=[1])
    assert fidelity(res.rho_phi, StateVector(a)) >= 1 - 2.0**-n
    assert math.isclose(res.p_phi + res.p_phi_perp, 1, abs_tol=1e-12)
    # a singlet outcome can only come from the phi_perp component
    assert fidelity(res.rho_phi_perp, StateVector(b)) > 1 - 1e-10


def test_sampled_frequencies(rng):
    n, trials = 2, 1500
    wrong = sum(programmable_measurement(ket("1"), 0, ket("0"), n, rng).declared == PHI for _ in range(trials))
    assert abs(wrong / trials - 0.25) < 4 * math.sqrt(0.25 * 0.75 / trials)
    assert all(programmable_measurement(ket("0"), 0, ket("0"), n, rng).declared == PHI for _ in range(50))


def test_sampled_result_fields(rng):
    res = programmable_measurement(ket("+"), 0, ket("0"), 2, rng)
    assert res.declared in (PHI, PHI_PERP)
    assert res.state.n_qubits == 4 and res.records[0].step_index == 0
    assert [rec.step_index for rec in res.records] == list(range(len(res.records)))


def test_programmable_replaces_ideal_x_readout_on_seed():
    # double-triplet seed branch; read qubit 3 in X by tournament instead of ideally
    state = seed_input_state()
    for pair in SEED_PAIRS:
        state, _ = postselect_j(state, pair, JOutcome.J1)
    n = 2
    res = programmable_measurement_exact(state, 3, SINGLE_KETS["+"], n, keep=[0, 1, 2])
    _, ideal = discard_qubits(state, [3], [SINGLE_KETS["+"]])
    assert fidelity(res.rho_phi, ideal) >= 1 - 2.0**-n
    assert math.isclose(res.p_phi, 0.5 + 0.5 * 2.0**-n, abs_tol=1e-12)


def test_bad_inputs():
    with pytest.raises(InvalidArgumentError):
        programmable_measurement_exact(ket("0"), 1, ket("0"), 1)
    with pytest.raises(InvalidArgumentError):
        programmable_measurement_exact(ket("0"), 0, ket("00"), 1)
    with pytest.raises(InvalidArgumentError):
        programmable_measurement(ket("0").to_density(), 0, ket("0"), 1, np.random.default_rng(0))
