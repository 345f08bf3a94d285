import numpy as np
import pytest
from hypothesis import given, strategies as st

from relqc.core import (
    ATOL,
    H,
    SINGLE_KETS,
    X,
    X_BASIS,
    Z,
    Z_BASIS,
    BlochVector,
    DensityMatrix,
    QubitPair,
    StateVector,
    apply_collective_unitary,
    apply_operator,
    apply_pauli_string,
    apply_single_qubit_unitary,
    bell_state,
    bloch_from_density,
    density_from_bloch,
    discard_qubits,
    embed_operator,
    fidelity,
    ghz_state,
    haar_unitary,
    ket,
    measure_single_qubit,
    partial_trace,
    random_density,
    random_state_vector,
    tensor,
)
from relqc.errors import InvalidArgumentError, InvalidBlochError, InvalidPairError, InvalidStateError

from conftest import bruteforce_partial_trace

bloch_vectors = st.tuples(*[st.floats(-1, 1)] * 3).filter(lambda v: np.linalg.norm(v) <= 1)


# ---- conventions

def test_little_endian_ket():
    # qubit 0 is the least significant bit of the amplitude index
    assert np.argmax(np.abs(ket("10").amplitudes)) == 1
    assert np.argmax(np.abs(ket("01").amplitudes)) == 2
    assert np.allclose(tensor([ket("0"), ket("1")]).amplitudes, ket("01").amplitudes)


def test_single_kets_are_normalized_and_paired():
    for k, v in SINGLE_KETS.items():
        assert np.isclose(np.linalg.norm(v), 1)
    assert abs(np.vdot(SINGLE_KETS["+"], SINGLE_KETS["-"])) < 1e-15
    assert abs(np.vdot(SINGLE_KETS["i"], SINGLE_KETS["j"])) < 1e-15


# ---- Bloch conversions

def test_density_from_bloch_poles_and_centre():
    assert np.allclose(density_from_bloch((0, 0, 1)).matrix, np.diag([1, 0]))
    assert np.allclose(density_from_bloch((0, 0, 0)).matrix, np.eye(2) / 2)


def test_density_from_bloch_eigenvalues():
    ev = np.linalg.eigvalsh(density_from_bloch((0.3, -0.4, 0.5)).matrix)
    r = np.sqrt(0.5)
    assert np.allclose(sorted(ev), [(1 - r) / 2, (1 + r) / 2], atol=1e-12)


def test_bloch_from_density_examples():
    assert bloch_from_density(DensityMatrix(np.eye(2) / 2)).length == 0
    plus = StateVector(SINGLE_KETS["+"]).to_density()
    assert np.allclose(bloch_from_density(plus).as_array(), [1, 0, 0])
    assert np.allclose(bloch_from_density(density_from_bloch((0.1, 0.2, 0.3))).as_array(), [0.1, 0.2, 0.3],
                       atol=1e-12)


@given(bloch_vectors)
def test_bloch_round_trip(v):
    b = bloch_from_density(density_from_bloch(v))
    assert np.allclose(b.as_array(), v, atol=1e-12)


def test_bloch_errors():
    with pytest.raises(InvalidBlochError):
        density_from_bloch((1, 1, 0))
    with pytest.raises(InvalidBlochError):
        BlochVector(0.8, 0.8, 0)
    with pytest.raises(InvalidStateError):
        bloch_from_density(DensityMatrix([[0.5, 1], [0, 0.5]]))
    with pytest.raises(InvalidStateError):
        bloch_from_density(DensityMatrix(np.eye(4) / 4))
    with pytest.raises(InvalidStateError):
        DensityMatrix(np.eye(3))


# ---- tensor and partial trace

def test_tensor_examples():
    assert np.allclose(tensor([ket("0"), ket("1")]).amplitudes, ket("01").amplitudes)
    mm = DensityMatrix(np.eye(2) / 2)
    assert np.allclose(tensor([mm, mm]).matrix, np.eye(4) / 4)
    # psi-(0,1) x phi+(2,3), expanded by hand in little-endian indices
    v = tensor([bell_state("psi_minus"), bell_state("phi_plus")]).amplitudes
    want = np.zeros(16)
    want[[2, 14]] = 0.5
    want[[1, 13]] = -0.5
    assert np.allclose(v, want)
    with pytest.raises(InvalidArgumentError):
        tensor([])


def test_partial_trace_examples():
    assert np.allclose(partial_trace(bell_state("psi_minus"), [0]).matrix, np.eye(2) / 2)
    s = random_state_vector(2, np.random.default_rng(0))
    assert np.allclose(partial_trace(s, [0, 1]).matrix, s.to_density().matrix)
    with pytest.raises(InvalidArgumentError):
        partial_trace(s, [2])
    with pytest.raises(InvalidArgumentError):
        partial_trace(s, [])


@given(st.integers(1, 4), st.data())
def test_partial_trace_matches_bruteforce(n, data):
    seed = data.draw(st.integers(0, 2**32 - 1))
    keep = data.draw(st.sets(st.integers(0, n - 1), min_size=1))
    s = random_state_vector(n, np.random.default_rng(seed))
    want = bruteforce_partial_trace(s.amplitudes, n, keep)
    assert np.allclose(partial_trace(s, keep).matrix, want, atol=1e-12)
    # density path agrees with the vector path
    assert np.allclose(partial_trace(s.to_density(), keep).matrix, want, atol=1e-12)


# ---- fidelity

def test_fidelity_examples():
    assert fidelity(ket("0"), ket("0")) == 1
    assert fidelity(ket("0"), ket("1")) == 0
    for theta in (0.3, 2.0, -1.1):
        assert np.isclose(fidelity(ket("0"), StateVector(np.exp(1j * theta) * ket("0").amplitudes)), 1)
    with pytest.raises(InvalidArgumentError):
        fidelity(ket("0"), ket("00"))


def test_fidelity_mixed_paths_agree(rng):
    a = random_state_vector(2, rng)
    b = random_state_vector(2, rng)
    f = fidelity(a, b)
    assert np.isclose(fidelity(a.to_density(), b), f)
    assert np.isclose(fidelity(a.to_density(), b.to_density()), f, atol=1e-9)


# ---- unitaries and operators

def test_single_qubit_unitary_examples(rng):
    s = random_state_vector(3, rng)
    assert np.allclose(apply_single_qubit_unitary(s, np.eye(2), 1).amplitudes, s.amplitudes)
    assert np.allclose(apply_single_qubit_unitary(ket("0"), X, 0).amplitudes, ket("1").amplitudes)
    u = haar_unitary(rng)
    rotated = apply_collective_unitary(bell_state("psi_minus"), u)
    assert np.isclose(fidelity(rotated, bell_state("psi_minus")), 1, atol=1e-12)
    with pytest.raises(InvalidArgumentError):
        apply_single_qubit_unitary(s, np.array([[1, 1], [0, 1]]), 0)


def test_apply_operator_matches_embedded_kron(rng):
    # X on qubit 2 of 3 qubits equals kron(X, I, I) in little-endian order
    full = embed_operator(X, [2], 3)
    assert np.allclose(full, np.kron(X, np.eye(4)))
    op2 = np.kron(Z, H)  # H on the first listed qubit, Z on the second
    full = embed_operator(op2, [0, 2], 3)
    assert np.allclose(full, np.kron(Z, np.kron(np.eye(2), H)))
    rho = random_density(3, rng)
    got = apply_operator(rho, op2, [0, 2]).matrix
    assert np.allclose(got, full @ rho.matrix @ full.conj().T)


def test_apply_pauli_string():
    assert np.allclose(apply_pauli_string(ket("00"), "XI").amplitudes, ket("10").amplitudes)
    with pytest.raises(InvalidArgumentError):
        apply_pauli_string(ket("00"), "X")


def test_bad_qubit_indices():
    with pytest.raises(InvalidArgumentError):
        apply_operator(ket("00"), X, [2])
    with pytest.raises(InvalidArgumentError):
        apply_operator(ket("00"), np.eye(4), [0, 0])


# ---- measurement

def test_measure_single_qubit_examples(rng):
    outs = [measure_single_qubit(ket("+"), 0, Z_BASIS, rng) for _ in range(5)]
    assert all(np.isclose(p, 0.5) for _, _, p in outs)
    k, post, p = measure_single_qubit(ket("0"), 0, Z_BASIS, rng)
    assert (k, p) == (0, 1.0)
    with pytest.raises(InvalidArgumentError):
        measure_single_qubit(ket("0"), 0, (SINGLE_KETS["0"], SINGLE_KETS["+"]), rng)


def test_measure_keeps_register_and_collapses(rng):
    s = random_state_vector(3, rng)
    k, post, p = measure_single_qubit(s, 1, X_BASIS, rng)
    assert post.n_qubits == 3 and post.is_valid()
    proj = np.outer(X_BASIS[k], X_BASIS[k].conj())
    ref = apply_operator(s, proj, [1])
    assert np.isclose(p, ref.norm() ** 2)
    assert np.isclose(fidelity(post, ref.normalized()), 1)


def test_measure_density_matches_vector(rng):
    s = random_state_vector(2, rng)
    out_v = measure_single_qubit(s, 0, Z_BASIS, np.random.default_rng(4))
    out_d = measure_single_qubit(s.to_density(), 0, Z_BASIS, np.random.default_rng(4))
    assert out_v[0] == out_d[0] and np.isclose(out_v[2], out_d[2])
    assert np.isclose(fidelity(out_v[1], out_d[1]), 1)


def test_discard_qubits(rng):
    p, rest = discard_qubits(ket("0+1"), [1], [SINGLE_KETS["+"]])
    assert np.isclose(p, 1) and np.allclose(rest.amplitudes, ket("01").amplitudes)
    p, rest = discard_qubits(ghz_state(3), [0], [SINGLE_KETS["0"]])
    assert np.isclose(p, 0.5) and np.allclose(rest.amplitudes, ket("00").amplitudes)


def test_qubit_pair_validation():
    with pytest.raises(InvalidPairError):
        QubitPair(1, 1)
    with pytest.raises(InvalidPairError):
        QubitPair(0, 3).check(2)
    assert isinstance(InvalidPairError("x"), ValueError)


def test_state_validation():
    with pytest.raises(InvalidStateError):
        StateVector(np.ones(3))
    with pytest.raises(InvalidStateError):
        StateVector(np.zeros(2), normalize=True)
    assert not StateVector([1, 1]).is_valid()
    assert random_density(2, np.random.default_rng(1)).is_valid()
    assert ATOL == 1e-10
