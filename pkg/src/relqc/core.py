"""Dense pure and mixed states of small qubit registers.

Ordering convention (used everywhere in the package): qubit ``q`` is bit
``q`` of the amplitude index, i.e. little-endian.  Ket strings are read in
qubit order, so ``ket("01")`` is qubit 0 in |0> and qubit 1 in |1>, which is
amplitude index 2.  ``tensor([a, b])`` puts ``a`` on the low qubits.

Operators acting on a list of qubits ``[q0, q1, ...]`` use the same
convention locally: ``q0`` is the least significant bit of the operator's
row/column index.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidArgumentError, InvalidBlochError, InvalidStateError

ATOL = 1e-10
ROUNDTRIP_ATOL = 1e-12

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PAULIS = {"I": I2, "X": X, "Y": Y, "Z": Z}

_S = 1 / np.sqrt(2)
SINGLE_KETS = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([_S, _S], dtype=complex),
    "-": np.array([_S, -_S], dtype=complex),
    # (|0> + i|1>)/sqrt2 and (|0> - i|1>)/sqrt2
    "i": np.array([_S, 1j * _S], dtype=complex),
    "j": np.array([_S, -1j * _S], dtype=complex),
}

Z_BASIS = (SINGLE_KETS["0"], SINGLE_KETS["1"])
X_BASIS = (SINGLE_KETS["+"], SINGLE_KETS["-"])


def _n_from_dim(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or 2**n != dim:
        raise InvalidStateError(f"dimension {dim} is not a power of two")
    return n


class StateVector:
    """Pure state of ``n_qubits`` qubits as a length ``2**n`` complex array."""

    __slots__ = ("amplitudes", "n_qubits")

    def __init__(self, amplitudes, *, normalize: bool = False):
        amps = np.array(amplitudes, dtype=complex).reshape(-1)
        if not np.all(np.isfinite(amps)):
            raise InvalidStateError("amplitudes must be finite")
        self.n_qubits = _n_from_dim(amps.size)
        if normalize:
            nrm = np.linalg.norm(amps)
            if nrm == 0:
                raise InvalidStateError("cannot normalize the zero vector")
            amps = amps / nrm
        self.amplitudes = amps

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        return StateVector(self.amplitudes, normalize=True)

    def to_density(self) -> "DensityMatrix":
        a = self.amplitudes
        return DensityMatrix(np.outer(a, a.conj()))

    def is_valid(self, atol: float = ATOL) -> bool:
        return abs(self.norm() - 1.0) <= atol

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy())

    def __repr__(self) -> str:
        return f"StateVector(n_qubits={self.n_qubits})"


class DensityMatrix:
    """Mixed state of ``n_qubits`` qubits as a ``2**n x 2**n`` matrix."""

    __slots__ = ("matrix", "n_qubits")

    def __init__(self, matrix):
        m = np.array(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidStateError(f"density matrix must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise InvalidStateError("entries must be finite")
        self.n_qubits = _n_from_dim(m.shape[0])
        self.matrix = m

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def normalized(self) -> "DensityMatrix":
        t = np.trace(self.matrix)
        if abs(t) == 0:
            raise InvalidStateError("cannot normalize a zero-trace operator")
        return DensityMatrix(self.matrix / t)

    def to_density(self) -> "DensityMatrix":
        return self

    def is_valid(self, atol: float = ATOL) -> bool:
        m = self.matrix
        if np.max(np.abs(m - m.conj().T), initial=0.0) > atol:
            return False
        if abs(np.trace(m) - 1.0) > atol:
            return False
        return bool(np.min(np.linalg.eigvalsh((m + m.conj().T) / 2)) >= -atol)

    def copy(self) -> "DensityMatrix":
        return DensityMatrix(self.matrix.copy())

    def __repr__(self) -> str:
        return f"DensityMatrix(n_qubits={self.n_qubits})"


State = StateVector | DensityMatrix


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(np.isfinite((self.x, self.y, self.z))):
            raise InvalidBlochError("Bloch components must be finite")
        if self.length > 1 + ATOL:
            raise InvalidBlochError(f"|r| = {self.length:.12g} exceeds 1")

    @classmethod
    def from_array(cls, v) -> "BlochVector":
        x, y, z = (float(c) for c in np.asarray(v, dtype=float).reshape(3))
        return cls(x, y, z)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @property
    def length(self) -> float:
        return float(np.sqrt(self.x**2 + self.y**2 + self.z**2))

    def direction(self) -> np.ndarray:
        r = self.length
        if r == 0:
            raise InvalidBlochError("zero vector has no direction")
        return self.as_array() / r

    def __iter__(self):
        return iter((self.x, self.y, self.z))


@dataclass(frozen=True)
class QubitPair:
    i: int
    j: int

    def __post_init__(self):
        from .errors import InvalidPairError

        if self.i == self.j:
            raise InvalidPairError(f"pair indices must differ, got ({self.i}, {self.j})")
        if self.i < 0 or self.j < 0:
            raise InvalidPairError("qubit indices must be non-negative")

    def check(self, n_qubits: int) -> None:
        from .errors import InvalidPairError

        if max(self.i, self.j) >= n_qubits:
            raise InvalidPairError(f"pair ({self.i}, {self.j}) out of range for {n_qubits} qubits")

    def __iter__(self):
        return iter((self.i, self.j))


# ---------------------------------------------------------------- constructors


def ket(label: str) -> StateVector:
    """Product state from a string of ``0 1 + - i j`` read in qubit order."""
    if not label:
        raise InvalidArgumentError("empty ket label")
    try:
        parts = [SINGLE_KETS[c] for c in label]
    except KeyError as exc:
        raise InvalidArgumentError(f"unknown ket symbol {exc.args[0]!r}") from None
    return StateVector(reduce(lambda acc, p: np.kron(p, acc), parts[1:], parts[0]))


def basis_state(index: int, n_qubits: int) -> StateVector:
    v = np.zeros(2**n_qubits, dtype=complex)
    v[index] = 1
    return StateVector(v)


def bell_state(kind: str) -> StateVector:
    """Target Bell state by name: psi_minus, psi_plus, phi_minus, phi_plus."""
    table = {
        "psi_minus": "01", "psi_plus": "01",
        "phi_minus": "00", "phi_plus": "00",
    }
    if kind not in table:
        raise InvalidArgumentError(f"unknown Bell state {kind!r}")
    sign = -1 if kind.endswith("minus") else 1
    a = ket(table[kind]).amplitudes
    b = ket("".join("1" if c == "0" else "0" for c in table[kind])).amplitudes
    return StateVector((a + sign * b) * _S)


def ghz_state(n: int, sign: int = +1) -> StateVector:
    v = np.zeros(2**n, dtype=complex)
    v[0] = _S
    v[-1] = sign * _S
    return StateVector(v)


def density_from_bloch(b) -> DensityMatrix:
    """rho = (I + r.sigma) / 2."""
    r = np.asarray(tuple(b), dtype=float).reshape(3)
    length = float(np.linalg.norm(r))
    if not np.all(np.isfinite(r)) or length > 1 + ATOL:
        raise InvalidBlochError(f"Bloch vector {r} lies outside the unit ball")
    return DensityMatrix((I2 + r[0] * X + r[1] * Y + r[2] * Z) / 2)


def bloch_from_density(rho) -> BlochVector:
    if isinstance(rho, StateVector):
        rho = rho.to_density()
    if not isinstance(rho, DensityMatrix) or rho.n_qubits != 1:
        raise InvalidStateError("expected a single-qubit state")
    m = rho.matrix
    if np.max(np.abs(m - m.conj().T)) > ATOL:
        raise InvalidStateError("density matrix is not Hermitian")
    x = 2 * m[0, 1].real
    y = 2 * m[1, 0].imag
    z = (m[0, 0] - m[1, 1]).real
    return BlochVector(float(x), float(y), float(z))


def haar_unitary(rng, dim: int = 2) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    g = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(g)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_state_vector(n_qubits: int, rng) -> StateVector:
    v = rng.standard_normal(2**n_qubits) + 1j * rng.standard_normal(2**n_qubits)
    return StateVector(v, normalize=True)


def random_density(n_qubits: int, rng, rank: int | None = None) -> DensityMatrix:
    d = 2**n_qubits
    k = rank or d
    g = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m))


# ------------------------------------------------------------ tensor plumbing
#
# Internally states are reshaped to "qubit-major" tensors whose axis q is
# qubit q (density matrices: row qubit q at axis q, column qubit q at n + q).


def _vec_tensor(v: np.ndarray, n: int) -> np.ndarray:
    return v.reshape((2,) * n).transpose(tuple(range(n - 1, -1, -1)))


def _vec_flat(t: np.ndarray) -> np.ndarray:
    n = t.ndim
    return np.ascontiguousarray(t.transpose(tuple(range(n - 1, -1, -1)))).reshape(-1)


def _mat_perm(n: int) -> tuple[int, ...]:
    return tuple(n - 1 - q for q in range(n)) + tuple(2 * n - 1 - q for q in range(n))


def _mat_tensor(m: np.ndarray, n: int) -> np.ndarray:
    return m.reshape((2,) * (2 * n)).transpose(_mat_perm(n))


def _mat_flat(t: np.ndarray, n: int) -> np.ndarray:
    d = 2**n
    return np.ascontiguousarray(t.transpose(_mat_perm(n))).reshape(d, d)


def _contract(t: np.ndarray, op: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Apply a k-qubit operator (little-endian over ``axes``) to tensor axes."""
    k = len(axes)
    opt = op.reshape((2,) * (2 * k))
    # op tensor axes: out bits MSB..LSB, then in bits MSB..LSB
    in_axes = list(range(2 * k - 1, k - 1, -1))  # in bit for axes[0], axes[1], ...
    out = np.tensordot(opt, t, axes=(in_axes, list(axes)))
    out_axes = list(range(k - 1, -1, -1))  # out bit for axes[0], axes[1], ...
    return np.moveaxis(out, out_axes, list(axes))


def _check_qubits(qubits: Sequence[int], n: int) -> list[int]:
    qs = [int(q) for q in qubits]
    if len(set(qs)) != len(qs) or any(q < 0 or q >= n for q in qs):
        raise InvalidArgumentError(f"bad qubit indices {qs} for {n} qubits")
    return qs


def apply_operator(state: State, op: np.ndarray, qubits: Sequence[int]) -> State:
    """Apply ``op`` (any 2^k x 2^k matrix) to ``qubits``; no renormalization.

    For density matrices this is ``op rho op^dagger``.
    """
    op = np.asarray(op, dtype=complex)
    n = state.n_qubits
    qs = _check_qubits(qubits, n)
    if op.shape != (2 ** len(qs),) * 2:
        raise InvalidArgumentError(f"operator shape {op.shape} does not match {len(qs)} qubits")
    if isinstance(state, StateVector):
        t = _contract(_vec_tensor(state.amplitudes, n), op, qs)
        return StateVector(_vec_flat(t))
    t = _mat_tensor(state.matrix, n)
    t = _contract(t, op, qs)
    t = _contract(t, op.conj(), [n + q for q in qs])
    return DensityMatrix(_mat_flat(t, n))


def embed_operator(op: np.ndarray, qubits: Sequence[int], n_qubits: int) -> np.ndarray:
    """Full ``2^n x 2^n`` matrix of ``op`` acting on ``qubits`` (reference path)."""
    d = 2**n_qubits
    cols = np.eye(d, dtype=complex)
    out = np.empty((d, d), dtype=complex)
    for c in range(d):
        out[:, c] = apply_operator(StateVector(cols[:, c]), op, qubits).amplitudes
    return out


def tensor(parts: Iterable[State]) -> State:
    """Joint state of ``parts``; the first part occupies the lowest qubits."""
    parts = list(parts)
    if not parts:
        raise InvalidArgumentError("tensor of an empty list")
    if all(isinstance(p, StateVector) for p in parts):
        arrs = [p.amplitudes for p in parts]
        return StateVector(reduce(lambda acc, p: np.kron(p, acc), arrs[1:], arrs[0]))
    mats = [p.to_density().matrix for p in parts]
    return DensityMatrix(reduce(lambda acc, p: np.kron(p, acc), mats[1:], mats[0]))


def partial_trace(state: State, keep: Iterable[int]) -> DensityMatrix:
    """Reduced state on ``keep`` (sorted, little-endian among themselves).

    The trace is preserved, so unnormalized inputs give unnormalized output.
    """
    n = state.n_qubits
    keep = sorted(set(int(k) for k in keep))
    if not keep or any(k < 0 or k >= n for k in keep):
        raise InvalidArgumentError(f"bad keep set {keep} for {n} qubits")
    k = len(keep)
    if isinstance(state, StateVector):
        t = _vec_tensor(state.amplitudes, n)
        m = np.moveaxis(t, keep[::-1], list(range(k))).reshape(2**k, -1)
        return DensityMatrix(m @ m.conj().T)
    t = _mat_tensor(state.matrix, n)
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    row = [letters[q] for q in range(n)]
    col = [letters[q] if q not in keep else letters[n + q] for q in range(n)]
    out = [letters[q] for q in keep] + [letters[n + q] for q in keep]
    r = np.einsum("".join(row) + "".join(col) + "->" + "".join(out), t)
    return DensityMatrix(_mat_flat(r, k))


def fidelity(a: State, b: State) -> float:
    """Squared-overlap (Uhlmann) fidelity, clipped to [0, 1]."""
    if a.n_qubits != b.n_qubits:
        raise InvalidArgumentError("fidelity of states with different qubit counts")
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        f = abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2
    elif isinstance(a, StateVector) or isinstance(b, StateVector):
        v, rho = (a, b) if isinstance(a, StateVector) else (b, a)
        f = np.real(np.vdot(v.amplitudes, rho.matrix @ v.amplitudes))
    else:
        sa = _psd_sqrt(a.matrix)
        ev = np.linalg.eigvalsh(sa @ b.matrix @ sa)
        f = np.sum(np.sqrt(np.clip(ev, 0, None))) ** 2
    return float(min(1.0, max(0.0, f)))


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def is_unitary(u: np.ndarray, atol: float = ATOL) -> bool:
    u = np.asarray(u)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and np.allclose(
        u.conj().T @ u, np.eye(u.shape[0]), atol=atol, rtol=0
    )


def apply_single_qubit_unitary(state: State, u: np.ndarray, q: int) -> State:
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or not is_unitary(u):
        raise InvalidArgumentError("expected a 2x2 unitary")
    return apply_operator(state, u, [q])


def apply_collective_unitary(state: State, u: np.ndarray) -> State:
    """Apply the same single-qubit ``u`` to every qubit."""
    for q in range(state.n_qubits):
        state = apply_single_qubit_unitary(state, u, q)
    return state


def apply_pauli_string(state: State, paulis: str) -> State:
    """Apply e.g. ``"XIZ"`` (character k acts on qubit k)."""
    if len(paulis) != state.n_qubits:
        raise InvalidArgumentError("Pauli string length must equal the qubit count")
    for q, c in enumerate(paulis):
        if c != "I":
            state = apply_operator(state, PAULIS[c], [q])
    return state


def _check_basis(basis) -> tuple[np.ndarray, np.ndarray]:
    b0, b1 = (np.asarray(b, dtype=complex).reshape(2) for b in basis)
    g = np.array([[b0 @ b0.conj(), b1 @ b0.conj()], [b0 @ b1.conj(), b1 @ b1.conj()]])
    if np.max(np.abs(g - np.eye(2))) > ATOL:
        raise InvalidArgumentError("measurement basis is not orthonormal")
    return b0, b1


def _weight(state: State) -> float:
    if isinstance(state, StateVector):
        return float(np.real(np.vdot(state.amplitudes, state.amplitudes)))
    return state.trace()


def _scaled(state: State, c: float) -> State:
    if isinstance(state, StateVector):
        return StateVector(state.amplitudes / np.sqrt(c))
    return DensityMatrix(state.matrix / c)


def single_qubit_probabilities(state: State, q: int, basis) -> tuple[float, float]:
    b0, _ = _check_basis(basis)
    p0 = _weight(apply_operator(state, np.outer(b0, b0.conj()), [q]))
    p0 = min(1.0, max(0.0, p0 / _weight(state)))
    return p0, 1.0 - p0


def measure_single_qubit(state: State, q: int, basis, rng) -> tuple[int, State, float]:
    """Ideal projective measurement of qubit ``q`` in an orthonormal ``basis``.

    Returns ``(outcome, post_state, probability)``; the measured qubit stays
    in the register, collapsed onto the basis vector.
    """
    b = _check_basis(basis)
    if isinstance(state, StateVector):
        n = state.n_qubits
        _check_qubits([q], n)
        t = _vec_tensor(state.amplitudes, n)
        c0 = np.tensordot(b[0].conj(), t, axes=([0], [q]))
        c1 = np.tensordot(b[1].conj(), t, axes=([0], [q]))
        w0, w1 = float(np.real(np.vdot(c0, c0))), float(np.real(np.vdot(c1, c1)))
        p0 = min(1.0, max(0.0, w0 / (w0 + w1)))
        k = 0 if rng.random() < p0 else 1
        c, w = (c0, w0) if k == 0 else (c1, w1)
        post = np.multiply.outer(b[k], c / np.sqrt(w))
        post = np.moveaxis(post, 0, q)
        return k, StateVector(_vec_flat(post)), (p0, 1.0 - p0)[k]
    p0, p1 = single_qubit_probabilities(state, q, b)
    k = 0 if rng.random() < p0 else 1
    post = apply_operator(state, np.outer(b[k], b[k].conj()), [q])
    p = (p0, p1)[k]
    return k, _scaled(post, _weight(post)), p


def discard_qubits(state: State, qubits: Sequence[int], kets: Sequence[np.ndarray]) -> tuple[float, State]:
    """Project ``qubits`` onto the given single-qubit ``kets`` and remove them.

    Returns ``(probability, remaining_state)`` with the remainder normalized.
    Used to drop qubits already collapsed by a measurement.
    """
    n = state.n_qubits
    qs = _check_qubits(qubits, n)
    total = _weight(state)
    if isinstance(state, StateVector):
        t = _vec_tensor(state.amplitudes, n)
        for q, k in sorted(zip(qs, kets), key=lambda z: -z[0]):
            t = np.tensordot(np.asarray(k, dtype=complex).conj(), t, axes=([0], [q]))
        out = StateVector(_vec_flat(t))
    else:
        t = _mat_tensor(state.matrix, n)
        m = n
        for q, k in sorted(zip(qs, kets), key=lambda z: -z[0]):
            k = np.asarray(k, dtype=complex)
            t = np.tensordot(k.conj(), t, axes=([0], [q]))  # row q; col q moved to m-1+q
            t = np.tensordot(k, t, axes=([0], [m - 1 + q]))
            m -= 1
        out = DensityMatrix(_mat_flat(t, m))
    w = _weight(out)
    if w <= 0:
        from .errors import ImpossibleBranchError

        raise ImpossibleBranchError("projection onto the given kets has zero weight")
    return w / total, _scaled(out, w)


def discard_pair(state: StateVector, pair: Sequence[int], ket2: np.ndarray) -> tuple[float, StateVector]:
    """Project two qubits onto a two-qubit ket (little-endian over ``pair``) and remove them."""
    if not isinstance(state, StateVector):
        raise InvalidArgumentError("discard_pair supports state vectors only")
    n = state.n_qubits
    i, j = _check_qubits(pair, n)
    t = _vec_tensor(state.amplitudes, n)
    k = np.asarray(ket2, dtype=complex).reshape(2, 2)  # axes (bit_j, bit_i)
    out = np.tensordot(k.conj(), t, axes=([1, 0], [i, j]))
    res = StateVector(_vec_flat(out))
    w = res.norm() ** 2
    total = state.norm() ** 2
    return w / total, _scaled(res, w)
