"""Singlet/triplet (total spin) measurement on a qubit pair.

``J0`` projects onto the singlet (|01> - |10>)/sqrt2, ``J1 = I - J0`` onto
the triplet.  The fast path contracts 4x4 pair kernels into the state; the
full-register matrices from :func:`j_projectors` are a slow reference built
independently from ``(I - sigma_i . sigma_j) / 4``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import (
    PAULIS,
    DensityMatrix,
    QubitPair,
    State,
    StateVector,
    apply_operator,
)
from .errors import ImpossibleBranchError, InvalidPairError

ZERO_PROB = 1e-14

# local little-endian over (i, j): index = b_i + 2 b_j
SINGLET = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
J0_KERNEL = np.outer(SINGLET, SINGLET.conj())
J1_KERNEL = np.eye(4, dtype=complex) - J0_KERNEL
SWAP_KERNEL = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)


class JOutcome(enum.IntEnum):
    J0 = 0
    J1 = 1


KERNELS = {JOutcome.J0: J0_KERNEL, JOutcome.J1: J1_KERNEL}


@dataclass(frozen=True)
class JProjectorPair:
    j0: np.ndarray
    j1: np.ndarray


@dataclass(frozen=True)
class MeasurementRecord:
    pair: QubitPair
    outcome: JOutcome
    probability: float
    step_index: int = 0


def _as_pair(pair) -> QubitPair:
    if isinstance(pair, QubitPair):
        return pair
    i, j = pair
    return QubitPair(int(i), int(j))


def _embed_pauli(p: np.ndarray, q: int, n: int) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for k in range(n - 1, -1, -1):
        out = np.kron(out, p if k == q else PAULIS["I"])
    return out


def j_projectors(pair, n_qubits: int) -> JProjectorPair:
    """Full ``2^n x 2^n`` projectors for ``pair`` (reference path, small n)."""
    pair = _as_pair(pair)
    pair.check(n_qubits)
    d = 2**n_qubits
    dot = sum(
        _embed_pauli(PAULIS[a], pair.i, n_qubits) @ _embed_pauli(PAULIS[a], pair.j, n_qubits)
        for a in "XYZ"
    )
    j0 = (np.eye(d) - dot) / 4
    return JProjectorPair(j0=j0, j1=np.eye(d) - j0)


def _weight(state: State) -> float:
    if isinstance(state, StateVector):
        return float(np.real(np.vdot(state.amplitudes, state.amplitudes)))
    return float(np.real(np.trace(state.matrix)))


def _singlet_weight(state: State, pair: QubitPair) -> float:
    n = state.n_qubits
    if isinstance(state, StateVector):
        t = state.amplitudes.reshape((2,) * n)
        ai, aj = n - 1 - pair.i, n - 1 - pair.j
        idx01 = [slice(None)] * n
        idx10 = [slice(None)] * n
        idx01[ai], idx01[aj] = 1, 0  # b_i = 1, b_j = 0
        idx10[ai], idx10[aj] = 0, 1
        c = t[tuple(idx01)] - t[tuple(idx10)]
        return float(np.real(np.vdot(c, c))) / 2
    return _weight(apply_operator(state, J0_KERNEL, [pair.i, pair.j]))


def j_outcome_probabilities(state: State, pair) -> tuple[float, float]:
    """Born probabilities ``(p0, p1)`` of the singlet and triplet outcomes."""
    pair = _as_pair(pair)
    pair.check(state.n_qubits)
    p0 = _singlet_weight(state, pair) / _weight(state)
    p0 = min(1.0, max(0.0, p0))
    return p0, 1.0 - p0


def _project(state: State, pair: QubitPair, outcome: JOutcome) -> State:
    return apply_operator(state, KERNELS[outcome], [pair.i, pair.j])


def _normalize(state: State, w: float) -> State:
    if isinstance(state, StateVector):
        return StateVector(state.amplitudes / np.sqrt(w))
    return DensityMatrix(state.matrix / w)


def postselect_j(state: State, pair, want: JOutcome) -> tuple[State, float]:
    """Exact branch: projected, renormalized state and its Born probability."""
    pair = _as_pair(pair)
    pair.check(state.n_qubits)
    want = JOutcome(want)
    post = _project(state, pair, want)
    w = _weight(post)
    p = w / _weight(state)
    if p < ZERO_PROB:
        raise ImpossibleBranchError(f"{want.name} on {tuple(pair)} has probability {p:.3g}")
    return _normalize(post, w), min(1.0, p)


def measure_j(state: State, pair, rng, step_index: int = 0):
    """Sample a J outcome; returns ``(outcome, post_state, record)``."""
    pair = _as_pair(pair)
    p0, p1 = j_outcome_probabilities(state, pair)
    outcome = JOutcome.J0 if rng.random() < p0 else JOutcome.J1
    post = _project(state, pair, outcome)
    post = _normalize(post, _weight(post))
    prob = p0 if outcome is JOutcome.J0 else p1
    return outcome, post, MeasurementRecord(pair, outcome, prob, step_index)


__all__ = [
    "InvalidPairError",
    "JOutcome",
    "JProjectorPair",
    "MeasurementRecord",
    "SINGLET",
    "J0_KERNEL",
    "J1_KERNEL",
    "SWAP_KERNEL",
    "j_projectors",
    "j_outcome_probabilities",
    "measure_j",
    "postselect_j",
]
