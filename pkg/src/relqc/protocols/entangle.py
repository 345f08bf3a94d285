"""Bell and GHZ states from product inputs and J-measurements."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ..core import X, QubitPair, StateVector, apply_operator, bell_state, ghz_state, ket, tensor
from ..errors import InvalidArgumentError, RetryLimitError
from ..jmeasure import JOutcome, measure_j

DEFAULT_MAX_ATTEMPTS = 1000


class BellKind(str, enum.Enum):
    PSI_MINUS = "psi_minus"
    PSI_PLUS = "psi_plus"
    PHI_MINUS = "phi_minus"
    PHI_PLUS = "phi_plus"


# input product state and the outcome that heralds the target
BELL_RECIPES = {
    BellKind.PSI_MINUS: ("01", JOutcome.J0),
    BellKind.PSI_PLUS: ("01", JOutcome.J1),
    BellKind.PHI_MINUS: ("+-", JOutcome.J1),
    BellKind.PHI_PLUS: ("ij", JOutcome.J1),
}

GHZ_BASE_INPUT = ("phi_plus", "phi_minus")
GHZ_BASE_PAIRS = (QubitPair(0, 2), QubitPair(1, 3))


@dataclass
class Prepared:
    state: StateVector
    attempts: int
    probability: float


@dataclass
class GhzResource:
    n_qubits: int
    sign: int
    state: StateVector
    attempts: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise InvalidArgumentError("sign must be +1 or -1")


def make_bell(kind, rng, max_attempts: int = DEFAULT_MAX_ATTEMPTS) -> Prepared:
    """Herald a Bell state by J-measuring a product pair, retrying on the wrong outcome."""
    kind = BellKind(kind)
    label, want = BELL_RECIPES[kind]
    for attempt in range(1, max_attempts + 1):
        outcome, post, rec = measure_j(ket(label), (0, 1), rng)
        if outcome is want:
            return Prepared(post, attempt, rec.probability)
    raise RetryLimitError(f"{kind.value} not heralded in {max_attempts} attempts")


def ghz4_input() -> StateVector:
    return tensor([bell_state(GHZ_BASE_INPUT[0]), bell_state(GHZ_BASE_INPUT[1])])


def _ghz4(rng, max_attempts: int) -> tuple[StateVector, int]:
    for attempt in range(1, max_attempts + 1):
        joint = tensor([make_bell(GHZ_BASE_INPUT[0], rng).state, make_bell(GHZ_BASE_INPUT[1], rng).state])
        ok = True
        for pair in GHZ_BASE_PAIRS:
            outcome, joint, _ = measure_j(joint, pair, rng)
            if outcome is JOutcome.J0:
                ok = False
                break
        if ok:
            return joint, attempt
    raise RetryLimitError(f"GHZ4 not heralded in {max_attempts} attempts")


def _canonicalize(cluster) -> GhzResource:
    """Undo the marker (X) frame so the state reads |0..0> +- |1..1>."""
    state = cluster.backing
    lq = cluster.logical_qubits[0]
    for p, m in zip(lq.physical_indices, lq.markers):
        if m:
            state = apply_operator(state, X, [p])
    a0, a1 = state.amplitudes[0], state.amplitudes[-1]
    phase = a0 / abs(a0)
    state = StateVector(state.amplitudes / phase)
    sign = 1 if np.real(a1 / a0) > 0 else -1
    return GhzResource(state.n_qubits, sign, state)


def make_ghz(n: int, rng, max_attempts: int = DEFAULT_MAX_ATTEMPTS) -> GhzResource:
    """GHZ state on ``n`` qubits.

    n = 2 is the phi+ Bell recipe and n = 4 the double-triplet recipe on
    phi+ (x) phi-.  Other sizes fuse GHZ resources (each fusion adds k - 2
    qubits for a k-qubit partner); odd partners come from trimming one qubit
    off a GHZ4.  A failed fusion keeps the shortened survivor.
    """
    from ..cluster.fusion import fuse, ghz_cluster, remove_redundancy

    if n < 2:
        raise InvalidArgumentError("GHZ states need at least two qubits")
    if n == 2:
        b = make_bell(BellKind.PHI_PLUS, rng, max_attempts)
        return GhzResource(2, 1, b.state, b.attempts)
    if n == 3:
        g4 = make_ghz(4, rng, max_attempts)
        c = remove_redundancy(ghz_cluster(g4), 0, rng)
        res = _canonicalize(c)
        res.attempts = g4.attempts
        return res
    state, attempts = _ghz4(rng, max_attempts)
    current = ghz_cluster(StateVector(state.amplitudes))
    for _ in range(max_attempts):
        size = current.redundancy(0)
        if size == n:
            res = _canonicalize(current)
            res.attempts = attempts
            return res
        partner = make_ghz(min(n - size + 2, 4), rng, max_attempts)
        attempts += partner.attempts
        out = fuse(current, 0, ghz_cluster(partner), 0, rng)
        if out.success:
            current = out.clusters[0]
        elif out.clusters[0] is not None:
            current = out.clusters[0]
        else:
            state, extra = _ghz4(rng, max_attempts)
            attempts += extra
            current = ghz_cluster(StateVector(state.amplitudes))
    raise RetryLimitError(f"GHZ{n} not built within {max_attempts} fusions")


def ghz_target(n: int, sign: int) -> StateVector:
    return ghz_state(n, sign)
