"""Simulated single-qubit measurement from program copies and J-measurements.

To read a qubit in the basis {|phi>, |phi_perp>}, append 2^n - 1 copies of
|phi> and run a knockout tournament of J-measurements.  Slot 1 is the input
and slots 2 .. 2^n the program copies; round r (0-based) measures the pairs
(k, 2^r + k) for k = 1 .. 2^r.  Any singlet outcome means the input was not
|phi>; surviving every round is read as |phi>.  An input |phi_perp> slips
through with probability exactly 2^-n.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import DensityMatrix, StateVector, apply_operator, ket, partial_trace, tensor
from ..errors import InvalidArgumentError
from ..jmeasure import J0_KERNEL, J1_KERNEL, JOutcome, MeasurementRecord, measure_j

PHI = "phi"
PHI_PERP = "phi_perp"


def program_schedule(n: int) -> list[list[tuple[int, int]]]:
    """Measurement rounds in 1-based slot labels."""
    if n < 1:
        raise InvalidArgumentError("the tournament needs n >= 1")
    return [[(k, 2**r + k) for k in range(1, 2**r + 1)] for r in range(n)]


@dataclass
class TournamentState:
    round: int
    active_schedule: list[list[tuple[int, int]]]
    joint_state: StateVector


def _phi_vector(phi) -> np.ndarray:
    v = phi.amplitudes if isinstance(phi, StateVector) else np.asarray(phi, dtype=complex)
    v = v.reshape(-1)
    if v.size != 2:
        raise InvalidArgumentError("program state must be a single-qubit pure state")
    return v / np.linalg.norm(v)


def _with_program(state: StateVector, q: int, phi, n: int) -> tuple[StateVector, dict[int, int]]:
    if not isinstance(state, StateVector):
        raise InvalidArgumentError("programmable measurement runs on state vectors")
    if not 0 <= q < state.n_qubits:
        raise InvalidArgumentError(f"qubit {q} out of range")
    base = state.n_qubits
    copies = 2**n - 1
    prog = StateVector(_phi_vector(phi))
    joint = tensor([state] + [prog] * copies)
    slots = {1: q}
    slots.update({k: base + k - 2 for k in range(2, 2**n + 1)})
    return joint, slots


@dataclass
class ProgrammableResult:
    declared: str
    state: StateVector
    records: list[MeasurementRecord] = field(default_factory=list)
    slots: dict[int, int] = field(default_factory=dict)


def programmable_measurement(state: StateVector, q: int, phi, n: int, rng) -> ProgrammableResult:
    """Sampled run; stops at the first singlet outcome."""
    joint, slots = _with_program(state, q, phi, n)
    records = []
    step = 0
    for rnd in program_schedule(n):
        for a, b in rnd:
            outcome, joint, rec = measure_j(joint, (slots[a], slots[b]), rng, step_index=step)
            records.append(rec)
            step += 1
            if outcome is JOutcome.J0:
                return ProgrammableResult(PHI_PERP, joint, records, slots)
    return ProgrammableResult(PHI, joint, records, slots)


@dataclass
class ExactProgrammable:
    """Exact branch analysis of the tournament.

    ``rho_phi`` / ``rho_phi_perp`` are the normalized reduced states of the
    ``keep`` qubits conditioned on each declared outcome (``None`` if that
    outcome is impossible or no ``keep`` set was given).  ``trajectory`` holds
    the normalized all-triplet state after each round.
    """

    p_phi: float
    p_phi_perp: float
    rho_phi: DensityMatrix | None
    rho_phi_perp: DensityMatrix | None
    trajectory: list[StateVector]
    slots: dict[int, int]


def programmable_measurement_exact(state: StateVector, q: int, phi, n: int, keep=None) -> ExactProgrammable:
    """Enumerate every stopping point of the tournament without sampling."""
    joint, slots = _with_program(state, q, phi, n)
    total = float(np.real(np.vdot(joint.amplitudes, joint.amplitudes)))
    keep = sorted(keep) if keep else None
    p_perp = 0.0
    rho_perp = None
    trajectory = []
    v = joint
    for rnd in program_schedule(n):
        for a, b in rnd:
            pair = [slots[a], slots[b]]
            stop = apply_operator(v, J0_KERNEL, pair)
            w = float(np.real(np.vdot(stop.amplitudes, stop.amplitudes)))
            p_perp += w / total
            if keep and w > 0:
                r = partial_trace(stop, keep).matrix
                rho_perp = r if rho_perp is None else rho_perp + r
            v = apply_operator(v, J1_KERNEL, pair)
        w = float(np.real(np.vdot(v.amplitudes, v.amplitudes)))
        trajectory.append(StateVector(v.amplitudes / np.sqrt(w)) if w > 0 else None)
    w_phi = float(np.real(np.vdot(v.amplitudes, v.amplitudes)))
    p_phi = w_phi / total
    rho_phi = None
    if keep and w_phi > 1e-300:
        rho_phi = DensityMatrix(partial_trace(v, keep).matrix / w_phi)
    if rho_perp is not None and p_perp > 0:
        rho_perp = DensityMatrix(rho_perp / (p_perp * total))
    return ExactProgrammable(p_phi, p_perp, rho_phi, rho_perp, trajectory, slots)


def hamming_one_superposition(k: int) -> np.ndarray:
    """|I_k>: equal superposition of the k weight-one strings on k qubits."""
    v = np.zeros(2**k, dtype=complex)
    v[[1 << i for i in range(k)]] = 1 / np.sqrt(k)
    return v


def error_probability(n: int) -> float:
    """Exact chance that |phi_perp> is declared |phi> (input |1>, program |0>)."""
    return programmable_measurement_exact(ket("1"), 0, ket("0"), n).p_phi
