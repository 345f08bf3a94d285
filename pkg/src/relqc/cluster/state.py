"""Redundantly encoded cluster states and Pauli-equivalence checks.

A logical cluster qubit ``u`` is carried by several physical qubits.  On the
logical-0 branch physical qubit ``k`` of ``u`` holds ``markers[k]``; on the
logical-1 branch it holds the complement.  The encoded state is

    sum_x (-1)^(sum_edges x_u x_v + sum_u z_u x_u) |markers_u XOR x_u ...>

so X-type Pauli corrections live in the marker strings and Z-type ones in the
per-logical ``z_frame`` bits.  :meth:`ClusterState.frame_pauli_string` turns
that record into the physical Pauli string relating the canonical cluster
(all-zero markers, no Z) to the backing state.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ..core import PAULIS, StateVector, apply_pauli_string, fidelity, partial_trace
from ..errors import InvalidArgumentError

PAULI_EQ_TOL = 1e-9


@dataclass
class RedundantLogicalQubit:
    physical_indices: list[int]
    markers: tuple[int, ...]

    def __post_init__(self):
        self.physical_indices = [int(p) for p in self.physical_indices]
        self.markers = tuple(int(m) & 1 for m in self.markers)
        if len(self.markers) != len(self.physical_indices):
            raise InvalidArgumentError("one marker bit per physical qubit is required")

    @property
    def redundancy(self) -> int:
        return len(self.physical_indices)

    @property
    def marker_strings(self) -> tuple[str, str]:
        zero = "".join(str(m) for m in self.markers)
        one = "".join(str(1 - m) for m in self.markers)
        return zero, one


@dataclass
class ClusterState:
    logical_qubits: list[RedundantLogicalQubit]
    backing: StateVector
    edges: set[tuple[int, int]] = field(default_factory=set)
    z_frame: list[int] = field(default_factory=list)
    history: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.edges = {tuple(sorted(e)) for e in self.edges}
        if not self.z_frame:
            self.z_frame = [0] * len(self.logical_qubits)
        phys = sorted(p for lq in self.logical_qubits for p in lq.physical_indices)
        if phys != list(range(self.backing.n_qubits)):
            raise InvalidArgumentError("physical qubits must be partitioned among logical qubits")

    @property
    def n_logical(self) -> int:
        return len(self.logical_qubits)

    @property
    def n_physical(self) -> int:
        return self.backing.n_qubits

    def redundancy(self, u: int) -> int:
        return self.logical_qubits[u].redundancy

    def neighbours(self, u: int) -> set[int]:
        return {b if a == u else a for a, b in self.edges if u in (a, b)}

    @classmethod
    def ideal(cls, n_logical: int, edges, redundancies, markers=None, z_frame=None) -> "ClusterState":
        """Cluster whose backing state is exactly the encoded ideal state.

        Physical qubits are assigned contiguously: logical 0 first, etc.
        """
        redundancies = list(redundancies)
        if len(redundancies) != n_logical or min(redundancies) < 1:
            raise InvalidArgumentError("need one redundancy >= 1 per logical qubit")
        lqs, start = [], 0
        for u, r in enumerate(redundancies):
            mk = markers[u] if markers is not None else (0,) * r
            lqs.append(RedundantLogicalQubit(list(range(start, start + r)), mk))
            start += r
        z = list(z_frame) if z_frame is not None else [0] * n_logical
        amps = encoded_graph_state(lqs, edges, z, start)
        return cls(lqs, StateVector(amps), set(edges), z)

    def ideal_state(self) -> StateVector:
        """What the backing should be given the recorded graph, markers and frame."""
        return StateVector(encoded_graph_state(self.logical_qubits, self.edges, self.z_frame, self.n_physical))

    def canonical_state(self) -> StateVector:
        """Same graph and encoding sizes, all-zero markers and no Z corrections."""
        lqs = [RedundantLogicalQubit(lq.physical_indices, (0,) * lq.redundancy) for lq in self.logical_qubits]
        return StateVector(encoded_graph_state(lqs, self.edges, [0] * self.n_logical, self.n_physical))

    def frame_pauli_string(self) -> str:
        """Physical Pauli string P with backing = P . canonical (up to phase)."""
        xs = [0] * self.n_physical
        zs = [0] * self.n_physical
        for lq, z in zip(self.logical_qubits, self.z_frame):
            for p, m in zip(lq.physical_indices, lq.markers):
                xs[p] = m
            zs[lq.physical_indices[0]] ^= z
        return "".join("IXZY"[x + 2 * z] for x, z in zip(xs, zs))

    def consistency(self) -> float:
        """Fidelity between the backing state and :meth:`ideal_state`."""
        return fidelity(self.backing, self.ideal_state())

    def copy(self) -> "ClusterState":
        return ClusterState(
            [RedundantLogicalQubit(list(l.physical_indices), l.markers) for l in self.logical_qubits],
            self.backing.copy(),
            set(self.edges),
            list(self.z_frame),
            list(self.history),
        )


def encoded_graph_state(logical_qubits, edges, z_frame, n_physical: int) -> np.ndarray:
    L = len(logical_qubits)
    xs = ((np.arange(2**L)[:, None] >> np.arange(L)[None, :]) & 1).astype(np.int64)
    phase = np.zeros(2**L, dtype=np.int64)
    for a, b in edges:
        phase += xs[:, a] * xs[:, b]
    for u, z in enumerate(z_frame):
        if z:
            phase += xs[:, u]
    idx = np.zeros(2**L, dtype=np.int64)
    for u, lq in enumerate(logical_qubits):
        for p, m in zip(lq.physical_indices, lq.markers):
            idx |= (xs[:, u] ^ m) << p
    amps = np.zeros(2**n_physical, dtype=complex)
    amps[idx] = np.where(phase % 2, -1.0, 1.0) / np.sqrt(2**L)
    return amps


def logical_branches(cluster: ClusterState, u: int) -> tuple[StateVector, StateVector]:
    """|X> and |X_perp>: the rest of the register on the two branches of ``u``.

    Obtained by projecting ``u``'s physical qubits onto its two marker strings;
    each returned vector carries the remaining physical qubits in order.
    """
    from ..core import SINGLE_KETS, discard_qubits

    lq = cluster.logical_qubits[u]
    out = []
    for bit in (0, 1):
        kets = [SINGLE_KETS[str(m ^ bit)] for m in lq.markers]
        _, rest = discard_qubits(cluster.backing, lq.physical_indices, kets)
        out.append(rest)
    return out[0], out[1]


def pauli_equivalent(s1: StateVector, s2: StateVector, tol: float = PAULI_EQ_TOL, max_prefix: int = 6) -> str | None:
    """Find a Pauli string P with fidelity(P s1, s2) >= 1 - tol, or ``None``.

    Depth-first over qubits; a partial assignment on qubits ``0..k-1`` is kept
    only if it maps the reduced state of ``s1`` on those qubits onto that of
    ``s2`` (checked for prefixes up to ``max_prefix`` qubits, beyond which the
    search falls back to full overlaps).
    """
    n = s1.n_qubits
    if s2.n_qubits != n:
        raise InvalidArgumentError("states must have the same qubit count")
    if n > 12:
        raise InvalidArgumentError("pauli_equivalent supports at most 12 qubits")
    lim = min(n, max_prefix)
    r1 = [partial_trace(s1, range(k)).matrix for k in range(1, lim + 1)]
    r2 = [partial_trace(s2, range(k)).matrix for k in range(1, lim + 1)]

    def prefix_ok(prefix: str) -> bool:
        k = len(prefix)
        if k > lim:
            return True
        op = np.ones((1, 1), dtype=complex)
        for c in reversed(prefix):
            op = np.kron(op, PAULIS[c])
        m = op @ r1[k - 1] @ op.conj().T
        return np.max(np.abs(m - r2[k - 1])) < 1e-7

    def search(prefix: str):
        if len(prefix) == n:
            if fidelity(apply_pauli_string(s1, prefix), s2) >= 1 - tol:
                return prefix
            return None
        for c in "IXYZ":
            cand = prefix + c
            if prefix_ok(cand):
                hit = search(cand)
                if hit is not None:
                    return hit
        return None

    return search("")


def pauli_equivalent_bruteforce(s1: StateVector, s2: StateVector, tol: float = PAULI_EQ_TOL) -> list[str]:
    """Every witness among all 4^n Pauli strings (test oracle, small n)."""
    hits = []
    for combo in itertools.product("IXYZ", repeat=s1.n_qubits):
        p = "".join(combo)
        if fidelity(apply_pauli_string(s1, p), s2) >= 1 - tol:
            hits.append(p)
    return hits
