"""Building clusters with J-measurements: two-qubit seeds, fusion, trimming."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from ..core import X_BASIS, Z_BASIS, QubitPair, StateVector, apply_operator, discard_pair, discard_qubits, measure_single_qubit, tensor
from ..errors import CannotTrimError, InvalidArgumentError, RetryLimitError
from ..jmeasure import SINGLET, J1_KERNEL, JOutcome, MeasurementRecord, j_outcome_probabilities, measure_j
from .state import ClusterState, RedundantLogicalQubit

DEFAULT_MAX_ATTEMPTS = 1000

# Pauli frame of the two-qubit seed for each (qubit-1 Z outcome, qubit-4 X outcome):
# (markers of logical 0, markers of logical 1, z_frame).  Checked in the tests
# against an exhaustive Pauli search.
SEED_FRAME = {
    (0, 0): ((1,), (0,), (0, 0)),
    (0, 1): ((0,), (1,), (0, 0)),
    (1, 0): ((0,), (1,), (0, 0)),
    (1, 1): ((1,), (0,), (0, 0)),
}


class FusionTag(enum.Enum):
    FUSED_J0 = "FusedJ0"
    FUSED_J1 = "FusedJ1"
    FAILURE = "Failure"

    @property
    def success(self) -> bool:
        return self is not FusionTag.FAILURE


@dataclass
class FusionOutcome:
    """Result of one fusion attempt.

    ``clusters`` holds the merged cluster on success, or the two surviving
    clusters on failure; a slot is ``None`` when that side's logical qubit ran
    out of physical qubits.  ``state`` is the raw post-measurement register
    (survivors of A followed by survivors of B).
    """

    tag: FusionTag
    clusters: list[ClusterState | None]
    consumed: int
    probability: float
    state: StateVector
    records: list[MeasurementRecord] = field(default_factory=list)
    pm_outcomes: tuple[int, int] | None = None
    merged_redundancy: int | None = None
    exhausted: bool = False
    attempts: int = 1

    @property
    def success(self) -> bool:
        return self.tag.success

    @property
    def cluster(self) -> ClusterState | None:
        return self.clusters[0] if self.success else None


def _shift(lq: RedundantLogicalQubit, offset: int) -> RedundantLogicalQubit:
    return RedundantLogicalQubit([p + offset for p in lq.physical_indices], lq.markers)


def _reindex(lqs, removed):
    removed = sorted(removed)

    def f(p):
        return p - sum(1 for r in removed if r < p)

    return [RedundantLogicalQubit([f(p) for p in lq.physical_indices], lq.markers) for lq in lqs]


def _drop_last(lq: RedundantLogicalQubit) -> RedundantLogicalQubit:
    return RedundantLogicalQubit(lq.physical_indices[:-1], lq.markers[:-1])


def fuse(a_cluster: ClusterState, qa: int, b_cluster: ClusterState, qb: int, rng) -> FusionOutcome:
    """Fuse logical ``qa`` of ``a_cluster`` with logical ``qb`` of ``b_cluster``.

    The last physical qubit of each encoding is J-measured.  Singlet: the two
    encodings merge into one of size a+b-2 and the singlet pair is dropped.
    Triplet: both measured qubits are then read in the |+>/|-> basis; opposite
    outcomes merge (size a+b-2), equal outcomes are a failure that leaves both
    clusters intact with one physical qubit fewer on each fused encoding.
    """
    if a_cluster is b_cluster:
        raise InvalidArgumentError("fusion needs two distinct clusters")
    A, B = a_cluster, b_cluster
    alpha, beta = A.logical_qubits[qa], B.logical_qubits[qb]
    off = A.n_physical
    p = alpha.physical_indices[-1]
    q = off + beta.physical_indices[-1]
    s = alpha.markers[-1] ^ beta.markers[-1]

    joint = tensor([A.backing, B.backing])
    outcome, post, rec = measure_j(joint, QubitPair(p, q), rng)
    records = [rec]
    prob = rec.probability

    if outcome is JOutcome.J0:
        _, rest = discard_pair(post, (p, q), SINGLET)
        return _merged(A, qa, B, qb, rest, 1 ^ s, FusionTag.FUSED_J0, prob, records, None)

    op, post, pp = measure_single_qubit(post, p, X_BASIS, rng)
    oq, post, pq = measure_single_qubit(post, q, X_BASIS, rng)
    prob *= pp * pq
    _, rest = discard_qubits(post, [p, q], [X_BASIS[op], X_BASIS[oq]])
    if op != oq:
        return _merged(A, qa, B, qb, rest, s, FusionTag.FUSED_J1, prob, records, (op, oq))
    return _failure(A, qa, B, qb, rest, op, prob, records)


def fusion_branch_probabilities(a_cluster: ClusterState, qa: int, b_cluster: ClusterState, qb: int) -> dict[FusionTag, float]:
    """Exact probabilities of the three fusion branches, without sampling."""
    A, B = a_cluster, b_cluster
    p = A.logical_qubits[qa].physical_indices[-1]
    q = A.n_physical + B.logical_qubits[qb].physical_indices[-1]
    joint = tensor([A.backing, B.backing])
    p0, _ = j_outcome_probabilities(joint, QubitPair(p, q))
    trip = apply_operator(joint, J1_KERNEL, [p, q])
    total = float(np.real(np.vdot(joint.amplitudes, joint.amplitudes)))
    anti = 0.0
    for op, oq in ((0, 1), (1, 0)):
        proj = np.kron(np.outer(X_BASIS[oq], X_BASIS[oq].conj()), np.outer(X_BASIS[op], X_BASIS[op].conj()))
        v = apply_operator(trip, proj, [p, q]).amplitudes
        anti += float(np.real(np.vdot(v, v))) / total
    return {FusionTag.FUSED_J0: p0, FusionTag.FUSED_J1: anti, FusionTag.FAILURE: 1.0 - p0 - anti}


def _merged(A, qa, B, qb, rest, t, tag, prob, records, pm):
    """Bookkeeping for a successful fusion.

    ``t`` is the relation x_beta = x_gamma XOR t between the old logical bit
    of beta and the merged bit; both branches also pick up a Z on the merged
    qubit from the measured pair.
    """
    off = A.n_physical
    alpha, beta = A.logical_qubits[qa], B.logical_qubits[qb]
    p = alpha.physical_indices[-1]
    q = off + beta.physical_indices[-1]
    a, b = alpha.redundancy, beta.redundancy

    a_rest = _drop_last(alpha)
    b_rest = _drop_last(_shift(beta, off))
    gamma = RedundantLogicalQubit(
        a_rest.physical_indices + b_rest.physical_indices,
        a_rest.markers + tuple(m ^ t for m in b_rest.markers),
    )
    z_gamma = A.z_frame[qa] ^ B.z_frame[qb] ^ 1
    merged_red = a + b - 2
    if merged_red == 0:
        return FusionOutcome(tag, [None], 2, prob, rest, records, pm, 0, exhausted=True)

    # new logical order: A (gamma in alpha's slot), then B without beta
    b_map = {}
    lqs = list(A.logical_qubits)
    lqs[qa] = gamma
    zs = list(A.z_frame)
    zs[qa] = z_gamma
    for v, lq in enumerate(B.logical_qubits):
        if v == qb:
            continue
        b_map[v] = len(lqs)
        lqs.append(_shift(lq, off))
        zs.append(B.z_frame[v] ^ (t if v in B.neighbours(qb) else 0))
    edges = set(A.edges)
    for x, y in B.edges:
        xx = qa if x == qb else b_map[x]
        yy = qa if y == qb else b_map[y]
        edges.add(tuple(sorted((xx, yy))))
    lqs = _reindex(lqs, [p, q])
    hist = A.history + B.history + [f"fuse:{tag.value}"]
    merged = ClusterState(lqs, rest, edges, zs, hist)
    return FusionOutcome(tag, [merged], 2, prob, rest, records, pm, merged_red)


def _failure(A, qa, B, qb, rest, o, prob, records):
    alpha, beta = A.logical_qubits[qa], B.logical_qubits[qb]
    p = alpha.physical_indices[-1]
    n_a = A.n_physical - 1
    survivors: list[ClusterState | None] = []
    exhausted = False
    # rest = (A minus p) (x) (B minus q); split it back into two registers
    a_part, b_part = _split_product(rest, n_a)
    for C, u, lost, part in ((A, qa, p, a_part), (B, qb, beta.physical_indices[-1], b_part)):
        lq = C.logical_qubits[u]
        if lq.redundancy == 1:
            survivors.append(None)
            exhausted = True
            continue
        lqs = list(C.logical_qubits)
        lqs[u] = _drop_last(lq)
        lqs = _reindex(lqs, [lost])
        zs = list(C.z_frame)
        zs[u] ^= o
        survivors.append(ClusterState(lqs, part, set(C.edges), zs, C.history + ["fuse:Failure"]))
    return FusionOutcome(FusionTag.FAILURE, survivors, 2, prob, rest, records, (o, o),
                         None, exhausted=exhausted)


def _split_product(state: StateVector, n_low: int) -> tuple[StateVector | None, StateVector | None]:
    """Factor a product state of (low n_low qubits) x (high qubits)."""
    n = state.n_qubits
    if n_low == 0:
        return None, state
    if n_low == n:
        return state, None
    m = state.amplitudes.reshape(2 ** (n - n_low), 2**n_low)  # rows: high, cols: low
    u, sv, vh = np.linalg.svd(m)
    if sv.size > 1 and sv[1] > 1e-8:
        raise InvalidArgumentError("state does not factor across the requested cut")
    low = StateVector(vh[0] * sv[0])
    high = StateVector(u[:, 0])
    return low.normalized(), high.normalized()


def remove_redundancy(cluster: ClusterState, q: int, rng) -> ClusterState:
    """Measure the last physical qubit of logical ``q`` in |+>/|-> and drop it.

    Either outcome leaves the same cluster with one fewer redundant qubit; a
    ``-`` outcome is recorded as a Z on ``q``.
    """
    lq = cluster.logical_qubits[q]
    if lq.redundancy < 2:
        raise CannotTrimError(f"logical qubit {q} has redundancy {lq.redundancy}")
    p = lq.physical_indices[-1]
    o, post, _ = measure_single_qubit(cluster.backing, p, X_BASIS, rng)
    _, rest = discard_qubits(post, [p], [X_BASIS[o]])
    lqs = list(cluster.logical_qubits)
    lqs[q] = _drop_last(lq)
    lqs = _reindex(lqs, [p])
    zs = list(cluster.z_frame)
    zs[q] ^= o
    return ClusterState(lqs, rest, set(cluster.edges), zs, cluster.history + [f"trim:{o}"])


def ghz_cluster(ghz) -> ClusterState:
    """View a GHZ resource as a one-vertex cluster with redundancy n."""
    from ..protocols.entangle import GhzResource

    if isinstance(ghz, GhzResource):
        state, sign = ghz.state, ghz.sign
    else:
        state = ghz
        sign = 1 if np.real(state.amplitudes[-1] / state.amplitudes[0]) > 0 else -1
    n = state.n_qubits
    return ClusterState([RedundantLogicalQubit(list(range(n)), (0,) * n)], state.copy(),
                        set(), [0 if sign > 0 else 1])


def add_redundancy(cluster: ClusterState, q: int, ghz, rng, max_attempts: int = DEFAULT_MAX_ATTEMPTS) -> FusionOutcome:
    """Grow the encoding of logical ``q`` by fusing a GHZ state onto it.

    Failed attempts throw the GHZ away and retry with a fresh one of the same
    size on whatever survives of the cluster; if ``q`` runs out of physical
    qubits the failed outcome is returned.
    """
    from ..protocols.entangle import make_ghz

    size = ghz.n_qubits if hasattr(ghz, "n_qubits") else ghz.state.n_qubits
    if size < 2:
        raise InvalidArgumentError("GHZ resource must have at least two qubits")
    current, resource = cluster, ghz
    for attempt in range(1, max_attempts + 1):
        out = fuse(current, q, ghz_cluster(resource), 0, rng)
        out.attempts = attempt
        if out.success or out.clusters[0] is None:
            return out
        current = out.clusters[0]
        resource = make_ghz(size, rng)
    raise RetryLimitError(f"add_redundancy did not succeed in {max_attempts} attempts")


@dataclass
class SeedAttempt:
    """Exact intermediate data of one seed-cluster construction."""

    double_j1_state: StateVector
    probability: float


def seed_input_state() -> StateVector:
    """|psi-> on qubits (0, 1) and |phi+> on qubits (2, 3)."""
    from ..core import bell_state

    return tensor([bell_state("psi_minus"), bell_state("phi_plus")])


SEED_PAIRS = (QubitPair(0, 2), QubitPair(1, 3))


def seed_cluster_from_branch(double_j1: StateVector, o1: int, o4: int) -> ClusterState:
    """Cluster on qubits 1, 2 after reading qubit 0 in Z (``o1``) and qubit 3 in X (``o4``)."""
    _, rest = discard_qubits(double_j1, [0, 3], [Z_BASIS[o1], X_BASIS[o4]])
    m0, m1, z = SEED_FRAME[(o1, o4)]
    lqs = [RedundantLogicalQubit([0], m0), RedundantLogicalQubit([1], m1)]
    return ClusterState(lqs, rest, {(0, 1)}, list(z), [f"seed:{o1}{o4}"])


def make_two_qubit_cluster(rng, max_attempts: int = DEFAULT_MAX_ATTEMPTS) -> ClusterState:
    """Seed cluster |0+> + |1-> from two Bell pairs and two J-measurements.

    The Bell pairs themselves come from the J-only recipes.  On the double
    triplet outcome, qubit 0 is read in Z and qubit 3 in X; the remaining
    qubits 1, 2 hold the cluster up to the Pauli frame in ``SEED_FRAME``.
    """
    from ..protocols.entangle import make_bell

    for attempt in range(1, max_attempts + 1):
        joint = tensor([make_bell("psi_minus", rng).state, make_bell("phi_plus", rng).state])
        o_a, joint, _ = measure_j(joint, SEED_PAIRS[0], rng)
        if o_a is JOutcome.J0:
            continue
        o_b, joint, _ = measure_j(joint, SEED_PAIRS[1], rng)
        if o_b is JOutcome.J0:
            continue
        o1, joint, _ = measure_single_qubit(joint, 0, Z_BASIS, rng)
        o4, joint, _ = measure_single_qubit(joint, 3, X_BASIS, rng)
        c = seed_cluster_from_branch(joint, o1, o4)
        c.history.append(f"attempts:{attempt}")
        return c
    raise RetryLimitError(f"two-qubit cluster not produced in {max_attempts} attempts")
