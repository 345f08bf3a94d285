"""Pairwise triplet-postselection purification of a single-qubit supply.

Two copies of a qubit with Bloch vector r are J-measured; on the triplet
outcome either qubit is left with Bloch vector 4 r / (3 + |r|^2), which is
longer and points the same way.  Iterating drives |r| towards 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..core import BlochVector, DensityMatrix, QubitPair, bloch_from_density, density_from_bloch, partial_trace, tensor
from ..errors import InsufficientSupplyError, InvalidArgumentError, UnpurifiableError
from ..jmeasure import JOutcome, postselect_j

LOG_GROWTH = math.log(4 / 3)
BOUND_SLACK = 1e-12


@dataclass(frozen=True)
class SupplySpec:
    """A stock of ``count_available`` identical qubits with the given Bloch vector."""

    bloch: BlochVector
    count_available: int

    def __post_init__(self):
        if not isinstance(self.bloch, BlochVector):
            object.__setattr__(self, "bloch", BlochVector.from_array(self.bloch))
        if self.count_available < 0:
            raise InvalidArgumentError("count_available must be non-negative")


def success_probability(r: float) -> float:
    """Probability of the triplet outcome on two copies of length ``r``."""
    return (3 + r * r) / 4


def next_length(r: float) -> float:
    return 4 * r / (3 + r * r)


def exact_lengths(r0: float, steps: int) -> list[float]:
    """r_0 .. r_steps of the exact recurrence."""
    out = [float(r0)]
    for _ in range(steps):
        out.append(next_length(out[-1]))
    return out


def bound_length(r0: float, k: int) -> float:
    """Closed-form lower bound R_k = ((3/4)^k (1 - r0)/r0 + 1)^-1."""
    return 1.0 / ((0.75**k) * (1 - r0) / r0 + 1)


def step_bound(r0: float, epsilon: float) -> int:
    """Smallest integer n with n >= log((1-eps)(1-r0)/(eps r0)) / log(4/3), floored at 0."""
    if r0 >= 1:
        return 0
    x = math.log((1 - epsilon) * (1 - r0) / (epsilon * r0)) / LOG_GROWTH
    n = max(0, math.ceil(x))
    # ceil of a rounded float may land one short of the true bound; exact
    # ties (R_n == 1 - eps) are allowed a rounding slack
    while bound_length(r0, n) < 1 - epsilon - BOUND_SLACK:
        n += 1
    return n


def heuristic_steps(r0: float, epsilon: float) -> float:
    """The simplified count 3 ln(1/(eps r0)); reported only, never relied on."""
    return 3 * math.log(1 / (epsilon * r0))


@dataclass(frozen=True)
class PurificationSchedule:
    r0: float
    epsilon: float
    steps: int
    predicted_lengths: list[float]
    exact_lengths: list[float]
    step_success_probs: list[float]
    yield_lower_bound: float
    expected_yield: float
    heuristic_steps: float
    heuristic_sufficient: bool

    @property
    def demand_estimate(self) -> int:
        """Input qubits needed for one expected survivor after ``steps`` rounds."""
        return max(1, math.ceil(1 / self.expected_yield))


def purification_schedule(r0: float, epsilon: float) -> PurificationSchedule:
    if not 0 < epsilon < 1:
        raise InvalidArgumentError(f"epsilon must lie in (0, 1), got {epsilon}")
    if r0 == 0:
        raise UnpurifiableError("a maximally mixed supply cannot be purified")
    if not 0 < r0 <= 1:
        raise InvalidArgumentError(f"r0 must lie in (0, 1], got {r0}")
    n = step_bound(r0, epsilon)
    lengths = exact_lengths(r0, n)
    probs = [success_probability(r) for r in lengths[:-1]]
    h = heuristic_steps(r0, epsilon)
    h_steps = max(0, math.ceil(h))
    return PurificationSchedule(
        r0=float(r0),
        epsilon=float(epsilon),
        steps=n,
        predicted_lengths=[bound_length(r0, k) for k in range(n + 1)],
        exact_lengths=lengths,
        step_success_probs=probs,
        yield_lower_bound=(r0 * epsilon) ** 3 * r0,
        expected_yield=float(np.prod(probs)) / 2**n if n else 1.0,
        heuristic_steps=h,
        heuristic_sufficient=bool(bound_length(r0, h_steps) >= 1 - epsilon),
    )


def purify_step(rho: DensityMatrix) -> tuple[float, DensityMatrix]:
    """J-measure two copies of ``rho``; return triplet probability and one survivor."""
    if rho.n_qubits != 1:
        raise InvalidArgumentError("purify_step expects a single-qubit state")
    post, p = postselect_j(tensor([rho, rho]), QubitPair(0, 1), JOutcome.J1)
    return p, partial_trace(post, [0])


@dataclass
class PurifyResult:
    """Outcome of purifying a supply: ``survivors`` copies of ``state``."""

    state: DensityMatrix
    survivors: int
    initial: int
    steps: int
    lengths: list[float] = field(default_factory=list)
    step_probabilities: list[float] = field(default_factory=list)
    counts: list[int] = field(default_factory=list)
    schedule: PurificationSchedule | None = None

    @property
    def fraction(self) -> float:
        return self.survivors / self.initial if self.initial else 0.0

    @property
    def bloch(self) -> BlochVector:
        return bloch_from_density(self.state)

    def as_dict(self) -> dict:
        return {
            "initial": self.initial,
            "survivors": self.survivors,
            "steps": self.steps,
            "fraction": self.fraction,
            "lengths": list(self.lengths),
            "step_probabilities": list(self.step_probabilities),
            "counts": list(self.counts),
        }


def purify(supply: SupplySpec, epsilon: float, rng) -> PurifyResult:
    """Purify ``supply`` until every survivor has Bloch length >= 1 - epsilon.

    Each round pairs up the current stock, J-measures every pair and keeps one
    qubit from each triplet pair, discarding its partner.  All qubits in a
    round share the same exact single-qubit state (computed once on density
    matrices), so only the number of successful pairs is sampled.
    """
    r0 = supply.bloch.length
    schedule = purification_schedule(r0, epsilon)
    rho = density_from_bloch(supply.bloch)
    count = supply.count_available
    res = PurifyResult(state=rho, survivors=count, initial=count, steps=0,
                       lengths=[r0], counts=[count], schedule=schedule)
    if count == 0:
        raise InsufficientSupplyError("empty supply", res.as_dict())
    r = r0
    for _ in range(schedule.steps):
        if r >= 1 - epsilon:
            break
        pairs = count // 2
        p, rho = purify_step(rho)
        count = int(rng.binomial(pairs, p)) if pairs else 0
        r = bloch_from_density(rho).length
        res.steps += 1
        res.lengths.append(r)
        res.step_probabilities.append(p)
        res.counts.append(count)
        res.state, res.survivors = rho, count
        if count == 0:
            raise InsufficientSupplyError(
                f"supply of {supply.count_available} exhausted after {res.steps} rounds",
                res.as_dict(),
            )
    return res
