"""Random-walk model of growing a linear cluster by repeated fusion.

The abstract walker keeps only counters.  A chain of ``size`` logical qubits
has an end qubit with ``end`` physical qubits.  Each step either

* refreshes the end (if the policy asks for it) by fusing a GHZ state of
  ``ghz_size`` qubits onto it, or
* fuses the end with the first qubit of a fresh two-qubit seed whose logical
  qubits each carry ``m`` physical qubits.

Fusion outcomes follow the branch probabilities ``BRANCH_PROBS`` (singlet
merge, triplet merge, failure).  A merge leaves ``end + b - 2`` physical
qubits on the merged qubit; a failure removes one from each side.  Any
logical qubit of the chain reaching zero ends the trial as a failure,
including a merge of two single-qubit ends (nothing is left to carry the
merged qubit, exactly as :func:`fuse` reports it).

:func:`validate_abstract_vs_exact` replays the same rules on state vectors
(via :func:`fuse`) and compares branch frequencies and success rates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidArgumentError
from ..rng import derive_seed, stream
from .fusion import FusionTag, fuse, remove_redundancy
from .state import ClusterState

# (singlet merge, triplet merge on opposite |+-> outcomes, failure)
BRANCH_PROBS = (0.25, 0.25, 0.5)
BRANCHES = ("j0", "j1", "failure")


@dataclass(frozen=True)
class GrowthPolicy:
    """Refresh the end qubit from a GHZ state whenever it has fewer than ``threshold`` qubits."""

    threshold: int = 2
    ghz_size: int = 4
    max_steps: int | None = None

    def steps_cap(self, target: int) -> int:
        return self.max_steps if self.max_steps is not None else 50 * target + 50


NO_REFRESH = GrowthPolicy(threshold=0)


@dataclass
class GrowthStats:
    trials: int
    mean_final_size: float
    resource_counts: dict[str, int]
    success_fraction: float
    branch_counts: dict[str, int] = field(default_factory=dict)
    successes: int = 0
    mean_resources_per_logical: dict[str, float] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "trials": self.trials,
            "successes": self.successes,
            "success_fraction": self.success_fraction,
            "mean_final_size": self.mean_final_size,
            "resource_counts": dict(sorted(self.resource_counts.items())),
            "branch_counts": dict(sorted(self.branch_counts.items())),
            "mean_resources_per_logical": dict(sorted(self.mean_resources_per_logical.items())),
        }


def _sample_branch(u: float, probs) -> int:
    if u < probs[0]:
        return 0
    if u < probs[0] + probs[1]:
        return 1
    return 2


def _walk_trial(target, m, policy, rng, probs, counts, branches):
    """One counter-level trial; returns (success, final_size)."""
    size, end, unit = 2, m, None
    counts["seed"] += 1
    for _ in range(policy.steps_cap(target)):
        if size >= target:
            return True, size
        if end < policy.threshold:
            counts["ghz"] += 1
            counts["fusion"] += 1
            br = _sample_branch(rng.random(), probs)
            branches[BRANCHES[br]] += 1
            if br < 2:
                end = end + policy.ghz_size - 2
                if end == 0:
                    return False, size
            else:
                end -= 1
                if end == 0:
                    return False, size
            continue
        if unit is None:
            counts["seed"] += 1
            unit = m
        counts["fusion"] += 1
        br = _sample_branch(rng.random(), probs)
        branches[BRANCHES[br]] += 1
        if br < 2:
            if end + unit - 2 == 0:
                counts["exhausted_merge"] += 1
                return False, size
            size += 1
            end, unit = m, None
        else:
            end -= 1
            unit -= 1
            if unit == 0:
                unit = None
            if end == 0:
                return False, size
    return size >= target, size


def _new_counts():
    return {"seed": 0, "ghz": 0, "fusion": 0, "exhausted_merge": 0}


def _summarize(trials, outcomes, counts, branches, target) -> GrowthStats:
    successes = sum(1 for ok, _ in outcomes if ok)
    added = sum(max(0, s - 2) for _, s in outcomes)
    per = {k: (v / added if added else math.inf) for k, v in counts.items() if k != "exhausted_merge"}
    return GrowthStats(
        trials=trials,
        mean_final_size=float(np.mean([s for _, s in outcomes])) if outcomes else 0.0,
        resource_counts=dict(counts),
        success_fraction=successes / trials if trials else 0.0,
        branch_counts=dict(branches),
        successes=successes,
        mean_resources_per_logical=per,
    )


def grow_abstract(target_logical_size: int, m: int, policy: GrowthPolicy | None = None, rng=None,
                  trials: int = 1000, branch_probs=BRANCH_PROBS) -> GrowthStats:
    """Monte-Carlo of the counter-level walk; trial ``i`` uses stream ``(seed, i)``."""
    if m < 1:
        raise InvalidArgumentError("initial redundancy must be >= 1")
    if target_logical_size < 2:
        raise InvalidArgumentError("target size must be >= 2")
    policy = policy or GrowthPolicy()
    seed = derive_seed(rng)
    counts = _new_counts()
    branches = dict.fromkeys(BRANCHES, 0)
    outcomes = [
        _walk_trial(target_logical_size, m, policy, stream(seed, i), branch_probs, counts, branches)
        for i in range(trials)
    ]
    return _summarize(trials, outcomes, counts, branches, target_logical_size)


def _branch_index(tag: FusionTag) -> int:
    return {FusionTag.FUSED_J0: 0, FusionTag.FUSED_J1: 1, FusionTag.FAILURE: 2}[tag]


def _exact_trial(target, m, policy, rng, counts, branches):
    """Same rules as the walker, on state vectors.

    Interior qubits are trimmed to one physical qubit after each merge (the
    walker never looks at them), which keeps registers small.
    """
    seed_cluster = lambda: ClusterState.ideal(2, {(0, 1)}, [m, m])
    ghz = lambda: ClusterState.ideal(1, set(), [policy.ghz_size])
    chain = seed_cluster()
    counts["seed"] += 1
    unit = None
    for _ in range(policy.steps_cap(target)):
        size = chain.n_logical
        if size >= target:
            return True, size
        end_q = size - 1
        if chain.redundancy(end_q) < policy.threshold:
            counts["ghz"] += 1
            counts["fusion"] += 1
            out = fuse(chain, end_q, ghz(), 0, rng)
            branches[BRANCHES[_branch_index(out.tag)]] += 1
            if out.clusters[0] is None:
                return False, size
            chain = out.clusters[0]
            continue
        if unit is None:
            counts["seed"] += 1
            unit = seed_cluster()
        counts["fusion"] += 1
        out = fuse(chain, end_q, unit, 0, rng)
        branches[BRANCHES[_branch_index(out.tag)]] += 1
        if out.success:
            if out.clusters[0] is None:
                counts["exhausted_merge"] += 1
                return False, size
            chain = out.clusters[0]
            while chain.redundancy(end_q) > 1:
                chain = remove_redundancy(chain, end_q, rng)
            unit = None
        else:
            a_side, b_side = out.clusters
            if a_side is None:
                return False, size
            chain, unit = a_side, b_side
    return chain.n_logical >= target, chain.n_logical


@dataclass
class ValidationRow:
    quantity: str
    target: float
    observed: float
    tolerance: float
    passed: bool


@dataclass
class ValidationReport:
    m: int
    target: int
    trials: int
    exact: GrowthStats
    walker: GrowthStats
    rows: list[ValidationRow]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)


def _binomial_row(name, count, n, p, k_sigma):
    obs = count / n if n else 0.0
    sd = math.sqrt(p * (1 - p) / n) if n else math.inf
    tol = k_sigma * sd
    return ValidationRow(name, p, obs, tol, abs(obs - p) <= tol)


def validate_abstract_vs_exact(m: int, target: int, trials: int, rng=None, policy: GrowthPolicy | None = None,
                               k_sigma: float = 4.0, branch_probs=BRANCH_PROBS) -> ValidationReport:
    """Compare the walker with an exact state-vector replay of the same growth rules."""
    if m > 3 or target > 4:
        raise InvalidArgumentError("exact replay is limited to m <= 3 and target <= 4")
    policy = policy or GrowthPolicy()
    seed = derive_seed(rng)

    counts = _new_counts()
    branches = dict.fromkeys(BRANCHES, 0)
    outcomes = [_exact_trial(target, m, policy, stream(seed, i), counts, branches) for i in range(trials)]
    exact = _summarize(trials, outcomes, counts, branches, target)
    walker = grow_abstract(target, m, policy, stream(seed, trials).integers(0, 2**63), trials, branch_probs)

    rows = []
    for label, stats in (("exact", exact), ("walker", walker)):
        total = sum(stats.branch_counts.values())
        for name, p in zip(BRANCHES, branch_probs if label == "walker" else BRANCH_PROBS):
            rows.append(_binomial_row(f"{label}_{name}_freq", stats.branch_counts[name], total, p, k_sigma))
    te, tw = sum(exact.branch_counts.values()), sum(walker.branch_counts.values())
    for name in BRANCHES:
        pe, pw = exact.branch_counts[name] / te, walker.branch_counts[name] / tw
        se = math.sqrt(pe * (1 - pe) / te + pw * (1 - pw) / tw)
        rows.append(ValidationRow(f"{name}_freq_diff", 0.0, pe - pw, k_sigma * se, abs(pe - pw) <= k_sigma * se))
    fe, fw = exact.success_fraction, walker.success_fraction
    se = math.sqrt(fe * (1 - fe) / trials + fw * (1 - fw) / trials)
    tol = k_sigma * se if se > 0 else 1e-12
    rows.append(ValidationRow("success_fraction_diff", 0.0, fe - fw, tol, abs(fe - fw) <= tol))
    return ValidationReport(m, target, trials, exact, walker, rows)
