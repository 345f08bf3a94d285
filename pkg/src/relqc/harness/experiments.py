"""The experiments behind the CLI subcommands.

Each experiment takes an :class:`ExperimentConfig` and returns an
:class:`ExperimentReport`.  Exact mode works with postselected probability
chains and never samples; sample mode runs Monte-Carlo trials, trial ``i``
drawing from stream ``(seed, i)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..cluster.fusion import FusionTag, fuse, fusion_branch_probabilities
from ..cluster.growth import BRANCH_PROBS, BRANCHES, GrowthPolicy, grow_abstract, validate_abstract_vs_exact
from ..cluster.state import ClusterState
from ..core import (
    BlochVector,
    StateVector,
    apply_collective_unitary,
    bell_state,
    bloch_from_density,
    density_from_bloch,
    fidelity,
    ghz_state,
    haar_unitary,
    ket,
    random_density,
    random_state_vector,
)
from ..errors import ConfigError, RelqcError
from ..jmeasure import JOutcome, j_outcome_probabilities, postselect_j
from ..protocols.entangle import BELL_RECIPES, GHZ_BASE_PAIRS, ghz4_input, make_bell, make_ghz
from ..protocols.programmable import PHI, programmable_measurement, programmable_measurement_exact
from ..protocols.purification import (
    SupplySpec,
    bound_length,
    next_length,
    purify,
    purify_step,
    step_bound,
    success_probability,
)
from ..rng import DEFAULT_SEED, stream
from .report import ExperimentReport, Row

EXACT_TOL = 1e-12
STATE_TOL = 1e-10
K_SIGMA = 4.0

# name -> (default parameters, default trials, default mode)
EXPERIMENTS: dict[str, tuple[dict, int, str]] = {
    "purify_curve": ({"r0": 0.3, "epsilon": 1e-2, "steps": 0}, 10**6, "exact"),
    "progmeas_error": ({"n_max": 4}, 2000, "exact"),
    "fusion_stats": ({"a": 2, "b": 2}, 10**4, "exact"),
    "growth_scaling": ({"m": [1, 2, 3], "targets": [4, 8, 16], "threshold": 2, "ghz_size": 4}, 10**4, "sample"),
    "bell_ghz_verify": ({"ghz_max": 6}, 2000, "exact"),
    "rotation_robustness": ({"n_min": 2, "n_max": 4}, 1000, "exact"),
}
MODES = ("exact", "sample")


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int = DEFAULT_SEED
    trials: int | None = None
    parameters: dict = field(default_factory=dict)
    output_path: str | None = None
    mode: str | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {sorted(EXPERIMENTS)}")
        defaults, trials, mode = EXPERIMENTS[self.experiment]
        if not isinstance(self.seed, (int, np.integer)) or isinstance(self.seed, bool) or not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit non-negative integer")
        self.seed = int(self.seed)
        self.trials = trials if self.trials is None else self.trials
        if not isinstance(self.trials, (int, np.integer)) or self.trials < 1:
            raise ConfigError("trials must be an integer >= 1")
        self.trials = int(self.trials)
        self.mode = mode if self.mode is None else self.mode
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        unknown = set(self.parameters) - set(defaults)
        if unknown:
            raise ConfigError(f"unknown parameters for {self.experiment}: {sorted(unknown)}")
        merged = dict(defaults)
        for k, v in self.parameters.items():
            merged[k] = coerce(v, defaults[k], k)
        self.parameters = merged

    def as_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "seed": self.seed,
            "trials": self.trials,
            "mode": self.mode,
            "parameters": dict(sorted(self.parameters.items())),
        }


def coerce(value, default, name: str):
    """Convert a (possibly string) parameter value to the type of its default."""
    try:
        if isinstance(default, list):
            if isinstance(value, str):
                value = [s for s in value.split(",") if s.strip()]
            elif not isinstance(value, (list, tuple)):
                value = [value]
            return [coerce(v, default[0], name) for v in value]
        if isinstance(default, bool):
            if isinstance(value, str):
                return value.lower() in ("1", "true", "yes")
            return bool(value)
        if isinstance(default, int):
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        if isinstance(default, float):
            v = float(value)
            if not math.isfinite(v):
                raise ValueError
            return v
    except (TypeError, ValueError):
        raise ConfigError(f"parameter {name}={value!r} is not a valid {type(default).__name__}") from None
    return value


def _need(cond: bool, msg: str):
    if not cond:
        raise ConfigError(msg)


def binomial_rows(name, counts, total, probs, keys=None, k_sigma=K_SIGMA, labels=BRANCHES):
    rows = []
    for label, c, p in zip(labels, counts, probs):
        sd = math.sqrt(p * (1 - p) / total) if total else math.inf
        rows.append(Row(f"{name}_{label}", p, c / total if total else math.nan, k_sigma * sd,
                        keys=dict(keys or {})))
    return rows


# --- purification ---------------------------------------------------------

def purify_curve(cfg: ExperimentConfig) -> ExperimentReport:
    r0, eps, steps = cfg.parameters["r0"], cfg.parameters["epsilon"], cfg.parameters["steps"]
    _need(0 < r0 < 1, "r0 must lie in (0, 1)")
    _need(0 < eps < 1, "epsilon must lie in (0, 1)")
    _need(steps >= 0, "steps must be >= 0")
    n = step_bound(r0, eps)
    steps = steps or n
    rows: list[Row] = []
    summary: dict = {"step_bound": n}
    if cfg.mode == "exact":
        rho = density_from_bloch(BlochVector(0.0, 0.0, r0))
        r_pred = r0
        for k in range(steps + 1):
            r_sim = bloch_from_density(rho).length
            R = bound_length(r0, k)
            rows.append(Row("r_k", r_pred, r_sim, EXACT_TOL, keys={"k": k}))
            rows.append(Row("r_k_over_R_k", R, r_sim, EXACT_TOL, "ge", keys={"k": k}))
            if k < steps:
                p, rho = purify_step(rho)
                rows.append(Row("P_r_k", success_probability(r_pred), p, EXACT_TOL, keys={"k": k}))
                r_pred = next_length(r_pred)
        rows.append(Row("R_at_step_bound", 1 - eps, bound_length(r0, n), EXACT_TOL, "ge", keys={"k": n}))
        summary["final_length"] = r_pred
    else:
        supply = SupplySpec(BlochVector(0.0, 0.0, r0), cfg.trials)
        res = purify(supply, eps, stream(cfg.seed, 0))
        for k, p in enumerate(res.step_probabilities):
            pairs = res.counts[k] // 2
            rows += binomial_rows("pair_success", [res.counts[k + 1]], pairs, [p], keys={"k": k}, labels=["rate"])
        eta = res.schedule.yield_lower_bound
        se = math.sqrt(res.fraction * (1 - res.fraction) / res.initial)
        rows.append(Row("surviving_fraction", eta, res.fraction, 3 * se, "ge", keys={"k": res.steps}))
        summary.update(res.as_dict())
        summary["yield_lower_bound"] = eta
    return ExperimentReport(cfg.as_dict(), rows, summary)


# --- programmable measurement ---------------------------------------------

def remote_collapse_input(rng) -> tuple[StateVector, np.ndarray, np.ndarray]:
    """(|phi>|a> + |phi_perp>|b>)/sqrt2 on (measured, partner) with random phi, a, b."""
    phi = random_state_vector(1, rng).amplitudes
    perp = np.array([-np.conj(phi[1]), np.conj(phi[0])])
    a = random_state_vector(1, rng).amplitudes
    b = random_state_vector(1, rng).amplitudes
    return StateVector((np.kron(a, phi) + np.kron(b, perp)) / np.sqrt(2)), phi, a


def progmeas_error(cfg: ExperimentConfig) -> ExperimentReport:
    n_max = cfg.parameters["n_max"]
    _need(1 <= n_max <= 4, "n_max must lie in 1..4 (at most 16 qubits)")
    rows: list[Row] = []
    for n in range(1, n_max + 1):
        keys = {"n": n}
        if cfg.mode == "exact":
            err = programmable_measurement_exact(ket("1"), 0, ket("0"), n).p_phi
            rows.append(Row("error_probability", 2.0**-n, err, EXACT_TOL, keys=keys))
            ok = programmable_measurement_exact(ket("0"), 0, ket("0"), n).p_phi_perp
            rows.append(Row("phi_input_error", 0.0, ok, EXACT_TOL, keys=keys))
            psi, phi, a = remote_collapse_input(stream(cfg.seed, n))
            res = programmable_measurement_exact(psi, 0, phi, n, keep=[1])
            rows.append(Row("remote_collapse_fidelity", 1 - 2.0**-n, fidelity(res.rho_phi, StateVector(a)),
                            EXACT_TOL, "ge", keys=keys))
        else:
            wrong = 0
            for i in range(cfg.trials):
                res = programmable_measurement(ket("1"), 0, ket("0"), n, stream(cfg.seed, n * cfg.trials + i))
                wrong += res.declared == PHI
            rows += binomial_rows("error_frequency", [wrong], cfg.trials, [2.0**-n], keys=keys, labels=["perp"])
    return ExperimentReport(cfg.as_dict(), rows, {})


# --- fusion ---------------------------------------------------------------

def fusion_pair(a: int, b: int) -> tuple[ClusterState, ClusterState]:
    """Two-logical clusters whose fused encodings carry ``a`` and ``b`` qubits."""
    return ClusterState.ideal(2, {(0, 1)}, [2, a]), ClusterState.ideal(2, {(0, 1)}, [b, 2])


FUSION_TAGS = (FusionTag.FUSED_J0, FusionTag.FUSED_J1, FusionTag.FAILURE)


def fusion_stats(cfg: ExperimentConfig, probs=BRANCH_PROBS) -> ExperimentReport:
    a, b = cfg.parameters["a"], cfg.parameters["b"]
    _need(1 <= a <= 4 and 1 <= b <= 4, "a and b must lie in 1..4")
    A, B = fusion_pair(a, b)
    keys = {"a": a, "b": b}
    if cfg.mode == "exact":
        exact = fusion_branch_probabilities(A, 1, B, 0)
        rows = [Row(f"probability_{name}", p, exact[tag], EXACT_TOL, keys=keys)
                for name, tag, p in zip(BRANCHES, FUSION_TAGS, probs)]
        return ExperimentReport(cfg.as_dict(), rows, {})
    counts = dict.fromkeys(FUSION_TAGS, 0)
    worst = 1.0
    for i in range(cfg.trials):
        out = fuse(A, 1, B, 0, stream(cfg.seed, i))
        counts[out.tag] += 1
        for c in out.clusters:
            if c is not None:
                worst = min(worst, c.consistency())
    rows = binomial_rows("frequency", [counts[t] for t in FUSION_TAGS], cfg.trials, probs, keys=keys)
    rows.append(Row("min_post_state_consistency", 1.0, worst, STATE_TOL, keys=keys))
    summary = {"counts": {t.value: c for t, c in counts.items()}}
    return ExperimentReport(cfg.as_dict(), rows, summary)


# --- growth ---------------------------------------------------------------

def growth_scaling(cfg: ExperimentConfig, probs=BRANCH_PROBS) -> ExperimentReport:
    p = cfg.parameters
    _need(all(m >= 1 for m in p["m"]), "m values must be >= 1")
    _need(all(t >= 2 for t in p["targets"]), "targets must be >= 2")
    _need(p["threshold"] >= 0 and p["ghz_size"] >= 2, "threshold >= 0 and ghz_size >= 2 required")
    policy = GrowthPolicy(threshold=p["threshold"], ghz_size=p["ghz_size"])
    rows: list[Row] = []
    summary: dict = {}
    idx = 0
    for m in p["m"]:
        for target in p["targets"]:
            keys = {"m": m, "size": target}
            stats = grow_abstract(target, m, policy, int(stream(cfg.seed, idx).integers(0, 2**63)),
                                  cfg.trials, probs)
            idx += 1
            total = sum(stats.branch_counts.values())
            rows += binomial_rows("walker_frequency", [stats.branch_counts[n] for n in BRANCHES], total,
                                  BRANCH_PROBS, keys=keys)
            summary[f"m={m},target={target}"] = stats.as_dict()
            if cfg.mode == "exact" and m <= 3 and target <= 4:
                rep = validate_abstract_vs_exact(m, target, cfg.trials, int(stream(cfg.seed, idx).integers(0, 2**63)),
                                                 policy, K_SIGMA, probs)
                idx += 1
                rows += [Row(r.quantity, r.target, r.observed, r.tolerance, keys=keys) for r in rep.rows]
                summary[f"exact:m={m},target={target}"] = rep.exact.as_dict()
    return ExperimentReport(cfg.as_dict(), rows, summary)


# --- Bell and GHZ ---------------------------------------------------------

def ghz4_branch() -> tuple[float, StateVector]:
    state, prob = ghz4_input(), 1.0
    for pair in GHZ_BASE_PAIRS:
        state, p = postselect_j(state, pair, JOutcome.J1)
        prob *= p
    return prob, state


def bell_ghz_verify(cfg: ExperimentConfig, herald_prob: float = 0.5) -> ExperimentReport:
    ghz_max = cfg.parameters["ghz_max"]
    _need(2 <= ghz_max <= 8, "ghz_max must lie in 2..8")
    rows: list[Row] = []
    if cfg.mode == "exact":
        for kind, (label, want) in BELL_RECIPES.items():
            keys = {"state": kind.value}
            post, p = postselect_j(ket(label), (0, 1), want)
            rows.append(Row("branch_probability", herald_prob, p, EXACT_TOL, keys=keys))
            rows.append(Row("fidelity", 1.0, fidelity(post, bell_state(kind.value)), STATE_TOL, keys=keys))
        p, g = ghz4_branch()
        rows.append(Row("branch_probability", herald_prob, p, EXACT_TOL, keys={"state": "ghz4"}))
        rows.append(Row("fidelity", 1.0, fidelity(g, ghz_state(4, -1)), STATE_TOL, keys={"state": "ghz4"}))
        for n in range(2, ghz_max + 1):
            res = make_ghz(n, stream(cfg.seed, n))
            rows.append(Row("fidelity", 1.0, fidelity(res.state, ghz_state(n, res.sign)), STATE_TOL,
                            keys={"state": f"ghz{n}_fused"}))
        return ExperimentReport(cfg.as_dict(), rows, {})
    for j, kind in enumerate(BELL_RECIPES):
        first, worst = 0, 1.0
        for i in range(cfg.trials):
            res = make_bell(kind, stream(cfg.seed, j * cfg.trials + i))
            first += res.attempts == 1
            worst = min(worst, fidelity(res.state, bell_state(kind.value)))
        keys = {"state": kind.value}
        rows += binomial_rows("first_attempt_frequency", [first], cfg.trials, [herald_prob], keys=keys,
                              labels=["herald"])
        rows.append(Row("min_fidelity", 1.0, worst, STATE_TOL, keys=keys))
    return ExperimentReport(cfg.as_dict(), rows, {})


# --- rotational invariance ------------------------------------------------

def rotation_trial(rng, n: int) -> tuple[float, float]:
    """Largest probability shift and post-state mismatch under one random U^{(x)n}."""
    state = random_state_vector(n, rng) if rng.random() < 0.5 else random_density(n, rng)
    i, j = (int(x) for x in rng.choice(n, size=2, replace=False))
    u = haar_unitary(rng)
    rotated = apply_collective_unitary(state, u)
    p = j_outcome_probabilities(state, (i, j))
    q = j_outcome_probabilities(rotated, (i, j))
    dp = max(abs(p[0] - q[0]), abs(p[1] - q[1]))
    ds = 0.0
    for want in (JOutcome.J0, JOutcome.J1):
        if min(p[want], q[want]) < 1e-9:
            continue
        a, _ = postselect_j(state, (i, j), want)
        b, _ = postselect_j(rotated, (i, j), want)
        ds = max(ds, 1 - fidelity(apply_collective_unitary(a, u), b))
    return dp, ds


def rotation_robustness(cfg: ExperimentConfig) -> ExperimentReport:
    lo, hi = cfg.parameters["n_min"], cfg.parameters["n_max"]
    _need(2 <= lo <= hi <= 8, "need 2 <= n_min <= n_max <= 8")
    worst = {n: [0.0, 0.0, 0] for n in range(lo, hi + 1)}
    for t in range(cfg.trials):
        rng = stream(cfg.seed, t)
        n = int(rng.integers(lo, hi + 1))
        dp, ds = rotation_trial(rng, n)
        w = worst[n]
        w[0], w[1], w[2] = max(w[0], dp), max(w[1], ds), w[2] + 1
    rows = []
    for n, (dp, ds, count) in worst.items():
        keys = {"n": n, "samples": count}
        rows.append(Row("max_probability_shift", 0.0, dp, STATE_TOL, keys=keys))
        rows.append(Row("max_post_state_infidelity", 0.0, ds, STATE_TOL, keys=keys))
    return ExperimentReport(cfg.as_dict(), rows, {})


RUNNERS = {
    "purify_curve": purify_curve,
    "progmeas_error": progmeas_error,
    "fusion_stats": fusion_stats,
    "growth_scaling": growth_scaling,
    "bell_ghz_verify": bell_ghz_verify,
    "rotation_robustness": rotation_robustness,
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Run ``cfg`` and write ``<experiment>.csv`` / ``.json`` if ``output_path`` is set."""
    try:
        report = RUNNERS[cfg.experiment](cfg)
    except ConfigError:
        raise
    except RelqcError as e:
        raise ConfigError(f"{cfg.experiment}: {e}") from e
    if cfg.output_path:
        report.write(cfg.output_path, cfg.experiment)
    return report
