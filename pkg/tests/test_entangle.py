import math

import numpy as np
import pytest

from relqc.core import bell_state, fidelity, ghz_state, ket
from relqc.errors import InvalidArgumentError, RetryLimitError
from relqc.jmeasure import JOutcome, postselect_j
from relqc.protocols.entangle import (
    BELL_RECIPES,
    GHZ_BASE_PAIRS,
    BellKind,
    GhzResource,
    ghz4_input,
    make_bell,
    make_ghz,
)


@pytest.mark.parametrize("kind", list(BellKind))
def test_bell_recipe_branch(kind):
    spec, want = BELL_RECIPES[kind]
    post, p = postselect_j(ket(spec), (0, 1), want)
    assert math.isclose(p, 0.5, abs_tol=1e-12)
    assert abs(fidelity(post, bell_state(kind.value)) - 1) < 1e-10


def test_recipe_table():
    assert BELL_RECIPES[BellKind.PSI_MINUS] == ("01", JOutcome.J0)
    assert BELL_RECIPES[BellKind.PHI_MINUS] == ("+-", JOutcome.J1)
    assert BELL_RECIPES[BellKind.PHI_PLUS] == ("ij", JOutcome.J1)


@pytest.mark.parametrize("kind", list(BellKind))
def test_make_bell_sampled(kind, rng):
    attempts = []
    for _ in range(300):
        res = make_bell(kind, rng)
        assert abs(fidelity(res.state, bell_state(kind.value)) - 1) < 1e-10
        attempts.append(res.attempts)
    assert abs(np.mean(attempts) - 2) < 0.4


def test_make_bell_retry_cap():
    class Unlucky:
        def random(self):
            return 0.0 if self.flip else 0.99

        flip = True

    with pytest.raises(RetryLimitError):
        make_bell("psi_plus", Unlucky(), max_attempts=5)


def test_ghz4_branch():
    s, prob = ghz4_input(), 1.0
    for pair in GHZ_BASE_PAIRS:
        s, p = postselect_j(s, pair, JOutcome.J1)
        prob *= p
    assert math.isclose(prob, 0.5, abs_tol=1e-12)
    assert abs(fidelity(s, ghz_state(4, -1)) - 1) < 1e-10


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_make_ghz(n, rng):
    res = make_ghz(n, rng)
    assert res.n_qubits == n and res.attempts >= 1
    assert abs(fidelity(res.state, ghz_state(n, res.sign)) - 1) < 1e-10


def test_ghz2_is_bell(rng):
    res = make_ghz(2, rng)
    assert abs(fidelity(res.state, bell_state("phi_plus")) - 1) < 1e-10


def test_ghz_errors(rng):
    with pytest.raises(InvalidArgumentError):
        make_ghz(1, rng)
    with pytest.raises(InvalidArgumentError):
        GhzResource(2, 0, ghz_state(2))
