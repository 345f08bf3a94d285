"""Runs every acceptance criterion once and prints one PASS/FAIL line each."""
import time

import pytest

from relqc.harness.criteria import CRITERIA, verify_all
from relqc.rng import DEFAULT_SEED

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def outcome():
    timings = {}
    last = [time.perf_counter()]

    def on_result(res):
        now = time.perf_counter()
        timings[res.number] = now - last[0]
        last[0] = now
        print(res.line(), flush=True)

    report = verify_all(DEFAULT_SEED, on_result=on_result)
    return {r.number: r for r in report.results}, timings


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(outcome, number, capsys):
    results, timings = outcome
    res = results[number]
    name, budget = CRITERIA[number]
    with capsys.disabled():
        print(f"\n{res.line()} ({timings[number]:.1f}s)")
    assert res.passed, res.line()
    if budget is not None:
        assert timings[number] <= budget, f"{name} took {timings[number]:.1f}s, budget {budget}s"
