import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("relqc", max_examples=40, deadline=None)
settings.load_profile("relqc")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def bruteforce_partial_trace(vec, n, keep):
    """Loop-over-indices oracle for the reduced density matrix (little-endian)."""
    keep = sorted(keep)
    trace_out = [q for q in range(n) if q not in keep]
    k = len(keep)
    out = np.zeros((2**k, 2**k), dtype=complex)
    for r in range(2**k):
        for c in range(2**k):
            for env in range(2 ** len(trace_out)):
                def place(local):
                    idx = 0
                    for pos, q in enumerate(keep):
                        idx |= ((local >> pos) & 1) << q
                    for pos, q in enumerate(trace_out):
                        idx |= ((env >> pos) & 1) << q
                    return idx
                out[r, c] += vec[place(r)] * np.conj(vec[place(c)])
    return out
