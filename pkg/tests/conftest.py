import math

import numpy as np
import pytest
from hypothesis import settings, strategies as st

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile("default")


@st.composite
def distributions(draw, m=None, min_m=2, max_m=8, allow_zeros=True):
    """Probability vectors, including exact ties and zero entries."""
    if m is None:
        m = draw(st.integers(min_m, max_m))
    lo = 0 if allow_zeros else 1
    weights = draw(st.lists(st.integers(lo, 20), min_size=m, max_size=m).filter(lambda w: sum(w) > 0))
    total = sum(weights)
    return [w / total for w in weights]


@st.composite
def pairs(draw, min_m=2, max_m=8, allow_zeros=True):
    m = draw(st.integers(min_m, max_m))
    return (
        draw(distributions(m=m, allow_zeros=allow_zeros)),
        draw(distributions(m=m, allow_zeros=allow_zeros)),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


def close(a, b, tol=1e-12):
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= tol


# acceptance results: (criterion number, passed, detail), filled by test_acceptance
ACCEPTANCE: list = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
