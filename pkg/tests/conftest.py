from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from mastruct.exterior import EXACT, Form, monomials

settings.register_profile(
    "repo", max_examples=40, deadline=None, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")

small_fraction = st.builds(
    Fraction, st.integers(-6, 6), st.integers(1, 4)
)


@st.composite
def exact_forms(draw, degree=None):
    k = draw(st.integers(0, 6)) if degree is None else degree
    mons = monomials(k)
    picked = draw(st.lists(st.sampled_from(mons), unique=True, max_size=min(len(mons), 8)))
    terms = {m: draw(small_fraction) for m in picked}
    return Form(k, terms, EXACT)


seeds = st.integers(0, 2**31 - 1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def acceptance():
    def record(n: int, passed: bool, detail: str):
        ACCEPTANCE[n] = (passed, detail)
        print(f"criterion {n}: {'PASS' if passed else 'FAIL'} | {detail}")
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if passed else 'FAIL'} | {detail}")
