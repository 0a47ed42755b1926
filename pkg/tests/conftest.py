import numpy as np
import pytest
from hypothesis import strategies as st

from catforge import generate_item_bank


@st.composite
def items(draw, max_c=0.4):
    a = draw(st.floats(0.2, 3.0))
    b = draw(st.floats(-3.0, 3.0))
    c = draw(st.floats(0.0, max_c))
    d = draw(st.floats(max(c + 0.05, 0.55), 1.0))
    return (a, b, c, d)


def random_items(rng, n, model="4PL"):
    a = rng.uniform(0.3, 2.5, n)
    b = rng.uniform(-3, 3, n)
    c = rng.uniform(0, 0.35, n) if model in ("3PL", "4PL") else np.zeros(n)
    d = rng.uniform(0.85, 1.0, n) if model == "4PL" else np.ones(n)
    return np.column_stack([a, b, c, d])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def bank100():
    return generate_item_bank(100, "4PL", seed=11)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if getattr(rep, "when", "call") != "call" and outcome != "error":
                continue
            if "test_acceptance.py" in rep.nodeid:
                name = rep.nodeid.split("::")[-1]
                lines.append((name, "PASS" if outcome == "passed" else "FAIL"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, status in sorted(lines):
            terminalreporter.write_line(f"{status}  {name}")
