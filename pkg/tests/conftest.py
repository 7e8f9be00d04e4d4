import os
import random
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from spanlift.dist import Kernel, SubDist

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def bern(p) -> SubDist:
    return SubDist({True: p, False: 1 - p})


def random_dist(rng: random.Random, outcomes, full: bool = True, zeros: bool = True) -> SubDist:
    """Random distribution over a subset of ``outcomes``; ``full`` means mass 1."""
    ws = [rng.random() if (not zeros or rng.random() > 0.25) else 0.0 for _ in outcomes]
    if sum(ws) == 0:
        ws[rng.randrange(len(ws))] = 1.0
    s = sum(ws)
    scale = 1.0 if full else rng.uniform(0.3, 1.0)
    return SubDist({x: scale * w / s for x, w in zip(outcomes, ws) if w > 0})


def random_kernel(rng: random.Random, domain, codomain, full: bool = True) -> Kernel:
    return Kernel({x: random_dist(rng, codomain, full) for x in domain})


@st.composite
def subdists(draw, n_max=6, full=True, positive=False):
    n = draw(st.integers(1, n_max))
    lo = 0.01 if positive else 0.0
    ws = draw(st.lists(st.floats(lo, 1.0), min_size=n, max_size=n))
    if sum(ws) == 0:
        ws[0] = 1.0
    s = sum(ws)
    scale = 1.0 if full else draw(st.floats(0.1, 1.0))
    return SubDist({k: scale * w / s for k, w in enumerate(ws) if w > 0})


@pytest.fixture
def rng():
    return random.Random(20261016)


@pytest.fixture
def half():
    return Fraction(1, 2)


_ACCEPTANCE: list = []


@pytest.fixture
def acceptance_lines():
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
