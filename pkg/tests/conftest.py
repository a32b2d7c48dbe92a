import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from jagmodel.graph import Affiliation, Graph

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def affiliations(draw, max_nodes=12, max_communities=6, min_nodes=2, min_communities=1):
    n = draw(st.integers(min_nodes, max_nodes))
    k = draw(st.integers(min_communities, max_communities))
    cells = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, k - 1)), max_size=n * k))
    return Affiliation(n, k, cells)


@st.composite
def graphs_with_affiliations(draw, max_nodes=12, max_communities=5):
    a = draw(affiliations(max_nodes=max_nodes, max_communities=max_communities))
    n = a.node_count
    edges = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=3 * n))
    return Graph(n, edges), a


def motivating_example() -> Affiliation:
    """v1 in C1..C5, v2 in {C1, C6}, v3 in {C1, C7} (communities 0-indexed)."""
    return Affiliation.from_communities(3, [[0, 1, 2], [0], [0], [0], [0], [1], [2]])


@pytest.fixture
def example_affiliation():
    return motivating_example()


def random_instance(rng: np.random.Generator, n: int, k: int, p_member=0.3, p_edge=0.2):
    m = rng.random((n, k)) < p_member
    a = Affiliation(n, k, zip(*np.nonzero(m)))
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < p_edge
    return Graph(n, np.stack([iu[keep], ju[keep]], axis=1)), a


_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line per acceptance criterion."""
    lines = request.config.stash.setdefault(_ACCEPTANCE_KEY, [])

    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
