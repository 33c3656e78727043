import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from specrewire import Graph, figure1_fixtures

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def dense_laplacian(g):
    """Independent oracle: I - D^-1/2 A D^-1/2 built from the edge list."""
    n = g.num_nodes
    A = np.zeros((n, n))
    for u, v in g.edges:
        A[u, v] = A[v, u] = 1.0
    d = A.sum(axis=1)
    s = 1.0 / np.sqrt(d)
    return np.eye(n) - s[:, None] * A * s[None, :]


def oracle_gap(g):
    return float(np.linalg.eigvalsh(dense_laplacian(g))[1])


@st.composite
def connected_graphs(draw, min_nodes=3, max_nodes=12):
    n = draw(st.integers(min_nodes, max_nodes))
    edges = set()
    for v in range(1, n):
        u = draw(st.integers(0, v - 1))
        edges.add((u, v))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n) if (u, v) not in edges]
    extra = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs))) if pairs else []
    return Graph(n, sorted(edges | set(extra)))


@pytest.fixture(scope="session")
def fig1():
    return figure1_fixtures()


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(mod.RESULTS, key=int):
        terminalreporter.write_line(mod.RESULTS[key])
