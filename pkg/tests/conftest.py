import numpy as np
import pytest

from signed_mbo import SignedGraph


def random_signed_graph(v, density, rng, weight_scale=1.0):
    """Erdos-Renyi support with standard normal weights; may contain isolated nodes."""
    rows, cols = np.triu_indices(v, k=1)
    keep = rng.random(rows.size) < density
    w = rng.standard_normal(keep.sum()) * weight_scale
    nz = w != 0
    return SignedGraph(v, rows[keep][nz], cols[keep][nz], w[nz])


def connected_signed_graph(v, density, rng):
    """Random signed graph with a path added so that no node is isolated."""
    g = random_signed_graph(v, density, rng)
    a = g.adjacency().tolil()
    for i in range(v - 1):
        if a[i, i + 1] == 0:
            a[i, i + 1] = a[i + 1, i] = rng.choice([-1.0, 1.0]) * (0.5 + rng.random())
    return SignedGraph.from_matrix(a.tocsr())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = {}


def record_acceptance(number, passed, detail):
    """Store the one-line verdict for a numbered acceptance criterion."""
    line = f"ACCEPTANCE {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
