import itertools

import networkx as nx
import numpy as np
import pytest

from robsd.model import Graph, Instance, ScenarioSet

_acceptance_lines: list[str] = []


@pytest.fixture
def report():
    """Record a one-line PASS/FAIL verdict for an acceptance criterion, then assert it."""

    def _report(number, title, ok, detail=""):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}"
        if detail:
            line += f"  ({detail})"
        _acceptance_lines.append(line)
        print(line)
        assert ok, line

    return _report


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


def random_instance(kind, nodes, m, beta, rng, nonneg=False):
    g = Graph.complete(nodes)
    nominal = rng.uniform(1, 2, g.n)
    u = rng.normal(size=(m, g.n))
    if nonneg:
        u = np.abs(u)
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    return Instance("rand", kind, ScenarioSet(nominal + beta * u), g)


def brute_spanning_trees(graph: Graph) -> np.ndarray:
    """Incidence vectors of all spanning trees, found with networkx (independent of check_vertex)."""
    out = []
    for combo in itertools.combinations(range(graph.n), graph.node_count - 1):
        h = nx.Graph()
        h.add_nodes_from(range(graph.node_count))
        h.add_edges_from(graph.edges[i] for i in combo)
        if nx.is_tree(h):
            x = np.zeros(graph.n, dtype=np.int8)
            x[list(combo)] = 1
            out.append(x)
    return np.array(out)


def brute_tours(graph: Graph) -> np.ndarray:
    """Incidence vectors of all Hamiltonian cycles of a complete graph, deduplicated as sets."""
    index = {e: i for i, e in enumerate(graph.edges)}
    seen = set()
    out = []
    for perm in itertools.permutations(range(graph.node_count)):
        x = np.zeros(graph.n, dtype=np.int8)
        for a, b in zip(perm, perm[1:] + perm[:1]):
            x[index[(min(a, b), max(a, b))]] = 1
        if x.tobytes() not in seen:
            seen.add(x.tobytes())
            out.append(x)
    return np.array(out)


def master_certificate_failures(V, ms, rng, points=100):
    """List of violated master optimality certificates (empty when all hold)."""
    from robsd.model import evaluate_f

    U = V.scenarios
    fails = []
    if abs(ms.alpha.sum() - 1) > 1e-8 or ms.alpha.min() < -1e-10:
        fails.append("alpha normalisation")
    if abs(ms.lam.sum() - 1) > 1e-8 or ms.lam.min() < -1e-10:
        fails.append("lambda normalisation")
    fx = evaluate_f(ms.x, U)[0]
    if abs(ms.z - fx) > 1e-7:
        fails.append(f"z {ms.z} != f(x) {fx}")
    rows = U.values(ms.x)
    if np.any((ms.lam > 1e-7) & (rows < ms.z - 1e-6)):
        fails.append("complementary slackness")
    M = V.matrix()
    if np.any((M - ms.x) @ ms.subgradient < -1e-6):
        fails.append("normal cone")
    for y in rng.uniform(0, 1, (points, U.n)):
        if evaluate_f(y, U)[0] < ms.z + ms.subgradient @ (y - ms.x) - 1e-6:
            fails.append("subgradient inequality")
            break
    for w in rng.dirichlet(np.ones(len(V)), points):
        if evaluate_f(w @ M, U)[0] < ms.z - 1e-6:
            fails.append("minimality over the simplex")
            break
    return fails


def random_master_case(rng):
    n = int(rng.integers(2, 12))
    m = int(rng.integers(1, 51))
    k = int(rng.integers(1, 31))
    U = ScenarioSet(rng.normal(size=(m, n)), rng.normal(size=m))
    from robsd.master import ActiveSet

    V = ActiveSet(U, rng.integers(0, 2, (k, n)))
    return V
