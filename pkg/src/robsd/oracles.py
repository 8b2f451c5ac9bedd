"""Linear optimisation oracles: exact minimisers of ``costs @ x`` over the feasible set.

Every oracle takes optional fixings (``{index: 0 or 1}``) and returns a 0/1
``int8`` vector, or ``None`` when no feasible point respects the fixings.
"""

from __future__ import annotations

import itertools
import shlex
import subprocess
from typing import Mapping, Sequence

import numpy as np

from .model import Instance, InstanceError, Kind, check_vertex

Fixings = Mapping[int, int]

HELD_KARP_MAX_NODES = 20


class OracleError(RuntimeError):
    """An oracle failed to produce a valid answer."""


def _validate_fixings(fixings, n):
    fixings = dict(fixings or {})
    for i, val in fixings.items():
        if not 0 <= i < n:
            raise ValueError(f"fixing index {i} out of range for dimension {n}")
        if val not in (0, 1):
            raise ValueError(f"fixing value {val!r} for index {i} is not 0/1")
    return fixings


def respects(v, fixings: Fixings | None) -> bool:
    return all(int(v[i]) == val for i, val in (fixings or {}).items())


class LinearOracle:
    """Interface for the certain-problem solver ``min costs @ x, x in X``."""

    supports_fixings = True

    def __init__(self, n: int):
        self.n = n
        self.calls = 0

    def minimize(self, costs, fixings: Fixings | None = None) -> np.ndarray | None:
        costs = np.asarray(costs, dtype=float)
        if costs.shape != (self.n,):
            raise ValueError(f"cost vector of shape {costs.shape} does not match dimension {self.n}")
        if not np.all(np.isfinite(costs)):
            raise ValueError("cost vector contains non-finite entries")
        fixings = _validate_fixings(fixings, self.n)
        if fixings and not self.supports_fixings:
            raise OracleError(f"{type(self).__name__} does not support fixings")
        self.calls += 1
        return self._minimize(costs, fixings)

    def _minimize(self, costs, fixings):
        raise NotImplementedError

    def is_feasible(self, v) -> bool:
        return True


class _DisjointSets:
    def __init__(self, size):
        self.parent = list(range(size))
        self.rank = [0] * size

    def find(self, a):
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


class KruskalOracle(LinearOracle):
    """Minimum spanning tree by Kruskal's algorithm; ties broken by edge index."""

    def __init__(self, instance: Instance):
        if instance.kind is not Kind.MST:
            raise InstanceError("Kruskal oracle needs an MST instance")
        super().__init__(instance.n)
        self.instance = instance
        self.edges = instance.graph.edges
        self.node_count = instance.graph.node_count

    def _minimize(self, costs, fixings):
        dsu = _DisjointSets(self.node_count)
        x = np.zeros(self.n, dtype=np.int8)
        used = 0
        for i in sorted(i for i, val in fixings.items() if val == 1):
            if not dsu.union(*self.edges[i]):
                return None
            x[i] = 1
            used += 1
        for i in np.argsort(costs, kind="stable"):
            if used == self.node_count - 1:
                break
            if x[i] or fixings.get(int(i)) == 0:
                continue
            if dsu.union(*self.edges[i]):
                x[i] = 1
                used += 1
        if used != self.node_count - 1:
            return None
        return x

    def is_feasible(self, v):
        return check_vertex(v, self.instance)


def held_karp(dist: np.ndarray) -> tuple[float, list[int]]:
    """Optimal tour over a symmetric distance matrix; returns (length, node order from 0)."""
    nn = dist.shape[0]
    if nn < 3:
        raise ValueError("a tour needs at least 3 nodes")
    k = nn - 1  # node i+1 <-> bit i
    full = 1 << k
    dp = np.full((full, k), np.inf)
    parent = np.full((full, k), -1, dtype=np.int64)
    for j in range(k):
        dp[1 << j, j] = dist[0, j + 1]
    d = dist[1:, 1:]
    masks = np.arange(full)
    popcount = np.zeros(full, dtype=np.int64)
    for j in range(k):
        popcount += (masks >> j) & 1
    for size in range(2, k + 1):
        layer = masks[popcount == size]
        for j in range(k):
            bit = 1 << j
            sel = layer[(layer & bit) != 0]
            prev = dp[sel ^ bit] + d[:, j]
            best = np.argmin(prev, axis=1)
            dp[sel, j] = prev[np.arange(sel.size), best]
            parent[sel, j] = best
    closing = dp[full - 1] + dist[1:, 0]
    last = int(np.argmin(closing))
    length = float(closing[last])
    order = []
    mask, j = full - 1, last
    while j >= 0:
        order.append(j + 1)
        pj = int(parent[mask, j])
        mask ^= 1 << j
        j = pj
    order.append(0)
    return length, order[::-1]


class HeldKarpOracle(LinearOracle):
    """Exact symmetric TSP by dynamic programming over node subsets (up to 20 nodes).

    Fixings are handled by a uniform cost shift: forbidden edges get ``+BIG``
    and forced edges ``-BIG``.  Every tour has exactly ``|N|`` edges, so the
    shift only reorders tours by how many fixings they violate; a violated
    fixing in the optimum therefore means no tour respects them all.
    """

    def __init__(self, instance: Instance):
        if instance.kind is not Kind.TSP:
            raise InstanceError("Held-Karp oracle needs a TSP instance")
        if instance.graph.node_count > HELD_KARP_MAX_NODES:
            raise OracleError(
                f"oracle size limit: Held-Karp handles at most {HELD_KARP_MAX_NODES} nodes, "
                f"got {instance.graph.node_count}; use an external oracle")
        super().__init__(instance.n)
        self.instance = instance
        self.node_count = instance.graph.node_count
        self.edge_arr = instance.graph.edge_array()
        self.index = instance.graph.edge_index()

    def _minimize(self, costs, fixings):
        shifted = costs.copy()
        if fixings:
            big = 1.0 + max(self.n, 2 * self.node_count) * float(np.abs(costs).max(initial=0.0))
            for i, val in fixings.items():
                shifted[i] += big if val == 0 else -big
        dist = np.zeros((self.node_count, self.node_count))
        dist[self.edge_arr[:, 0], self.edge_arr[:, 1]] = shifted
        dist[self.edge_arr[:, 1], self.edge_arr[:, 0]] = shifted
        _, order = held_karp(dist)
        x = np.zeros(self.n, dtype=np.int8)
        for a, b in zip(order, order[1:] + order[:1]):
            x[self.index[(min(a, b), max(a, b))]] = 1
        if not respects(x, fixings):
            return None
        return x

    def is_feasible(self, v):
        return check_vertex(v, self.instance)


class EnumerationOracle(LinearOracle):
    """Linear scan over an explicit vertex list; ties go to the earliest vertex."""

    def __init__(self, vertices: Sequence):
        verts = np.array(vertices, dtype=np.int8, ndmin=2)
        if verts.shape[0] == 0:
            raise ValueError("enumeration oracle needs at least one vertex")
        super().__init__(verts.shape[1])
        self.vertices = verts
        self._keys = {v.tobytes() for v in verts}

    def _minimize(self, costs, fixings):
        cand = self.vertices
        if fixings:
            idx = np.fromiter(fixings.keys(), dtype=int)
            vals = np.fromiter(fixings.values(), dtype=np.int8)
            cand = cand[np.all(cand[:, idx] == vals, axis=1)]
        if cand.shape[0] == 0:
            return None
        return cand[int(np.argmin(cand @ costs))].copy()

    def is_feasible(self, v):
        return np.asarray(v, dtype=np.int8).tobytes() in self._keys


class ExternalOracle(LinearOracle):
    """Runs an external command per call and speaks a line protocol over stdin/stdout.

    Request::

        n m_fix
        c_0 c_1 ... c_{n-1}
        index value        (m_fix lines)

    Response: one line of ``n`` space-separated 0/1 values, or ``INFEASIBLE``.
    """

    def __init__(self, command, instance: Instance | None = None, n: int | None = None,
                 timeout: float | None = 60.0):
        if n is None:
            if instance is None:
                raise ValueError("need an instance or a dimension")
            n = instance.n
        super().__init__(n)
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        self.instance = instance
        self.timeout = timeout

    @staticmethod
    def format_request(costs, fixings) -> str:
        lines = [f"{len(costs)} {len(fixings)}", " ".join(repr(float(c)) for c in costs)]
        lines += [f"{i} {v}" for i, v in sorted(fixings.items())]
        return "\n".join(lines) + "\n"

    def _minimize(self, costs, fixings):
        try:
            proc = subprocess.run(self.command, input=self.format_request(costs, fixings),
                                  capture_output=True, text=True, timeout=self.timeout)
        except subprocess.TimeoutExpired:
            raise OracleError(f"external oracle timed out after {self.timeout} s") from None
        except OSError as exc:
            raise OracleError(f"cannot run external oracle: {exc}") from None
        if proc.returncode != 0:
            raise OracleError(f"external oracle exited with {proc.returncode}: {proc.stderr.strip()}")
        lines = [ln for ln in proc.stdout.splitlines() if ln.strip()]
        if len(lines) != 1:
            raise OracleError(f"protocol error: expected one response line, got {len(lines)}")
        reply = lines[0].strip()
        if reply == "INFEASIBLE":
            return None
        tokens = reply.split()
        if len(tokens) != self.n or any(t not in ("0", "1") for t in tokens):
            raise OracleError(f"protocol error: expected {self.n} values in {{0,1}}, got {reply[:80]!r}")
        x = np.array([int(t) for t in tokens], dtype=np.int8)
        if not respects(x, fixings):
            raise OracleError("protocol error: returned vertex violates a fixing")
        if not self.is_feasible(x):
            raise OracleError("protocol error: returned vertex is not feasible")
        return x

    def is_feasible(self, v):
        return self.instance is None or check_vertex(v, self.instance)


def enumerate_vertices(instance: Instance) -> np.ndarray:
    """All feasible 0/1 points of a small MST/TSP instance (or a generic one listing them)."""
    if instance.kind is Kind.GENERIC:
        if "vertices" not in instance.meta:
            raise InstanceError("generic instance lists no vertices")
        return np.array(instance.meta["vertices"], dtype=np.int8, ndmin=2)
    graph = instance.graph
    nn = graph.node_count
    index = graph.edge_index()
    out = []
    if instance.kind is Kind.MST:
        for combo in itertools.combinations(range(graph.n), nn - 1):
            x = np.zeros(graph.n, dtype=np.int8)
            x[list(combo)] = 1
            if check_vertex(x, instance):
                out.append(x)
    else:
        for perm in itertools.permutations(range(1, nn)):
            if perm[0] > perm[-1]:
                continue  # each undirected tour once
            order = (0,) + perm
            x = np.zeros(graph.n, dtype=np.int8)
            for a, b in zip(order, order[1:] + order[:1]):
                x[index[(min(a, b), max(a, b))]] = 1
            out.append(x)
    return np.array(out, dtype=np.int8).reshape(len(out), graph.n)


def mst_kruskal(instance: Instance, costs, fixings: Fixings | None = None):
    """One-shot minimum spanning tree; ``None`` when the fixings admit no tree."""
    return KruskalOracle(instance).minimize(costs, fixings)


def tsp_held_karp(instance: Instance, costs, fixings: Fixings | None = None):
    """One-shot exact tour; ``None`` when the fixings admit no tour."""
    return HeldKarpOracle(instance).minimize(costs, fixings)


def enumeration_oracle(vertices, costs, fixings: Fixings | None = None):
    return EnumerationOracle(vertices).minimize(costs, fixings)


def external_oracle(command, instance: Instance, costs, fixings: Fixings | None = None,
                    timeout: float | None = 60.0):
    return ExternalOracle(command, instance, timeout=timeout).minimize(costs, fixings)


def make_oracle(instance: Instance, spec: str = "internal", timeout: float | None = 60.0) -> LinearOracle:
    """Oracle from a CLI-style spec: ``internal`` or ``external:<command>``."""
    if spec.startswith("external:"):
        return ExternalOracle(spec[len("external:"):], instance, timeout=timeout)
    if spec != "internal":
        raise ValueError(f"unknown oracle spec {spec!r}")
    if instance.kind is Kind.MST:
        return KruskalOracle(instance)
    if instance.kind is Kind.TSP:
        return HeldKarpOracle(instance)
    return EnumerationOracle(enumerate_vertices(instance))
