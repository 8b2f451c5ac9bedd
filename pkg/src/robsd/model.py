"""Problem data: graphs, scenario sets, the max-affine objective and instance I/O."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np


class InstanceError(ValueError):
    """Raised for malformed or inconsistent instance data."""


class Kind(str, enum.Enum):
    MST = "mst"
    TSP = "tsp"
    GENERIC = "generic"


@dataclass(frozen=True)
class Scenario:
    """One affine piece ``costs @ x + constant`` of the worst-case objective."""

    constant: float
    costs: np.ndarray

    def __post_init__(self):
        costs = np.asarray(self.costs, dtype=float)
        if costs.ndim != 1:
            raise InstanceError("scenario costs must be a vector")
        if not (np.all(np.isfinite(costs)) and np.isfinite(self.constant)):
            raise InstanceError("scenario entries must be finite")
        costs.setflags(write=False)
        object.__setattr__(self, "costs", costs)
        object.__setattr__(self, "constant", float(self.constant))


class ScenarioSet:
    """Finite uncertainty set stored as an ``m x n`` cost matrix plus constants.

    The matrix form is what every solver touches; :meth:`__getitem__` hands
    back :class:`Scenario` views for convenience.
    """

    def __init__(self, costs, constants=None):
        costs = np.array(costs, dtype=float, ndmin=2)
        if costs.ndim != 2:
            raise InstanceError("scenario costs must form an m x n matrix")
        if costs.shape[0] == 0:
            raise InstanceError("empty scenario set")
        if constants is None:
            constants = np.zeros(costs.shape[0])
        constants = np.array(constants, dtype=float).reshape(-1)
        if constants.shape[0] != costs.shape[0]:
            raise InstanceError("one constant per scenario required")
        if not (np.all(np.isfinite(costs)) and np.all(np.isfinite(constants))):
            raise InstanceError("scenario entries must be finite")
        costs.setflags(write=False)
        constants.setflags(write=False)
        self.costs = costs
        self.constants = constants

    @classmethod
    def from_scenarios(cls, scenarios: Sequence[Scenario]) -> "ScenarioSet":
        if not scenarios:
            raise InstanceError("empty scenario set")
        dims = {s.costs.shape[0] for s in scenarios}
        if len(dims) != 1:
            raise InstanceError("scenarios have differing dimensions")
        return cls([s.costs for s in scenarios], [s.constant for s in scenarios])

    @property
    def m(self) -> int:
        return self.costs.shape[0]

    @property
    def n(self) -> int:
        return self.costs.shape[1]

    def __len__(self):
        return self.m

    def __getitem__(self, j) -> Scenario:
        return Scenario(self.constants[j], self.costs[j])

    def __eq__(self, other):
        if not isinstance(other, ScenarioSet):
            return NotImplemented
        return (np.array_equal(self.costs, other.costs)
                and np.array_equal(self.constants, other.constants))

    def values(self, x) -> np.ndarray:
        """Value of every affine piece at ``x`` (length ``m``)."""
        return self.costs @ x + self.constants

    def perturbed(self, magnitude: float, seed) -> "ScenarioSet":
        """Copy with every entry (constants included) shifted by U[-eps, eps] noise."""
        rng = np.random.default_rng(seed)
        noise = rng.uniform(-magnitude, magnitude, size=(self.m, self.n + 1))
        return ScenarioSet(self.costs + noise[:, 1:], self.constants + noise[:, 0])


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph; edge ``i`` is decision variable ``i``."""

    node_count: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        edges = tuple((int(u), int(v)) for u, v in self.edges)
        if self.node_count < 1:
            raise InstanceError("graph needs at least one node")
        seen = set()
        for u, v in edges:
            if u == v:
                raise InstanceError(f"self-loop at node {u}")
            if not (0 <= u < v < self.node_count):
                raise InstanceError(f"edge ({u}, {v}) must satisfy 0 <= u < v < nodes")
            if (u, v) in seen:
                raise InstanceError(f"duplicate edge ({u}, {v})")
            seen.add((u, v))
        object.__setattr__(self, "edges", edges)

    @classmethod
    def complete(cls, node_count: int) -> "Graph":
        return cls(node_count, tuple((u, v) for u in range(node_count)
                                     for v in range(u + 1, node_count)))

    @property
    def n(self) -> int:
        return len(self.edges)

    @property
    def is_complete(self) -> bool:
        return self.n == self.node_count * (self.node_count - 1) // 2

    def edge_array(self) -> np.ndarray:
        return np.array(self.edges, dtype=int).reshape(-1, 2)

    def edge_index(self) -> dict[tuple[int, int], int]:
        return {e: i for i, e in enumerate(self.edges)}


@dataclass
class Instance:
    name: str
    kind: Kind
    scenarios: ScenarioSet
    graph: Graph | None = None
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.kind = Kind(self.kind)
        if self.kind is not Kind.GENERIC:
            if self.graph is None:
                raise InstanceError(f"{self.kind.value} instance needs a graph")
            if not self.graph.is_complete:
                raise InstanceError(f"{self.kind.value} instances use complete graphs")
        if self.graph is not None and self.graph.n != self.scenarios.n:
            raise InstanceError(
                f"dimension mismatch: {self.graph.n} edges but scenarios of length {self.scenarios.n}")

    @property
    def n(self) -> int:
        return self.scenarios.n

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (self.name == other.name and self.kind == other.kind
                and self.graph == other.graph and self.scenarios == other.scenarios
                and self.meta == other.meta)


def evaluate_f(x, scenarios: ScenarioSet) -> tuple[float, int]:
    """Worst-case value ``max_j costs_j @ x + constant_j`` and its first maximiser."""
    x = np.asarray(x, dtype=float)
    if x.shape != (scenarios.n,):
        raise InstanceError(f"point of shape {x.shape} does not match dimension {scenarios.n}")
    vals = scenarios.values(x)
    j = int(np.argmax(vals))
    return float(vals[j]), j


def _is_spanning_tree(bits: np.ndarray, graph: Graph) -> bool:
    if bits.sum() != graph.node_count - 1:
        return False
    parent = list(range(graph.node_count))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in np.flatnonzero(bits):
        ra, rb = find(graph.edges[i][0]), find(graph.edges[i][1])
        if ra == rb:
            return False
        parent[ra] = rb
    return True


def _is_tour(bits: np.ndarray, graph: Graph) -> bool:
    nn = graph.node_count
    if nn < 3 or bits.sum() != nn:
        return False
    adj = [[] for _ in range(nn)]
    for i in np.flatnonzero(bits):
        u, v = graph.edges[i]
        adj[u].append(v)
        adj[v].append(u)
    if any(len(a) != 2 for a in adj):
        return False
    # degree 2 everywhere: a single cycle iff walking from 0 visits every node
    prev, cur, steps = -1, 0, 0
    while True:
        nxt = adj[cur][0] if adj[cur][0] != prev else adj[cur][1]
        prev, cur = cur, nxt
        steps += 1
        if cur == 0:
            break
    return steps == nn


def check_vertex(v, instance: Instance) -> bool:
    bits = np.asarray(v)
    if bits.shape != (instance.n,):
        raise InstanceError(f"vertex of shape {bits.shape} does not match dimension {instance.n}")
    if not np.all((bits == 0) | (bits == 1)):
        return False
    if instance.kind is Kind.MST:
        return _is_spanning_tree(bits, instance.graph)
    if instance.kind is Kind.TSP:
        return _is_tour(bits, instance.graph)
    return True


def instance_to_dict(instance: Instance) -> dict:
    d: dict[str, Any] = {"name": instance.name, "kind": instance.kind.value}
    if instance.graph is not None:
        d["nodes"] = instance.graph.node_count
        d["edges"] = [list(e) for e in instance.graph.edges]
    d["scenarios"] = [{"c0": float(c0), "c": [float(c) for c in row]}
                      for c0, row in zip(instance.scenarios.constants, instance.scenarios.costs)]
    if instance.meta:
        d["meta"] = instance.meta
    return d


def instance_from_dict(d: dict) -> Instance:
    if not isinstance(d, dict):
        raise InstanceError("instance must be a JSON object")
    try:
        kind = Kind(d.get("kind"))
    except ValueError:
        raise InstanceError(f"unknown kind {d.get('kind')!r}") from None
    raw = d.get("scenarios")
    if not isinstance(raw, list):
        raise InstanceError("'scenarios' must be a list")
    if not raw:
        raise InstanceError("empty scenario set")
    try:
        rows = [[float(c) for c in s["c"]] for s in raw]
        consts = [float(s.get("c0", 0.0)) for s in raw]
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceError(f"malformed scenario entry: {exc}") from None
    if len({len(r) for r in rows}) != 1:
        raise InstanceError("scenario vectors must all have equal length")
    graph = None
    if "nodes" in d or "edges" in d:
        try:
            nodes = int(d["nodes"])
            edges = d.get("edges")
            if edges is None:
                graph = Graph.complete(nodes)
            else:
                graph = Graph(nodes, tuple(tuple(e) for e in edges))
        except (KeyError, TypeError, ValueError) as exc:
            raise InstanceError(f"malformed graph: {exc}") from None
    meta = d.get("meta") or {}
    if not isinstance(meta, dict):
        raise InstanceError("'meta' must be an object")
    return Instance(name=str(d.get("name", "")), kind=kind,
                    scenarios=ScenarioSet(rows, consts), graph=graph, meta=meta)


def save_instance(instance: Instance) -> bytes:
    return (json.dumps(instance_to_dict(instance), indent=1, sort_keys=True) + "\n").encode()


def load_instance(data: bytes | str) -> Instance:
    try:
        d = json.loads(data)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"invalid JSON: {exc}") from None
    return instance_from_dict(d)
