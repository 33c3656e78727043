"""Undirected simple graphs: representation, mutation, generators and edge-list IO."""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np
import scipy.sparse as sp

from .errors import (
    ConnectivityRetriesExhausted,
    DuplicateEdgeRejected,
    EdgeAbsent,
    EdgeAlreadyPresent,
    GraphError,
    ParseError,
    SelfLoopRejected,
    WouldIsolateNode,
)

Edge = tuple[int, int]

ER_MAX_RETRIES = 1000


def canonical_edge(u: int, v: int) -> Edge:
    u, v = int(u), int(v)
    return (u, v) if u < v else (v, u)


class Graph:
    """Unweighted undirected simple graph on nodes ``0..num_nodes-1``.

    Instances are treated as immutable: every mutation helper in this module
    returns a new graph. Derived structures (sorted edge array, sparse
    adjacency) are computed lazily and cached.
    """

    __slots__ = ("num_nodes", "_adj", "_degrees", "_edge_array", "_csr")

    def __init__(self, num_nodes: int, edges: Iterable[Edge] = ()):
        if num_nodes < 0:
            raise GraphError("num_nodes must be non-negative")
        self.num_nodes = int(num_nodes)
        self._adj: list[set[int]] = [set() for _ in range(self.num_nodes)]
        self._degrees = np.zeros(self.num_nodes, dtype=np.int64)
        self._edge_array = None
        self._csr = None
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise SelfLoopRejected(f"self-loop at node {u}")
            if not (0 <= u < self.num_nodes and 0 <= v < self.num_nodes):
                raise GraphError(f"edge ({u}, {v}) out of range for {self.num_nodes} nodes")
            if v in self._adj[u]:
                raise DuplicateEdgeRejected(f"duplicate edge {canonical_edge(u, v)}")
            self._link(u, v)

    # internal mutation, only ever used on freshly built copies
    def _link(self, u: int, v: int) -> None:
        self._adj[u].add(v)
        self._adj[v].add(u)
        self._degrees[u] += 1
        self._degrees[v] += 1
        self._edge_array = None
        self._csr = None

    def _unlink(self, u: int, v: int) -> None:
        self._adj[u].discard(v)
        self._adj[v].discard(u)
        self._degrees[u] -= 1
        self._degrees[v] -= 1
        self._edge_array = None
        self._csr = None

    @property
    def degrees(self) -> np.ndarray:
        d = self._degrees.view()
        d.flags.writeable = False
        return d

    @property
    def num_edges(self) -> int:
        return int(self._degrees.sum()) // 2

    def neighbors(self, u: int) -> frozenset[int]:
        return frozenset(self._adj[u])

    def has_edge(self, u: int, v: int) -> bool:
        return u != v and v in self._adj[u]

    @property
    def edges(self) -> list[Edge]:
        """Edges in canonical order: ``u < v``, sorted lexicographically."""
        return [(int(u), int(v)) for u, v in self.edge_array()]

    def edge_array(self) -> np.ndarray:
        if self._edge_array is None:
            pairs = [(u, v) for u in range(self.num_nodes) for v in self._adj[u] if u < v]
            pairs.sort()
            arr = np.array(pairs, dtype=np.int64).reshape(-1, 2)
            arr.flags.writeable = False
            self._edge_array = arr
        return self._edge_array

    def non_edges(self) -> Iterator[Edge]:
        """Missing pairs in canonical order."""
        for u in range(self.num_nodes):
            adj = self._adj[u]
            for v in range(u + 1, self.num_nodes):
                if v not in adj:
                    yield (u, v)

    def num_non_edges(self) -> int:
        n = self.num_nodes
        return n * (n - 1) // 2 - self.num_edges

    def adjacency(self) -> sp.csr_matrix:
        if self._csr is None:
            e = self.edge_array()
            rows = np.concatenate([e[:, 0], e[:, 1]])
            cols = np.concatenate([e[:, 1], e[:, 0]])
            data = np.ones(rows.size, dtype=float)
            self._csr = sp.csr_matrix((data, (rows, cols)), shape=(self.num_nodes, self.num_nodes))
        return self._csr

    def copy(self) -> "Graph":
        g = Graph.__new__(Graph)
        g.num_nodes = self.num_nodes
        g._adj = [set(s) for s in self._adj]
        g._degrees = self._degrees.copy()
        g._edge_array = self._edge_array
        g._csr = self._csr
        return g

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.num_nodes == other.num_nodes and self._adj == other._adj

    def __hash__(self):
        return hash((self.num_nodes, tuple(map(tuple, self.edge_array()))))

    def __repr__(self) -> str:
        return f"Graph(num_nodes={self.num_nodes}, num_edges={self.num_edges})"


class Direction(enum.IntEnum):
    """Edge operation; the integer value is the weight change."""

    ADD = 1
    DELETE = -1

    @classmethod
    def parse(cls, text) -> "Direction":
        if isinstance(text, Direction):
            return text
        try:
            return cls[str(text).strip().upper()]
        except KeyError:
            raise ValueError(f"unknown direction {text!r}; expected 'add' or 'delete'") from None


@dataclass(frozen=True)
class EdgeDelta:
    edge: Edge
    direction: Direction

    def __post_init__(self):
        object.__setattr__(self, "edge", canonical_edge(*self.edge))
        object.__setattr__(self, "direction", Direction.parse(self.direction))

    @property
    def weight(self) -> int:
        return int(self.direction)

    def inverse(self) -> "EdgeDelta":
        other = Direction.DELETE if self.direction is Direction.ADD else Direction.ADD
        return EdgeDelta(self.edge, other)

    @classmethod
    def add(cls, u: int, v: int) -> "EdgeDelta":
        return cls((u, v), Direction.ADD)

    @classmethod
    def delete(cls, u: int, v: int) -> "EdgeDelta":
        return cls((u, v), Direction.DELETE)


def check_delta(g: Graph, delta: EdgeDelta, allow_isolation: bool = False) -> None:
    u, v = delta.edge
    if u == v:
        raise SelfLoopRejected(f"self-loop at node {u}")
    if not (0 <= u < g.num_nodes and 0 <= v < g.num_nodes):
        raise GraphError(f"edge {delta.edge} out of range for {g.num_nodes} nodes")
    if delta.direction is Direction.ADD:
        if g.has_edge(u, v):
            raise EdgeAlreadyPresent(f"edge {delta.edge} already present")
    else:
        if not g.has_edge(u, v):
            raise EdgeAbsent(f"edge {delta.edge} not in graph")
        if not allow_isolation and (g.degrees[u] == 1 or g.degrees[v] == 1):
            raise WouldIsolateNode(f"deleting {delta.edge} leaves a node with degree 0")


def apply_delta(g: Graph, delta: EdgeDelta, allow_isolation: bool = False) -> Graph:
    """Return a new graph with ``delta`` applied; ``g`` is left untouched."""
    check_delta(g, delta, allow_isolation)
    out = g.copy()
    if delta.direction is Direction.ADD:
        out._link(*delta.edge)
    else:
        out._unlink(*delta.edge)
    return out


def is_connected(g: Graph, skip_edge: Edge | None = None) -> bool:
    """Breadth-first reachability from node 0.

    ``skip_edge`` treats one edge as absent, which lets deletion guards run
    without copying the graph.
    """
    if g.num_nodes == 0:
        raise GraphError("is_connected needs at least one node")
    skip = canonical_edge(*skip_edge) if skip_edge is not None else None
    seen = np.zeros(g.num_nodes, dtype=bool)
    seen[0] = True
    count = 1
    queue = deque([0])
    adj = g._adj
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if seen[v]:
                continue
            if skip is not None and canonical_edge(u, v) == skip:
                continue
            seen[v] = True
            count += 1
            queue.append(v)
    return count == g.num_nodes


# ---------------------------------------------------------------- generators

@dataclass(frozen=True)
class GeneratorSpec:
    """Deterministic graph family description.

    ``family`` is one of ``ring``, ``path``, ``complete`` or ``er``; ``m`` is
    only used by ``er``.
    """

    family: str
    n: int
    m: int | None = None
    seed: int = 0

    def validate(self) -> None:
        fam = self.family
        if fam not in ("ring", "path", "complete", "er"):
            raise GraphError(f"unknown generator family {fam!r}")
        if self.n < 1:
            raise GraphError("generators need n >= 1")
        if fam == "ring" and self.n < 3:
            raise GraphError("ring needs n >= 3")
        if fam == "er":
            if self.m is None or self.m < 0:
                raise GraphError("er needs a non-negative edge count m")
            if self.m > self.n * (self.n - 1) // 2:
                raise GraphError(f"er: m={self.m} exceeds n(n-1)/2 for n={self.n}")

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> "GeneratorSpec":
        """Parse ``ring:8``, ``path:5``, ``complete:4`` or ``er:30:58``."""
        parts = text.strip().lower().split(":")
        try:
            if parts[0] == "er":
                if len(parts) != 3:
                    raise ValueError
                spec = cls("er", int(parts[1]), int(parts[2]), seed)
            else:
                if len(parts) != 2:
                    raise ValueError
                spec = cls(parts[0], int(parts[1]), None, seed)
        except ValueError:
            raise GraphError(f"cannot parse generator spec {text!r}") from None
        spec.validate()
        return spec

    def label(self) -> str:
        if self.family == "er":
            return f"er:{self.n}:{self.m}"
        return f"{self.family}:{self.n}"


def ring(n: int) -> Graph:
    if n < 3:
        raise GraphError("ring needs n >= 3")
    return Graph(n, ((i, (i + 1) % n) for i in range(n)))


def path(n: int) -> Graph:
    return Graph(n, ((i, i + 1) for i in range(n - 1)))


def complete(n: int) -> Graph:
    return Graph(n, ((u, v) for u in range(n) for v in range(u + 1, n)))


def _pair_from_index(idx: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    # row-major enumeration of the strict upper triangle
    idx = idx.astype(np.int64)
    # number of pairs before row u is u*n - u*(u+1)/2
    u = (n - 2 - np.floor(np.sqrt(-8.0 * idx + 4.0 * n * (n - 1) - 7) / 2.0 - 0.5)).astype(np.int64)
    start = u * n - u * (u + 1) // 2
    v = idx - start + u + 1
    return u, v


def erdos_renyi_nm(n: int, m: int, seed: int = 0, max_retries: int = ER_MAX_RETRIES) -> Graph:
    """Uniform connected graph with ``n`` nodes and ``m`` edges (rejection sampling)."""
    total = n * (n - 1) // 2
    if m > total:
        raise GraphError(f"m={m} exceeds n(n-1)/2 for n={n}")
    rng = np.random.default_rng(seed)
    for _ in range(max_retries):
        idx = np.sort(rng.choice(total, size=m, replace=False))
        u, v = _pair_from_index(idx, n)
        g = Graph(n, zip(u.tolist(), v.tolist()))
        if n == 1 or is_connected(g):
            return g
    raise ConnectivityRetriesExhausted(
        f"no connected er:{n}:{m} sample after {max_retries} attempts (seed={seed})"
    )


def generate(spec: GeneratorSpec) -> Graph:
    spec.validate()
    if spec.family == "ring":
        return ring(spec.n)
    if spec.family == "path":
        return path(spec.n)
    if spec.family == "complete":
        return complete(spec.n)
    return erdos_renyi_nm(spec.n, spec.m, spec.seed)


# ------------------------------------------------------------------ edge list

def read_edge_list(text: str, num_nodes: int | None = None) -> Graph:
    """Parse ``u v`` lines; ``#`` starts a comment, blank lines are skipped.

    A ``# nodes=<n>`` header (as written by :func:`write_edge_list`) fixes the
    node count so trailing isolated nodes survive a round trip.
    """
    edges: list[Edge] = []
    seen: set[Edge] = set()
    header_nodes = None
    max_node = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line, _, comment = raw.partition("#")
        if comment and header_nodes is None:
            for tok in comment.split():
                if tok.startswith("nodes="):
                    try:
                        header_nodes = int(tok[len("nodes="):])
                    except ValueError:
                        raise ParseError(f"bad node count {tok!r}", lineno) from None
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"expected 'u v', got {line!r}", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"non-integer endpoint in {line!r}", lineno) from None
        if u < 0 or v < 0:
            raise ParseError(f"negative node index in {line!r}", lineno)
        if u == v:
            raise SelfLoopRejected(f"line {lineno}: self-loop at node {u}")
        e = canonical_edge(u, v)
        if e in seen:
            raise DuplicateEdgeRejected(f"line {lineno}: duplicate edge {e}")
        seen.add(e)
        edges.append(e)
        max_node = max(max_node, e[1])
    n = max_node + 1
    for candidate in (header_nodes, num_nodes):
        if candidate is not None:
            if candidate < n:
                raise ParseError(f"node count {candidate} smaller than largest index {max_node}")
            n = max(n, candidate)
    return Graph(n, edges)


def write_edge_list(g: Graph, header: Iterable[str] = ()) -> str:
    lines = [f"# nodes={g.num_nodes} edges={g.num_edges}"]
    lines.extend(f"# {h}" for h in header)
    lines.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(lines) + "\n"
