import os
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Tuple

Edge = Tuple[int, int]


def edge_key(u: int, v: int) -> Edge:
    if u == v:
        raise ValueError(f"Self-loop on node {u} is not allowed.")
    return (u, v) if u < v else (v, u)


def other_end(edge: Edge, node: int) -> int:
    return edge[1] if edge[0] == node else edge[0]


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected graph on nodes 0..n-1 with an optional total orientation.

    `orientation` maps every edge to its tail, the endpoint the edge is directed away from.
    It is either empty (unoriented) or defined on every edge.
    """

    n: int
    edges: FrozenSet[Edge] = frozenset()
    orientation: Mapping[Edge, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"Node count must be >= 0, got {self.n}.")
        edges = frozenset(self.edges)
        for u, v in edges:
            if not (0 <= u < v < self.n):
                raise ValueError(
                    f"Edge ({u}, {v}) is not a normalized pair of nodes in [0, {self.n})."
                )
        orientation = dict(self.orientation)
        if orientation:
            if orientation.keys() != edges:
                raise ValueError("Orientation must be defined on every edge or on none.")
            for e, tail in orientation.items():
                if tail not in e:
                    raise ValueError(f"Tail {tail} is not an endpoint of edge {e}.")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "orientation", MappingProxyType(orientation))

    @classmethod
    def from_edges(cls, n: int, pairs: Iterable[Tuple[int, int]]) -> "Graph":
        return cls(n, frozenset(edge_key(u, v) for u, v in pairs))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return False
        return (
            self.n == other.n
            and self.edges == other.edges
            and dict(self.orientation) == dict(other.orientation)
        )

    def __hash__(self):
        return hash((self.n, self.edges))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m}, oriented={self.is_oriented})"

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def is_oriented(self) -> bool:
        return len(self.orientation) > 0 or self.m == 0

    @cached_property
    def adjacency(self) -> Tuple[FrozenSet[int], ...]:
        adj: List[set] = [set() for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return tuple(frozenset(a) for a in adj)

    def neighbors(self, v: int) -> FrozenSet[int]:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def has_edge(self, u: int, v: int) -> bool:
        return u != v and v in self.adjacency[u]

    def tail(self, edge: Edge) -> int:
        return self.orientation[edge]

    def head(self, edge: Edge) -> int:
        return other_end(edge, self.orientation[edge])

    @cached_property
    def out_edges(self) -> Tuple[Tuple[Edge, ...], ...]:
        """Per node, the edges directed away from it, sorted."""
        if not self.is_oriented:
            raise ValueError("Graph has no orientation.")
        out: List[List[Edge]] = [[] for _ in range(self.n)]
        for e, tail in self.orientation.items():
            out[tail].append(e)
        return tuple(tuple(sorted(o)) for o in out)

    def out_degree(self, v: int) -> int:
        return len(self.out_edges[v])

    @property
    def max_out_degree(self) -> int:
        if self.m == 0:
            return 0
        return max(len(o) for o in self.out_edges)

    def with_orientation(self, orientation: Mapping[Edge, int]) -> "Graph":
        return Graph(self.n, self.edges, orientation)


@dataclass(frozen=True, order=True)
class CliqueInstance:
    nodes: Tuple[int, ...]

    def __post_init__(self):
        nodes = tuple(self.nodes)
        if any(a >= b for a, b in zip(nodes, nodes[1:])):
            raise ValueError(f"Clique nodes must be strictly increasing, got {nodes}.")
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def of(cls, nodes: Iterable[int]) -> "CliqueInstance":
        return cls(tuple(sorted(nodes)))

    @property
    def p(self) -> int:
        return len(self.nodes)

    def edges(self) -> List[Edge]:
        ns = self.nodes
        return [(ns[i], ns[j]) for i in range(len(ns)) for j in range(i + 1, len(ns))]

    def is_clique_of(self, g: Graph) -> bool:
        return all(e in g.edges for e in self.edges())


def edge_subgraph(g: Graph, keep: Callable[[Edge], bool]) -> Graph:
    """Same node set, edges filtered by `keep`, orientation restricted."""
    edges = frozenset(e for e in g.edges if keep(e))
    orientation = {e: g.orientation[e] for e in edges} if g.orientation else {}
    return Graph(g.n, edges, orientation)


def restrict(g: Graph, edges: Iterable[Edge]) -> Graph:
    edges = frozenset(edges)
    return edge_subgraph(g, edges.__contains__)


def write_edge_list(g: Graph, path: str):
    """Writes the `n m` header followed by one `u v [tail]` line per edge."""
    dirname = os.path.dirname(path)
    if dirname:
        os.makedirs(dirname, exist_ok=True)
    with open(path, "w") as fout:
        fout.write(f"{g.n} {g.m}\n")
        for u, v in sorted(g.edges):
            if g.orientation:
                fout.write(f"{u} {v} {g.orientation[(u, v)]}\n")
            else:
                fout.write(f"{u} {v}\n")


def read_edge_list(path: str) -> Graph:
    with open(path, "r") as fin:
        lines = [line.split() for line in fin if line.strip() and not line.startswith("#")]
    if not lines or len(lines[0]) != 2:
        raise ValueError(f"{path}: expected an 'n m' header line.")
    n, m = int(lines[0][0]), int(lines[0][1])
    edges, orientation = set(), {}
    for lineno, parts in enumerate(lines[1:], start=2):
        if len(parts) not in (2, 3):
            raise ValueError(f"{path}:{lineno}: expected 'u v' or 'u v tail'.")
        e = edge_key(int(parts[0]), int(parts[1]))
        if e in edges:
            raise ValueError(f"{path}:{lineno}: duplicate edge {e}.")
        edges.add(e)
        if len(parts) == 3:
            orientation[e] = int(parts[2])
    if len(edges) != m:
        raise ValueError(f"{path}: header announces {m} edges, found {len(edges)}.")
    return Graph(n, frozenset(edges), orientation)


def degree_histogram(g: Graph) -> Dict[int, int]:
    hist: Dict[int, int] = {}
    for v in range(g.n):
        hist[g.degree(v)] = hist.get(g.degree(v), 0) + 1
    return hist
