from collections import defaultdict
from typing import Dict, FrozenSet, Iterable, Iterator, Mapping, Optional, Set, Tuple, Union

from kplist.graph.graph import CliqueInstance, Edge, Graph

Adjacency = Union[Mapping[int, Iterable[int]], Tuple[FrozenSet[int], ...]]


def _items(adjacency: Adjacency):
    if isinstance(adjacency, Mapping):
        return adjacency.items()
    return enumerate(adjacency)


def enumerate_cliques(
    adjacency: Adjacency, p: int, roots: Optional[Iterable[int]] = None
) -> Iterator[Tuple[int, ...]]:
    """Yields every p-clique once, as a sorted tuple, by neighborhood intersection.

    Each clique is grown from its smallest node through strictly larger neighbors only.
    `roots` restricts the smallest node of the yielded cliques.
    """
    up: Dict[int, FrozenSet[int]] = {
        v: frozenset(w for w in nbrs if w > v) for v, nbrs in _items(adjacency)
    }
    if p < 1:
        return

    def extend(clique, candidates):
        if len(clique) == p:
            yield tuple(clique)
            return
        need = p - len(clique)
        if len(candidates) < need:
            return
        for u in sorted(candidates):
            rest = candidates & up.get(u, frozenset())
            if len(rest) >= need - 1:
                clique.append(u)
                yield from extend(clique, rest)
                clique.pop()

    for v in sorted(up if roots is None else roots):
        yield from extend([v], up.get(v, frozenset()))


def adjacency_of(edges: Iterable[Edge]) -> Dict[int, Set[int]]:
    adj: Dict[int, Set[int]] = defaultdict(set)
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    return adj


def cliques_in_edges(edges: Iterable[Edge], p: int) -> Set[CliqueInstance]:
    return {CliqueInstance(t) for t in enumerate_cliques(adjacency_of(edges), p)}


def cliques_containing(node: int, known: Iterable[Edge], p: int) -> Set[CliqueInstance]:
    """The p-cliques through `node` whose edges all appear in `known`."""
    adj = adjacency_of(known)
    nbrs = adj.get(node, set())
    local = {u: adj[u] & nbrs for u in nbrs}
    return {
        CliqueInstance.of(t + (node,)) for t in enumerate_cliques(local, p - 1)
    }


def brute_force_list_kp(g: Graph, p: int) -> Set[CliqueInstance]:
    if p < 3:
        raise ValueError(f"Listing needs p >= 3, got {p}.")
    return {CliqueInstance(t) for t in enumerate_cliques(g.adjacency, p)}


def cliques_with_edge_in(
    cliques: Iterable[CliqueInstance], edges: Set[Edge]
) -> Set[CliqueInstance]:
    return {c for c in cliques if any(e in edges for e in c.edges())}
