import heapq
from dataclasses import dataclass
from typing import Dict, Tuple

from kplist.graph.graph import Edge, Graph


@dataclass(frozen=True)
class OrientationCertificate:
    max_out_degree: int
    peel_order: Tuple[int, ...]

    def holds_for(self, g: Graph) -> bool:
        return g.is_oriented and g.max_out_degree <= self.max_out_degree


def degeneracy_order(g: Graph) -> Tuple[Tuple[int, ...], int]:
    """Repeatedly removes a minimum-degree node (smallest ID on ties).

    Returns the removal order and the largest degree seen at removal time, which is the
    degeneracy of `g`.
    """
    degree = [g.degree(v) for v in range(g.n)]
    heap = [(degree[v], v) for v in range(g.n)]
    heapq.heapify(heap)
    removed = [False] * g.n
    order = []
    degeneracy = 0

    while heap:
        d, v = heapq.heappop(heap)
        if removed[v] or d != degree[v]:
            continue
        removed[v] = True
        order.append(v)
        degeneracy = max(degeneracy, d)
        for u in g.neighbors(v):
            if not removed[u]:
                degree[u] -= 1
                heapq.heappush(heap, (degree[u], u))
    return tuple(order), degeneracy


def degeneracy_orient(g: Graph) -> Tuple[Graph, OrientationCertificate]:
    """Orients every edge from its earlier-peeled endpoint to the later one."""
    order, degeneracy = degeneracy_order(g)
    rank = {v: i for i, v in enumerate(order)}
    orientation: Dict[Edge, int] = {
        (u, v): (u if rank[u] < rank[v] else v) for u, v in g.edges
    }
    oriented = g.with_orientation(orientation)
    return oriented, OrientationCertificate(degeneracy, order)


def ensure_oriented(g: Graph) -> Graph:
    if g.orientation or g.m == 0:
        return g
    return degeneracy_orient(g)[0]
