import heapq
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Set

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from kplist.decomposition.conductance import conductance_certificate, sweep_cut
from kplist.decomposition.partition import Cluster, EdgeLabel, EdgePartition
from kplist.graph.graph import Edge, Graph, edge_key
from kplist.logging import logger
from kplist.serializable import Serializable
from kplist.sim.accounting import Accounting
from kplist.sim.config import SimConfig
from kplist.utils import ceil_log2


class DecompositionError(ValueError):
    pass


@dataclass
class DecompositionConfig(Serializable):
    # cluster nodes keep M-degree >= min_degree_factor * n^delta
    min_degree_factor: float = 0.5
    # None means 1 / (4 * ceil(log2 n))
    phi_min: float = None
    # enumerate subsets exactly while 2^(k-1) stays below this
    exact_conductance_limit: int = 2**14
    dense_spectral_limit: int = 2048
    power_iterations: int = 500
    # each retry halves phi_min
    max_retries: int = 12

    def resolve_phi(self, n: int) -> float:
        if self.phi_min is not None:
            return self.phi_min
        return 1.0 / (4 * ceil_log2(n))


def _components(nodes: Set[int], adj: Dict[int, Set[int]]) -> List[List[int]]:
    nodes = sorted(nodes)
    if not nodes:
        return []
    pos = {v: i for i, v in enumerate(nodes)}
    rows, cols = [], []
    for v in nodes:
        for u in adj[v]:
            if u in pos:
                rows.append(pos[v])
                cols.append(pos[u])
    matrix = sp.csr_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(len(nodes), len(nodes))
    )
    count, labels = connected_components(matrix, directed=False)
    groups: List[List[int]] = [[] for _ in range(count)]
    for v, label in zip(nodes, labels):
        groups[label].append(v)
    return sorted(groups, key=lambda grp: grp[0])


class _Builder:
    """One attempt at the reference construction for a fixed phi_min."""

    def __init__(self, g: Graph, delta: float, phi: float, config: DecompositionConfig):
        self.g = g
        self.delta = delta
        self.phi = phi
        self.config = config
        n_delta = float(g.n) ** delta
        self.s_cap = max(1, int(math.floor(n_delta + 1e-9)))
        self.tau = config.min_degree_factor * n_delta
        self.live: Dict[int, Set[int]] = {v: set(g.neighbors(v)) for v in range(g.n)}
        self.labels: Dict[Edge, EdgeLabel] = {}
        self.s_orientation: Dict[Edge, int] = {}
        self.s_out = [0] * g.n
        self.cut_edges: List[Edge] = []
        self.clusters: List[List[int]] = []
        self.conductances: List[float] = []

    def _drop(self, u: int, v: int):
        self.live[u].discard(v)
        self.live[v].discard(u)

    def _sparse_or_remainder(self, u: int, v: int, tail: int):
        """S with the preferred tail, S the other way round, or R when both are full."""
        e = edge_key(u, v)
        head = v if tail == u else u
        for t in (tail, head):
            if self.s_out[t] < self.s_cap:
                self.labels[e] = EdgeLabel.S
                self.s_orientation[e] = t
                self.s_out[t] += 1
                return
        self.labels[e] = EdgeLabel.R

    def _peel(self, nodes: Set[int], threshold: float, strict: bool) -> Set[int]:
        """Removes nodes of low live degree inside `nodes`; their edges go to S or R."""
        remaining = set(nodes)
        degree = {v: len(self.live[v] & remaining) for v in remaining}
        heap = [(d, v) for v, d in degree.items()]
        heapq.heapify(heap)

        def low(d):
            return d < threshold if strict else d <= threshold

        while heap:
            d, v = heapq.heappop(heap)
            if v not in remaining or d != degree[v]:
                continue
            if not low(d):
                break
            remaining.discard(v)
            for u in sorted(self.live[v] & remaining):
                self._sparse_or_remainder(v, u, tail=v)
                self._drop(v, u)
                degree[u] -= 1
                heapq.heappush(heap, (degree[u], u))
        return remaining

    def build(self) -> None:
        everyone = set(range(self.g.n))
        core = self._peel(everyone, self.s_cap, strict=False)
        queue = [set(c) for c in _components(core, self.live)]

        while queue:
            piece = queue.pop()
            piece = self._peel(piece, self.tau, strict=True)
            for comp in _components(piece, self.live):
                if len(comp) < 2:
                    continue
                comp_set = set(comp)
                edges = [
                    edge_key(v, u) for v in comp for u in self.live[v] if u > v
                ]
                cert = conductance_certificate(
                    comp,
                    edges,
                    self.config.exact_conductance_limit,
                    self.config.dense_spectral_limit,
                    self.config.power_iterations,
                )
                if cert >= self.phi:
                    self.clusters.append(comp)
                    self.conductances.append(cert)
                    for e in edges:
                        self.labels[e] = EdgeLabel.M
                    continue
                side, _ = sweep_cut(
                    comp,
                    edges,
                    self.config.dense_spectral_limit,
                    self.config.power_iterations,
                )
                if not side or side == comp_set:
                    side = {min(comp, key=lambda v: (len(self.live[v]), v))}
                for u, v in edges:
                    if (u in side) != (v in side):
                        self.cut_edges.append((u, v))
                        self._drop(u, v)
                queue.append(side)
                queue.append(comp_set - side)

        for u, v in sorted(self.cut_edges):
            tail = u if self.s_out[u] <= self.s_out[v] else v
            self._sparse_or_remainder(u, v, tail)

    def partition(self) -> EdgePartition:
        order = sorted(range(len(self.clusters)), key=lambda i: self.clusters[i][0])
        clusters, edge_cluster = [], {}
        cluster_of = {}
        for cid, i in enumerate(order):
            clusters.append(
                Cluster(cid, tuple(self.clusters[i]), self.delta, self.conductances[i])
            )
            for v in self.clusters[i]:
                cluster_of[v] = cid
        for e, label in self.labels.items():
            if label == EdgeLabel.M:
                edge_cluster[e] = cluster_of[e[0]]
        return EdgePartition(
            n=self.g.n,
            delta=self.delta,
            labels=dict(sorted(self.labels.items())),
            clusters=clusters,
            edge_cluster=edge_cluster,
            s_orientation=dict(sorted(self.s_orientation.items())),
            phi_min=self.phi,
            min_degree_factor=self.config.min_degree_factor,
        )


def expander_decompose(
    g: Graph,
    delta: float,
    config: Optional[DecompositionConfig] = None,
    accounting: Optional[Accounting] = None,
    sim_config: Optional[SimConfig] = None,
    phase: str = "decomposition",
) -> EdgePartition:
    """Centralized construction of a delta-expander decomposition of `g`.

    Nodes of degree at most n^delta are peeled into S first. The remaining core is split along
    Fiedler sweep cuts until each piece, after peeling nodes below the min-degree threshold,
    certifies conductance >= phi_min. Cut edges are absorbed into S while an endpoint has
    out-degree budget left; the rest is R. When |R| > |E|/6 the construction is retried with
    phi_min halved.
    """
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}.")
    config = config or DecompositionConfig()
    sim_config = sim_config or SimConfig()
    phi = config.resolve_phi(g.n)

    for attempt in range(config.max_retries + 1):
        builder = _Builder(g, delta, phi, config)
        builder.build()
        part = builder.partition()
        r = len(part.R)
        if 6 * r <= g.m:
            break
        logger.warning(
            "Decomposition attempt %d left |R|=%d > |E|/6=%.1f, retrying with phi_min=%.3g",
            attempt,
            r,
            g.m / 6,
            phi / 2,
        )
        phi /= 2
    else:
        raise DecompositionError(
            f"No decomposition with |R| <= |E|/6 after {config.max_retries} retries "
            f"(delta={delta}, final phi_min={phi:.3g})."
        )

    if accounting is not None and g.m > 0:
        rounds = math.ceil(
            sim_config.decomposition_factor
            * float(g.n) ** (1 - delta)
            * sim_config.polylog(g.n)
        )
        accounting.charge(phase, rounds)

    logger.debug(
        "Decomposed m=%d at delta=%.3f: %d clusters, |M|=%d |S|=%d |R|=%d",
        g.m,
        delta,
        len(part.clusters),
        len(part.M),
        len(part.S),
        len(part.R),
    )
    return part
