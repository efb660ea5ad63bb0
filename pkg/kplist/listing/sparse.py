"""Sparsity-aware K_p listing by radix tuples over a random node partition.

Used standalone in CONGESTED CLIQUE mode and as the listing core inside each cluster.
"""
import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

import numpy as np

from kplist.graph.graph import CliqueInstance, Edge, Graph
from kplist.graph.oracle import cliques_in_edges
from kplist.graph.orientation import ensure_oriented
from kplist.listing.config import ListingConfig
from kplist.logging import logger
from kplist.serializable import Serializable
from kplist.sim.accounting import Accounting, LoadCapExceeded
from kplist.sim.config import SimConfig
from kplist.sim.engine import QueuedProtocol, RoundEngine
from kplist.sim.routing import ClusterChannel, cluster_route
from kplist.utils import ceil_root, derive_seed, log2

FAKE_EDGE_STREAM = 0xFA4E


@dataclass
class NodePartition(Serializable):
    num_parts: int
    assignment: Dict[int, int] = field(default_factory=dict)
    seed: int = 0

    def part(self, node: int) -> int:
        return self.assignment[node]

    def sizes(self) -> List[int]:
        sizes = [0] * self.num_parts
        for part in self.assignment.values():
            sizes[part] += 1
        return sizes


def random_partition(n: int, num_parts: int, seed: int = 0) -> NodePartition:
    if num_parts < 1:
        raise ValueError(f"num_parts must be >= 1, got {num_parts}.")
    rng = np.random.default_rng(seed)
    parts = rng.integers(0, num_parts, size=n)
    return NodePartition(num_parts, {v: int(parts[v]) for v in range(n)}, seed)


@dataclass
class BalanceReport(Serializable):
    applicable: bool
    reason: str
    bound_pair: float
    bound_single: float
    counts: Dict[str, int] = field(default_factory=dict)
    violations: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


def check_partition_balance(g: Graph, part: NodePartition) -> BalanceReport:
    """Edges induced by every part and by every union of two parts, against 6q²m."""
    k = part.num_parts
    m = g.m
    log_n = log2(g.n)
    q = 1.0 / k
    max_degree = max((g.degree(v) for v in range(g.n)), default=0)

    reasons = []
    if max_degree > m * q / (20 * log_n):
        reasons.append(f"max degree {max_degree} > m*q/(20 log n)={m * q / (20 * log_n):.1f}")
    if q * q * m < 400 * log_n**2:
        reasons.append(f"q^2 m={q * q * m:.1f} < 400 log^2 n={400 * log_n ** 2:.1f}")

    within = np.zeros((k, k), dtype=np.int64)
    for u, v in g.edges:
        a, b = sorted((part.part(u), part.part(v)))
        within[a, b] += 1

    report = BalanceReport(
        applicable=not reasons,
        reason="; ".join(reasons) if reasons else "applicable",
        bound_pair=6 * min(1.0, 2 * q) ** 2 * m,
        bound_single=6 * q**2 * m,
    )
    for a in range(k):
        count = int(within[a, a])
        report.counts[f"{a}"] = count
        if count > report.bound_single:
            report.violations.append(f"{a}")
        for b in range(a + 1, k):
            count = int(within[a, a] + within[b, b] + within[a, b])
            report.counts[f"{a},{b}"] = count
            if count > report.bound_pair:
                report.violations.append(f"{a},{b}")
    return report


def tuple_assign(new_id: int, num_parts: int, p: int) -> Tuple[int, ...]:
    """Little-endian base-num_parts digits of new_id - 1, padded to p digits."""
    if new_id < 1:
        raise ValueError(f"new IDs start at 1, got {new_id}.")
    x = new_id - 1
    digits = []
    for _ in range(p):
        if num_parts > 1:
            x, r = divmod(x, num_parts)
        else:
            r = 0
        digits.append(r)
    return tuple(digits)


def covered_tuples(new_id: int, k: int, num_parts: int, p: int) -> List[Tuple[int, ...]]:
    """Tuples a node covers when num_parts^p tuples wrap around k nodes."""
    total = num_parts**p
    return [tuple_assign(t + 1, num_parts, p) for t in range(new_id - 1, total, k)]


@lru_cache(maxsize=64)
def fanout_table(
    num_parts: int, p: int, k: Optional[int] = None
) -> Mapping[Tuple[int, int], FrozenSet[int]]:
    """(A, B) with A <= B -> new IDs holding a tuple with A and B at two distinct positions."""
    total = num_parts**p
    k = k or total
    table: Dict[Tuple[int, int], Set[int]] = defaultdict(set)
    for t in range(total):
        digits = tuple_assign(t + 1, num_parts, p)
        owner = t % k + 1
        for i in range(p):
            for j in range(i + 1, p):
                a, b = digits[i], digits[j]
                table[(a, b) if a <= b else (b, a)].add(owner)
    return {key: frozenset(ids) for key, ids in table.items()}


def delivery_fanout(
    edge: Edge, partition: NodePartition, num_parts: int, p: int, k: Optional[int] = None
) -> FrozenSet[int]:
    a, b = sorted((partition.part(edge[0]), partition.part(edge[1])))
    return fanout_table(num_parts, p, k).get((a, b), frozenset())


@dataclass(frozen=True)
class ResponsibilityMap:
    """New ID i simulates original nodes (i-1)*ceil(n/k) .. i*ceil(n/k) - 1 (0-based)."""

    n: int
    k: int

    @property
    def block(self) -> int:
        return max(1, math.ceil(self.n / self.k)) if self.k else 1

    def owner_of(self, node: int) -> int:
        if not 0 <= node < self.n:
            raise ValueError(f"Node {node} outside [0, {self.n}).")
        return node // self.block + 1

    def owned(self, new_id: int) -> range:
        start = (new_id - 1) * self.block
        return range(min(start, self.n), min(start + self.block, self.n))


@dataclass
class TupleListingResult:
    cliques: Set[CliqueInstance]
    received: Dict[int, int]
    sent: Dict[int, int]


def list_by_tuples(
    owned: Mapping[int, Iterable[Tuple[Edge, bool]]],
    members: Sequence[int],
    partition: NodePartition,
    p: int,
    channel: ClusterChannel,
    accounting: Accounting = None,
) -> TupleListingResult:
    """Each owner ships every edge it holds to the fanout of the edge's part pair.

    `owned` maps new IDs (1-based, indexing `members`) to (edge, is_fake) pairs. Every
    receiver lists the p-cliques among the real edges it got.
    """
    k = len(members)
    num_parts = partition.num_parts
    table = fanout_table(num_parts, p, k)

    def messages():
        for new_id in sorted(owned):
            src = members[new_id - 1]
            for (u, v), fake in owned[new_id]:
                a, b = sorted((partition.part(u), partition.part(v)))
                for dst_id in sorted(table.get((a, b), ())):
                    yield src, members[dst_id - 1], (u, v, int(fake))

    inboxes, _ = cluster_route(channel, messages(), accounting)

    cliques: Set[CliqueInstance] = set()
    received, sent = {}, defaultdict(int)
    for dst, items in inboxes.items():
        real = set()
        for src, (u, v, fake) in items:
            if src != dst:
                sent[src] += 1
            if not fake:
                real.add((u, v))
        received[dst] = sum(1 for src, _ in items if src != dst)
        cliques |= cliques_in_edges(real, p)
    return TupleListingResult(cliques, received, dict(sent))


class PartitionBroadcast(QueuedProtocol):
    """Every clique node draws its own part and tells all other nodes."""

    def __init__(self, num_parts: int):
        self.num_parts = num_parts

    def setup(self, ctx):
        part = int(ctx.rng.integers(self.num_parts))
        ctx.state["part"] = part
        ctx.state["parts"] = {ctx.node: part}
        for u in sorted(ctx.neighbors):
            ctx.enqueue(u, part)

    def on_message(self, ctx, msg):
        ctx.state["parts"][msg.src] = msg.payload[0]


def fake_edges(
    g: Graph, p: int, seed: int, config: ListingConfig
) -> Dict[Edge, int]:
    """Random absent pairs, with a random tail, up to m / n^(1/p) = factor * n * log2 n."""
    n = g.n
    max_edges = n * (n - 1) // 2
    target = config.fake_edge_factor * n * log2(n) * float(n) ** (1.0 / p)
    m_target = min(max_edges, int(math.ceil(target)))
    need = m_target - g.m
    if need <= 0:
        return {}
    absent = [(u, v) for u in range(n) for v in range(u + 1, n) if (u, v) not in g.edges]
    rng = np.random.default_rng(derive_seed(seed, FAKE_EDGE_STREAM))
    picked = np.sort(rng.choice(len(absent), size=need, replace=False))
    sides = rng.integers(0, 2, size=need)
    return {absent[i]: absent[i][s] for i, s in zip(picked.tolist(), sides.tolist())}


def cc_list_kp(
    g: Graph,
    p: int,
    seed: int = 0,
    config: ListingConfig = None,
    sim_config: SimConfig = None,
    accounting: Accounting = None,
) -> Tuple[Set[CliqueInstance], Accounting]:
    """K_p listing in the CONGESTED CLIQUE with n^(1/p) parts and fake-edge padding."""
    if p < 3:
        raise ValueError(f"Listing needs p >= 3, got {p}.")
    config = config or ListingConfig()
    sim_config = sim_config or SimConfig()
    accounting = accounting if accounting is not None else Accounting()
    n = g.n
    if n == 0:
        return set(), accounting

    g = ensure_oriented(g)
    num_parts = ceil_root(n, p)

    engine = RoundEngine(
        n=n, clique=True, seed=seed, config=sim_config, accounting=accounting, phase="partition"
    )
    contexts = engine.run(PartitionBroadcast(num_parts))
    partition = NodePartition(num_parts, {v: contexts[v].state["part"] for v in range(n)}, seed)
    for v in range(n):
        if contexts[v].state["parts"] != partition.assignment:
            raise RuntimeError(f"Node {v} has an inconsistent view of the partition.")

    fakes = fake_edges(g, p, seed, config)
    owned: Dict[int, List[Tuple[Edge, bool]]] = defaultdict(list)
    for e in sorted(g.edges):
        owned[g.tail(e) + 1].append((e, False))
    for e, tail in sorted(fakes.items()):
        owned[tail + 1].append((e, True))

    channel = ClusterChannel.for_clique(n, sim_config, phase="listing")
    result = list_by_tuples(owned, list(range(n)), partition, p, channel, accounting)

    m_padded = g.m + len(fakes)
    expected = p * p * m_padded / num_parts**2
    max_received = max(result.received.values(), default=0)
    load_const = max_received / expected if expected else 0.0
    accounting.metrics.update(
        {
            "num_parts": num_parts,
            "m": g.m,
            "fake_edges": len(fakes),
            "m_padded": m_padded,
            "max_received": max_received,
            "load_const": round(load_const, 6),
        }
    )
    logger.info(
        "CC listing n=%d m=%d p=%d: %d parts, %d fake edges, load constant %.3f",
        n,
        g.m,
        p,
        num_parts,
        len(fakes),
        load_const,
    )
    if load_const > config.load_const_ceiling:
        node = max(result.received, key=lambda v: (result.received[v], -v))
        accounting.record_violation(node, "listing", config.load_const_ceiling, load_const)
        raise LoadCapExceeded(
            f"[listing] load constant {load_const:.2f} above ceiling {config.load_const_ceiling}."
        )
    return result.cliques, accounting
