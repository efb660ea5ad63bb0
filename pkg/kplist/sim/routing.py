import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from kplist.sim.accounting import Accounting, LoadCapExceeded
from kplist.sim.config import SimConfig

Routed = Tuple[int, int, Any]


@dataclass
class ClusterChannel:
    """All-to-all delivery inside a node set, charged by its per-node load.

    Delivering a batch whose largest per-node send or receive count is L costs
    `routing_factor * ceil(L / n**delta)` rounds. A batch with L above `load_cap` is rejected.
    """

    members: Tuple[int, ...]
    n: int
    delta: float
    routing_factor: float
    load_cap: Optional[float]
    phase: str = "routing"

    @classmethod
    def for_cluster(cls, cluster, n: int, config: SimConfig = None, phase: str = "routing"):
        config = config or SimConfig()
        n_delta = float(n) ** cluster.delta
        return cls(
            members=tuple(sorted(cluster.members)),
            n=n,
            delta=cluster.delta,
            routing_factor=config.routing_factor(n),
            load_cap=config.load_cap_factor * n_delta * config.polylog(n),
            phase=phase,
        )

    @classmethod
    def for_clique(cls, n: int, config: SimConfig = None, phase: str = "routing"):
        """The whole clique as one channel: n messages per node per batch, uncapped."""
        config = config or SimConfig()
        return cls(
            members=tuple(range(n)),
            n=n,
            delta=1.0,
            routing_factor=config.clique_routing_factor,
            load_cap=None,
            phase=phase,
        )

    @property
    def n_delta(self) -> float:
        return float(self.n) ** self.delta

    def cost(self, load: int) -> int:
        if load <= 0:
            return 0
        return int(math.ceil(self.routing_factor * math.ceil(load / self.n_delta)))


def cluster_route(
    channel: ClusterChannel,
    messages: Iterable[Routed],
    accounting: Accounting = None,
) -> Tuple[Dict[int, List[Tuple[int, Any]]], int]:
    """Delivers every (src, dst, payload) and charges the channel's cost.

    Returns the inbox of each destination as (src, payload) pairs in send order, and the
    number of rounds charged. Messages a node addresses to itself are delivered locally.
    """
    members = set(channel.members)
    inboxes: Dict[int, List[Tuple[int, Any]]] = defaultdict(list)
    sent: Dict[int, int] = defaultdict(int)
    received: Dict[int, int] = defaultdict(int)

    for src, dst, payload in messages:
        if src not in members or dst not in members:
            raise ValueError(f"[{channel.phase}] {src}->{dst} leaves the channel.")
        inboxes[dst].append((src, payload))
        if src != dst:
            sent[src] += 1
            received[dst] += 1

    load = max(list(sent.values()) + list(received.values()) + [0])
    if accounting is not None:
        accounting.record_messages(channel.phase, sent, received)

    if channel.load_cap is not None and load > channel.load_cap:
        node = max(
            members, key=lambda v: (max(sent.get(v, 0), received.get(v, 0)), -v)
        )
        if accounting is not None:
            accounting.record_violation(node, channel.phase, channel.load_cap, load)
        raise LoadCapExceeded(
            f"[{channel.phase}] node {node} has load {load} above cap {channel.load_cap:.1f}."
        )

    rounds = channel.cost(load)
    if accounting is not None and rounds:
        accounting.charge(channel.phase, rounds)
    return dict(inboxes), rounds


def assign_cluster_ids(
    clusters: Sequence[Any],
    n: int,
    accounting: Accounting = None,
    config: SimConfig = None,
    phase: str = "cluster-ids",
) -> List[Dict[int, int]]:
    """Ranks each cluster's members by original ID into new IDs 1..k.

    All clusters are handled in parallel, so the polylog(n) charge is paid once.
    """
    config = config or SimConfig()
    mappings = []
    for cluster in clusters:
        members = sorted(cluster.members)
        if not members:
            raise ValueError("Cannot assign IDs in an empty cluster.")
        mappings.append({v: i + 1 for i, v in enumerate(members)})
    if accounting is not None and mappings:
        accounting.charge(phase, config.polylog(n))
    return mappings
