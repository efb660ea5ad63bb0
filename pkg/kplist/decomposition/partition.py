import enum
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Set, Tuple

from kplist.graph.graph import Edge, Graph


class EdgeLabel(enum.Enum):
    M = "M"  # inside a cluster
    S = "S"  # sparse, oriented with bounded out-degree
    R = "R"  # remainder, deferred
    DONE = "DONE"  # listed and removed


@dataclass(frozen=True)
class Cluster:
    id: int
    members: Tuple[int, ...]
    delta: float
    conductance_estimate: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(sorted(self.members)))

    @property
    def k(self) -> int:
        return len(self.members)

    def __contains__(self, node: int) -> bool:
        return node in self.member_set

    @cached_property
    def member_set(self) -> frozenset:
        return frozenset(self.members)


@dataclass
class EdgePartition:
    """E = E_m ∪ E_s ∪ E_r over a fixed graph, plus the clusters owning the M-edges.

    `phi_min` and `min_degree_factor` record the parameters the partition was built with, so a
    verifier can check it against its own declared contract.
    """

    n: int
    delta: float
    labels: Dict[Edge, EdgeLabel] = field(default_factory=dict)
    clusters: List[Cluster] = field(default_factory=list)
    edge_cluster: Dict[Edge, int] = field(default_factory=dict)
    s_orientation: Dict[Edge, int] = field(default_factory=dict)
    phi_min: float = 0.0
    min_degree_factor: float = 0.5

    def edges_with(self, label: EdgeLabel) -> Set[Edge]:
        return {e for e, lab in self.labels.items() if lab == label}

    @property
    def M(self) -> Set[Edge]:
        return self.edges_with(EdgeLabel.M)

    @property
    def S(self) -> Set[Edge]:
        return self.edges_with(EdgeLabel.S)

    @property
    def R(self) -> Set[Edge]:
        return self.edges_with(EdgeLabel.R)

    def cluster(self, cluster_id: int) -> Cluster:
        for c in self.clusters:
            if c.id == cluster_id:
                return c
        raise KeyError(f"No cluster with id {cluster_id}.")

    def cluster_edges(self, cluster_id: int) -> Set[Edge]:
        return {
            e
            for e, cid in self.edge_cluster.items()
            if cid == cluster_id and self.labels.get(e) == EdgeLabel.M
        }

    def node_cluster(self) -> Dict[int, int]:
        return {v: c.id for c in self.clusters for v in c.members}

    def relabel(self, edge: Edge, label: EdgeLabel):
        if edge not in self.labels:
            raise KeyError(f"Edge {edge} is not part of this partition.")
        self.labels[edge] = label
        if label != EdgeLabel.M:
            self.edge_cluster.pop(edge, None)

    def s_out_degrees(self) -> Dict[int, int]:
        out: Dict[int, int] = {}
        for e in self.S:
            tail = self.s_orientation[e]
            out[tail] = out.get(tail, 0) + 1
        return out

    def s_graph(self) -> Graph:
        s = self.S
        return Graph(self.n, frozenset(s), {e: self.s_orientation[e] for e in s})

    def to_dict(self) -> Dict:
        return {
            "delta": self.delta,
            "n": self.n,
            "phi_min": self.phi_min,
            "min_degree_factor": self.min_degree_factor,
            "clusters": [
                {
                    "id": c.id,
                    "members": list(c.members),
                    "conductance_estimate": c.conductance_estimate,
                }
                for c in self.clusters
            ],
            "labels": [
                [u, v, self.labels[(u, v)].value, self.edge_cluster.get((u, v))]
                for u, v in sorted(self.labels)
            ],
            "s_orientation": [
                [u, v, self.s_orientation[(u, v)]] for u, v in sorted(self.s_orientation)
            ],
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "EdgePartition":
        delta = data["delta"]
        clusters = [
            Cluster(c["id"], tuple(c["members"]), delta, c.get("conductance_estimate", 0.0))
            for c in data["clusters"]
        ]
        labels, edge_cluster = {}, {}
        for u, v, label, cid in data["labels"]:
            labels[(u, v)] = EdgeLabel(label)
            if cid is not None:
                edge_cluster[(u, v)] = cid
        return cls(
            n=data["n"],
            delta=delta,
            labels=labels,
            clusters=clusters,
            edge_cluster=edge_cluster,
            s_orientation={(u, v): t for u, v, t in data["s_orientation"]},
            phi_min=data.get("phi_min", 0.0),
            min_degree_factor=data.get("min_degree_factor", 0.5),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)
