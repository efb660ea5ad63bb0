from dataclasses import dataclass, field
from typing import Dict, Optional

from kplist.decomposition.conductance import conductance_certificate
from kplist.decomposition.expander import DecompositionConfig, _components
from kplist.decomposition.partition import EdgeLabel, EdgePartition
from kplist.graph.graph import Graph
from kplist.serializable import Serializable

CHECKS = (
    "labels_total",
    "clusters_disjoint",
    "min_degree",
    "conductance",
    "s_out_degree",
    "r_bound",
)


@dataclass
class DecompositionReport(Serializable):
    checks: Dict[str, bool] = field(default_factory=dict)
    details: Dict[str, str] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def fail(self, check: str, detail: str):
        self.checks[check] = False
        self.details.setdefault(check, detail)


def verify_decomposition(
    g: Graph,
    part: EdgePartition,
    config: Optional[DecompositionConfig] = None,
) -> DecompositionReport:
    """Checks a partition against the delta-expander decomposition contract.

    Thresholds default to the ones the partition declares (`phi_min`, `min_degree_factor`);
    `config` only supplies the conductance computation limits.
    """
    config = config or DecompositionConfig()
    report = DecompositionReport(checks={name: True for name in CHECKS})
    n_delta = float(g.n) ** part.delta

    if set(part.labels) != set(g.edges):
        report.fail(
            "labels_total",
            f"{len(set(g.edges) - set(part.labels))} unlabeled, "
            f"{len(set(part.labels) - set(g.edges))} foreign edges",
        )

    owner: Dict[int, int] = {}
    for c in part.clusters:
        for v in c.members:
            if v in owner:
                report.fail("clusters_disjoint", f"node {v} in clusters {owner[v]} and {c.id}")
            owner[v] = c.id

    for e, label in part.labels.items():
        if label != EdgeLabel.M:
            continue
        cid = part.edge_cluster.get(e)
        if cid is None or owner.get(e[0]) != cid or owner.get(e[1]) != cid:
            report.fail("clusters_disjoint", f"M-edge {e} is not inside its cluster")

    threshold = part.min_degree_factor * n_delta
    for c in part.clusters:
        edges = sorted(part.cluster_edges(c.id))
        degree = {v: 0 for v in c.members}
        for u, v in edges:
            degree[u] += 1
            degree[v] += 1
        low = [v for v, d in degree.items() if d < threshold]
        if low:
            report.fail(
                "min_degree",
                f"cluster {c.id}: node {low[0]} has M-degree {degree[low[0]]} < {threshold:.2f}",
            )
        adj = {v: set() for v in c.members}
        for u, v in edges:
            adj[u].add(v)
            adj[v].add(u)
        if len(_components(set(c.members), adj)) > 1:
            report.fail("conductance", f"cluster {c.id} is not connected in its M-edges")
            continue
        phi = conductance_certificate(
            c.members,
            edges,
            config.exact_conductance_limit,
            config.dense_spectral_limit,
            config.power_iterations,
        )
        if phi < part.phi_min:
            report.fail(
                "conductance",
                f"cluster {c.id}: conductance {phi:.4f} < phi_min {part.phi_min:.4f}",
            )

    s_out: Dict[int, int] = {}
    for e in part.S:
        tail = part.s_orientation.get(e)
        if tail is None or tail not in e:
            report.fail("s_out_degree", f"S-edge {e} has no valid tail")
            continue
        s_out[tail] = s_out.get(tail, 0) + 1
    over = [v for v, d in s_out.items() if d > n_delta + 1e-9]
    if over:
        report.fail(
            "s_out_degree",
            f"node {over[0]} has S out-degree {s_out[over[0]]} > n^delta={n_delta:.2f}",
        )

    r = len(part.R)
    if 6 * r > g.m:
        report.fail("r_bound", f"|R|={r} > |E|/6={g.m / 6:.2f}")
    return report
