"""Per-cluster listing: classify outside neighbors, defer bad edges, import outside edges,
reshuffle known edges to their owners and list by tuples inside each cluster."""
import enum
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Sequence, Set

from kplist.decomposition.partition import Cluster, EdgeLabel, EdgePartition
from kplist.graph.graph import CliqueInstance, Edge, Graph, edge_key, other_end
from kplist.graph.oracle import cliques_containing
from kplist.listing.config import ListingConfig
from kplist.listing.protocols import ClassifyNeighbors, HeavyImport, ProbeExchange
from kplist.listing.sparse import NodePartition, ResponsibilityMap, list_by_tuples
from kplist.logging import logger
from kplist.registrable import Registrable
from kplist.serializable import Serializable
from kplist.sim.accounting import Accounting, LearnCapExceeded
from kplist.sim.config import SimConfig
from kplist.sim.engine import RoundEngine
from kplist.sim.routing import ClusterChannel, assign_cluster_ids, cluster_route
from kplist.utils import ceil_root, derive_seed, log2, node_rng


@dataclass
class ClusterThresholds(Serializable):
    heavy: float
    light: float
    learn_cap: float

    @classmethod
    def for_step(
        cls, n: int, d: float, config: ListingConfig, variant: str = "kp"
    ) -> "ClusterThresholds":
        if variant == "k4":
            heavy = config.k4_heavy_factor * float(n) ** (d - 1 / 3)
        else:
            heavy = config.heavy_factor * float(n) ** 0.25
        return cls(
            heavy=heavy,
            light=config.light_factor * float(n) ** 0.5 * log2(n),
            learn_cap=config.learn_factor * float(n) ** (d + 0.75),
        )


@dataclass
class NeighborClassification(Serializable):
    """What a cluster and its outside neighbors know after the classification exchange."""

    cluster_id: int
    # outside node -> number of its neighbors in the cluster
    g_count: Dict[int, int] = field(default_factory=dict)
    # outside node -> its neighbors in the cluster
    contacts: Dict[int, List[int]] = field(default_factory=dict)
    heavy: Set[int] = field(default_factory=set)
    # cluster node -> its outside neighbors / its C-light neighbors
    outside_neighbors: Dict[int, List[int]] = field(default_factory=dict)
    light_neighbors: Dict[int, List[int]] = field(default_factory=dict)
    u_light: Dict[int, int] = field(default_factory=dict)
    bad: Set[int] = field(default_factory=set)

    @property
    def light(self) -> Set[int]:
        return set(self.g_count) - self.heavy


@dataclass
class GoalEdgeSet(Serializable):
    cluster_id: int
    goal: Set[Edge] = field(default_factory=set)
    bad_edges: Set[Edge] = field(default_factory=set)


class LearnTag(enum.Enum):
    HEAVY_IMPORT = "heavy-import"
    LIGHT_PROBE = "light-probe"


@dataclass
class LearnedEdges(Serializable):
    """Outside edges (both endpoints outside the cluster) learned by each cluster node."""

    cluster_id: int
    by_node: Dict[int, Dict[Edge, LearnTag]] = field(default_factory=dict)

    def learn(self, node: int, edge: Edge, tag: LearnTag):
        self.by_node.setdefault(node, {}).setdefault(edge, tag)

    def edges(self) -> Set[Edge]:
        return {e for learned in self.by_node.values() for e in learned}

    def count(self, node: int) -> int:
        return len(self.by_node.get(node, {}))

    def histogram(self) -> Dict[str, int]:
        counts = {tag.value: 0 for tag in LearnTag}
        for learned in self.by_node.values():
            for tag in learned.values():
                counts[tag.value] += 1
        return counts


@dataclass
class ClusterDiagnostics(Serializable):
    cluster_id: int
    k: int
    heavy: int
    light: int
    bad: int
    goal_edges: int
    bad_edges: int
    learned: Dict[str, int] = field(default_factory=dict)
    rounds: Dict[str, int] = field(default_factory=dict)

    @classmethod
    def collect(
        cls,
        cluster: Cluster,
        classification: NeighborClassification,
        goals: GoalEdgeSet,
        learned: LearnedEdges,
        accounting: Accounting,
    ) -> "ClusterDiagnostics":
        return cls(
            cluster_id=cluster.id,
            k=cluster.k,
            heavy=len(classification.heavy),
            light=len(classification.light),
            bad=len(classification.bad),
            goal_edges=len(goals.goal),
            bad_edges=len(goals.bad_edges),
            learned=learned.histogram(),
            rounds=dict(accounting.rounds_by_phase),
        )


def classify_clusters(
    clusters: Sequence[Cluster],
    g: Graph,
    thresholds: ClusterThresholds,
    seed: int = 0,
    sim_config: SimConfig = None,
    accounting: Accounting = None,
) -> Dict[int, NeighborClassification]:
    """One classification exchange for all clusters at once, over the edges of `g`."""
    cluster_of = {v: c.id for c in clusters for v in c.members}
    engine = RoundEngine(
        graph=g, seed=seed, config=sim_config, accounting=accounting, phase="classify"
    )
    contexts = engine.run(ClassifyNeighbors(cluster_of, thresholds.heavy))

    result = {c.id: NeighborClassification(c.id) for c in clusters}
    for v in range(g.n):
        state = contexts[v].state
        for u, cid in sorted(state["announced"].items()):
            result[cid].contacts.setdefault(v, []).append(u)
        for cid, count in state["counts"].items():
            result[cid].g_count[v] = count
            if count > thresholds.heavy:
                result[cid].heavy.add(v)
        if state["cluster"] is None:
            continue
        classification = result[state["cluster"]]
        light = sorted(w for w, heavy in state["status"].items() if not heavy)
        classification.outside_neighbors[v] = sorted(state["status"])
        classification.light_neighbors[v] = light
        classification.u_light[v] = len(light)
        if len(light) > thresholds.light:
            classification.bad.add(v)
    return result


def classify(
    c: Cluster,
    g: Graph,
    thresholds: ClusterThresholds,
    seed: int = 0,
    sim_config: SimConfig = None,
    accounting: Accounting = None,
) -> NeighborClassification:
    return classify_clusters([c], g, thresholds, seed, sim_config, accounting)[c.id]


def mark_bad_edges(
    c: Cluster, classification: NeighborClassification, part: EdgePartition
) -> GoalEdgeSet:
    """Relabels M-edges between two bad nodes as R; the remaining M-edges are goal edges."""
    edges = part.cluster_edges(c.id)
    bad = {e for e in edges if e[0] in classification.bad and e[1] in classification.bad}
    for e in sorted(bad):
        part.relabel(e, EdgeLabel.R)
    return GoalEdgeSet(c.id, edges - bad, bad)


def heavy_chunks(
    clusters: Sequence[Cluster],
    classifications: Mapping[int, NeighborClassification],
    g: Graph,
) -> Dict[int, Dict[int, List[Edge]]]:
    """Heavy node -> cluster neighbor -> its share of the heavy node's out-edges.

    Out-edges whose head lies in the cluster are skipped, the rest are dealt round-robin over
    the cluster neighbors in ID order.
    """
    chunks: Dict[int, Dict[int, List[Edge]]] = defaultdict(lambda: defaultdict(list))
    for c in clusters:
        classification = classifications[c.id]
        for v in sorted(classification.heavy):
            receivers = classification.contacts[v]
            inside = set(receivers)
            outgoing = [e for e in g.out_edges[v] if other_end(e, v) not in inside]
            for i, e in enumerate(outgoing):
                chunks[v][receivers[i % len(receivers)]].append(e)
    return {v: dict(per_dst) for v, per_dst in chunks.items()}


def light_probe_queries(
    clusters: Sequence[Cluster],
    classifications: Mapping[int, NeighborClassification],
) -> Dict[int, Dict[int, List[int]]]:
    """Every good cluster node asks each outside neighbor about its C-light neighbors."""
    queries: Dict[int, Dict[int, List[int]]] = {}
    for c in clusters:
        classification = classifications[c.id]
        for u in c.members:
            if u in classification.bad:
                continue
            light = classification.light_neighbors.get(u, [])
            if not light:
                continue
            targets = {}
            for v in classification.outside_neighbors.get(u, []):
                ids = [w for w in light if w != v]
                if ids:
                    targets[v] = ids
            if targets:
                queries[u] = targets
    return queries


def import_outside_edges(
    clusters: Sequence[Cluster],
    classifications: Mapping[int, NeighborClassification],
    g: Graph,
    thresholds: ClusterThresholds,
    probe: bool = True,
    seed: int = 0,
    sim_config: SimConfig = None,
    accounting: Accounting = None,
) -> Dict[int, LearnedEdges]:
    """Heavy nodes push their out-edges into each cluster, then good cluster nodes probe
    their outside neighbors about C-light nodes."""
    accounting = accounting if accounting is not None else Accounting()
    cluster_of = {v: c.id for c in clusters for v in c.members}
    learned = {c.id: LearnedEdges(c.id) for c in clusters}

    chunks = heavy_chunks(clusters, classifications, g)
    if chunks:
        engine = RoundEngine(
            graph=g, seed=seed, config=sim_config, accounting=accounting, phase="heavy-import"
        )
        contexts = engine.run(HeavyImport(chunks))
        for u, cid in sorted(cluster_of.items()):
            for e in contexts[u].state["imported"]:
                learned[cid].learn(u, e, LearnTag.HEAVY_IMPORT)

    queries = light_probe_queries(clusters, classifications) if probe else {}
    if queries:
        engine = RoundEngine(
            graph=g, seed=seed, config=sim_config, accounting=accounting, phase="light-probe"
        )
        contexts = engine.run(ProbeExchange(queries))
        for u in sorted(queries):
            for e in sorted(contexts[u].state["adjacent"]):
                learned[cluster_of[u]].learn(u, e, LearnTag.LIGHT_PROBE)

    for cid, edges in learned.items():
        for u in sorted(edges.by_node):
            count = edges.count(u)
            if count > thresholds.learn_cap:
                accounting.record_violation(u, "light-probe", thresholds.learn_cap, count)
                raise LearnCapExceeded(
                    f"[cluster {cid}] node {u} learned {count} edges, "
                    f"cap is {thresholds.learn_cap:.1f}."
                )
    return learned


@dataclass
class ReshuffledEdges:
    responsibility: ResponsibilityMap
    # new ID -> edges held after routing
    owned: Dict[int, List[Edge]]
    owner_cap: float

    @property
    def max_owned(self) -> int:
        return max((len(edges) for edges in self.owned.values()), default=0)


def _members_by_id(id_map: Mapping[int, int]) -> List[int]:
    return [v for v, _ in sorted(id_map.items(), key=lambda item: item[1])]


def reshuffle(
    c: Cluster,
    g: Graph,
    d: float,
    learned: LearnedEdges,
    id_map: Mapping[int, int],
    sim_config: SimConfig = None,
    accounting: Accounting = None,
) -> ReshuffledEdges:
    """Routes every edge the cluster knows to the member responsible for the edge's tail.

    Known edges are those incident to a member and the learned outside edges. Each is sent
    once, by the smallest member that knows it.
    """
    members = _members_by_id(id_map)
    responsibility = ResponsibilityMap(g.n, c.k)

    sender: Dict[Edge, int] = {}
    for u in members:
        for w in sorted(g.neighbors(u)):
            sender.setdefault(edge_key(u, w), u)
    for u in members:
        for e in sorted(learned.by_node.get(u, {})):
            sender.setdefault(e, u)

    def messages():
        for e, src in sorted(sender.items()):
            owner = members[responsibility.owner_of(g.tail(e)) - 1]
            yield src, owner, e

    channel = ClusterChannel.for_cluster(c, g.n, sim_config, phase="reshuffle")
    inboxes, _ = cluster_route(channel, messages(), accounting)
    owned = {id_map[dst]: sorted(e for _, e in items) for dst, items in inboxes.items()}

    shuffled = ReshuffledEdges(
        responsibility,
        owned,
        owner_cap=max(float(g.n) ** d, g.max_out_degree) * responsibility.block,
    )
    if shuffled.max_owned > shuffled.owner_cap:
        heaviest = max(owned, key=lambda i: (len(owned[i]), -i))
        logger.warning(
            "Cluster %d: owner %d holds %d edges, above %.1f",
            c.id,
            members[heaviest - 1],
            shuffled.max_owned,
            shuffled.owner_cap,
        )
        if accounting is not None:
            accounting.record_violation(
                members[heaviest - 1], "reshuffle", shuffled.owner_cap, shuffled.max_owned
            )
    return shuffled


def broadcast_partition(
    c: Cluster,
    n: int,
    num_parts: int,
    responsibility: ResponsibilityMap,
    id_map: Mapping[int, int],
    seed: int = 0,
    sim_config: SimConfig = None,
    accounting: Accounting = None,
) -> NodePartition:
    """Owners draw the parts of the nodes they simulate and tell every cluster member."""
    members = _members_by_id(id_map)

    def messages():
        for new_id, owner in enumerate(members, start=1):
            nodes = responsibility.owned(new_id)
            if not len(nodes):
                continue
            rng = node_rng(derive_seed(seed, c.id), owner)
            parts = rng.integers(0, num_parts, size=len(nodes)).tolist()
            for v, part in zip(nodes, parts):
                for dst in members:
                    yield owner, dst, (v, part)

    channel = ClusterChannel.for_cluster(c, n, sim_config, phase="partition")
    inboxes, _ = cluster_route(channel, messages(), accounting)
    views = [{v: part for _, (v, part) in inboxes.get(u, [])} for u in members]
    if any(view != views[0] for view in views) or len(views[0]) != n:
        raise RuntimeError(f"Cluster {c.id} members disagree on the node partition.")
    return NodePartition(num_parts, views[0], seed)


def cluster_list_kp(
    c: Cluster,
    g: Graph,
    p: int,
    d: float,
    learned: LearnedEdges,
    id_map: Mapping[int, int],
    seed: int = 0,
    sim_config: SimConfig = None,
    accounting: Accounting = None,
) -> Set[CliqueInstance]:
    """Lists every p-clique inside the cluster's known edges with ceil(k^(1/p)) parts."""
    accounting = accounting if accounting is not None else Accounting()
    shuffled = reshuffle(c, g, d, learned, id_map, sim_config, accounting)
    num_parts = ceil_root(c.k, p)
    partition = broadcast_partition(
        c, g.n, num_parts, shuffled.responsibility, id_map, seed, sim_config, accounting
    )
    owned = {
        new_id: [(e, False) for e in edges] for new_id, edges in shuffled.owned.items()
    }
    channel = ClusterChannel.for_cluster(c, g.n, sim_config, phase="listing")
    result = list_by_tuples(
        owned, _members_by_id(id_map), partition, p, channel, accounting
    )
    return result.cliques


def k4_light_listing(
    clusters: Sequence[Cluster],
    classifications: Mapping[int, NeighborClassification],
    g: Graph,
    seed: int = 0,
    sim_config: SimConfig = None,
    accounting: Accounting = None,
) -> Set[CliqueInstance]:
    """Every C-light node lists the K_4s through itself and two of its cluster neighbors.

    Clusters are served one after the other. A light node v sends its cluster neighbors to
    each of its neighbors, who reply with adjacency bits; v then knows every edge between
    N(v) and its cluster neighbors.
    """
    cliques: Set[CliqueInstance] = set()
    for c in clusters:
        classification = classifications[c.id]
        queries: Dict[int, Dict[int, List[int]]] = {}
        for v in sorted(classification.light):
            contacts = classification.contacts.get(v, [])
            if len(contacts) < 2:
                continue
            targets = {y: [u for u in contacts if u != y] for y in sorted(g.neighbors(v))}
            queries[v] = {y: ids for y, ids in targets.items() if ids}
        if not queries:
            continue
        engine = RoundEngine(
            graph=g, seed=seed, config=sim_config, accounting=accounting, phase="light-listing"
        )
        contexts = engine.run(ProbeExchange(queries))
        for v in sorted(queries):
            known = set(contexts[v].state["adjacent"])
            known |= {edge_key(v, y) for y in g.neighbors(v)}
            cliques |= cliques_containing(v, known, 4)
    return cliques


@dataclass
class ClusterStepResult:
    cliques: Set[CliqueInstance] = field(default_factory=set)
    goals: Dict[int, GoalEdgeSet] = field(default_factory=dict)
    diagnostics: List[ClusterDiagnostics] = field(default_factory=list)

    @property
    def bad_edges(self) -> Set[Edge]:
        return {e for goals in self.goals.values() for e in goals.bad_edges}

    @property
    def bad_fraction(self) -> float:
        cluster_edges = sum(len(gs.goal) + len(gs.bad_edges) for gs in self.goals.values())
        return len(self.bad_edges) / cluster_edges if cluster_edges else 0.0


class ClusterStrategy(Registrable):
    """Lists, for every cluster of a decomposition, the p-cliques with a goal edge in it."""

    variant = "kp"
    defer_bad_edges = True
    probe_light = True

    def __init__(self, config: ListingConfig = None, sim_config: SimConfig = None):
        self.config = config or ListingConfig()
        self.sim_config = sim_config or SimConfig()

    def thresholds(self, n: int, d: float) -> ClusterThresholds:
        return ClusterThresholds.for_step(n, d, self.config, self.variant)

    def local_listing(
        self,
        clusters: Sequence[Cluster],
        classifications: Mapping[int, NeighborClassification],
        g: Graph,
        seed: int,
        accounting: Accounting,
    ) -> Set[CliqueInstance]:
        return set()

    def list_clusters(
        self,
        g: Graph,
        part: EdgePartition,
        p: int,
        d: float,
        seed: int = 0,
        accounting: Accounting = None,
    ) -> ClusterStepResult:
        accounting = accounting if accounting is not None else Accounting()
        clusters = part.clusters
        if not clusters:
            return ClusterStepResult()

        thresholds = self.thresholds(g.n, d)
        classifications = classify_clusters(
            clusters, g, thresholds, seed, self.sim_config, accounting
        )
        goals = {}
        for c in clusters:
            if self.defer_bad_edges:
                goals[c.id] = mark_bad_edges(c, classifications[c.id], part)
            else:
                goals[c.id] = GoalEdgeSet(c.id, part.cluster_edges(c.id), set())

        learned = import_outside_edges(
            clusters,
            classifications,
            g,
            thresholds,
            probe=self.probe_light,
            seed=seed,
            sim_config=self.sim_config,
            accounting=accounting,
        )
        id_maps = assign_cluster_ids(clusters, g.n, accounting, self.sim_config)

        result = ClusterStepResult(goals=goals)
        per_cluster = []
        for c, id_map in zip(clusters, id_maps):
            acc = Accounting()
            result.cliques |= cluster_list_kp(
                c, g, p, d, learned[c.id], id_map, derive_seed(seed, c.id), self.sim_config, acc
            )
            per_cluster.append(acc)
            diagnostics = ClusterDiagnostics.collect(
                c, classifications[c.id], goals[c.id], learned[c.id], acc
            )
            result.diagnostics.append(diagnostics)
            logger.debug("Cluster diagnostics: %s", diagnostics.to_json())
        accounting.absorb(Accounting.parallel(per_cluster))

        result.cliques |= self.local_listing(clusters, classifications, g, seed, accounting)
        return result


@ClusterStrategy.register("kp", ListingConfig)
class KpClusterStrategy(ClusterStrategy):
    pass


@ClusterStrategy.register("k4", ListingConfig)
class K4ClusterStrategy(ClusterStrategy):
    """Heavy threshold n^(d-1/3), no bad-edge deferral, C-light nodes list locally."""

    variant = "k4"
    defer_bad_edges = False
    probe_light = False

    def list_clusters(self, g, part, p, d, seed=0, accounting=None):
        if p != 4:
            raise ValueError(f"The k4 strategy lists K_4 only, got p={p}.")
        return super().list_clusters(g, part, p, d, seed, accounting)

    def local_listing(self, clusters, classifications, g, seed, accounting):
        return k4_light_listing(clusters, classifications, g, seed, self.sim_config, accounting)
