import itertools

import numpy as np
import pytest

from kplist.decomposition import EdgeLabel, expander_decompose
from kplist.graph import (
    Graph,
    brute_force_list_kp,
    build_generator,
    degeneracy_orient,
    generate,
)
from kplist.listing import (
    ClusterStrategy,
    ClusterThresholds,
    LearnTag,
    ListingConfig,
    NeighborClassification,
    classify,
    import_outside_edges,
    mark_bad_edges,
    reshuffle,
)
from kplist.listing.cluster import (
    broadcast_partition,
    heavy_chunks,
    k4_light_listing,
    light_probe_queries,
)
from kplist.listing.protocols import ProbeExchange, outstanding
from kplist.sim import Accounting, LearnCapExceeded, assign_cluster_ids
from kplist.sim.engine import run_protocol


def _oriented(n, tails):
    """Graph whose orientation is given as {(u, v): tail}."""
    edges = {tuple(sorted(e)): t for e, t in tails.items()}
    return Graph(n, frozenset(edges), edges)


@pytest.fixture
def star_graph():
    """Cluster K5 on 0..4; node 5 sees all of it and owns edges to 6..10."""
    tails = {(u, v): u for u in range(5) for v in range(u + 1, 5)}
    tails.update({(u, 5): u for u in range(5)})
    tails.update({(5, v): 5 for v in range(6, 11)})
    return _oriented(11, tails)


@pytest.fixture
def probe_graph():
    """Cluster K4 on 0..3; light outsiders 4 and 5 close a K4 with the edge (0, 1)."""
    tails = {(u, v): u for u in range(4) for v in range(u + 1, 4)}
    tails.update({(0, 4): 4, (1, 4): 4, (0, 5): 5, (1, 5): 5, (4, 5): 4})
    return _oriented(6, tails)


def test_isolated_cluster_classification(make_cluster):
    g, cluster, _ = make_cluster(generate("complete:6"), range(6))
    acc = Accounting()
    thresholds = ClusterThresholds(heavy=1.0, light=1.0, learn_cap=10.0)
    result = classify(cluster, g, thresholds, accounting=acc)
    assert result.g_count == {}
    assert result.heavy == set()
    assert result.bad == set()
    assert all(result.outside_neighbors[v] == [] for v in range(6))
    assert acc.rounds_by_phase == {}


def test_heavy_classification(make_cluster, star_graph):
    g, cluster, _ = make_cluster(star_graph, range(5))
    acc = Accounting()
    thresholds = ClusterThresholds(heavy=2.0, light=10.0, learn_cap=100.0)
    result = classify(cluster, g, thresholds, accounting=acc)
    assert result.g_count == {5: 5}
    assert result.heavy == {5}
    assert result.light == set()
    assert result.contacts[5] == [0, 1, 2, 3, 4]
    assert result.outside_neighbors[0] == [5]
    assert result.u_light[0] == 0
    # announce, then the heavy bit
    assert acc.rounds_by_phase == {"classify": 2}


def test_heavy_chunks_split_evenly(make_cluster, star_graph):
    g, cluster, _ = make_cluster(star_graph, range(5))
    thresholds = ClusterThresholds(heavy=2.0, light=10.0, learn_cap=100.0)
    classifications = {0: classify(cluster, g, thresholds)}
    chunks = heavy_chunks([cluster], classifications, g)
    assert chunks == {5: {u: [(5, u + 6)] for u in range(5)}}

    acc = Accounting()
    learned = import_outside_edges(
        [cluster], classifications, g, thresholds, probe=False, accounting=acc
    )[0]
    assert learned.edges() == {(5, v) for v in range(6, 11)}
    assert all(learned.count(u) == 1 for u in range(5))
    assert learned.histogram() == {"heavy-import": 5, "light-probe": 0}
    assert acc.rounds_by_phase["heavy-import"] == 1


def test_learn_cap(make_cluster, star_graph):
    g, cluster, _ = make_cluster(star_graph, range(5))
    thresholds = ClusterThresholds(heavy=2.0, light=10.0, learn_cap=0.5)
    classifications = {0: classify(cluster, g, thresholds)}
    acc = Accounting()
    with pytest.raises(LearnCapExceeded):
        import_outside_edges([cluster], classifications, g, thresholds, accounting=acc)
    assert acc.violations[-1].budget == 0.5


def test_probe_exchange():
    g = generate("complete:4")
    g = Graph(6, g.edges | {(0, 4), (4, 5), (1, 4)})
    protocol = ProbeExchange({0: {4: [5, 1, 2]}})
    states, acc = run_protocol(g, protocol, phase="light-probe")
    assert states[0]["adjacent"] == {(4, 5), (1, 4)}
    assert outstanding(states[0]) == 0
    # two query chunks out, then two replies back
    assert acc.rounds_by_phase["light-probe"] == 3


def test_light_probe_learns_outside_edge(make_cluster, probe_graph):
    g, cluster, _ = make_cluster(probe_graph, range(4))
    thresholds = ClusterThresholds(heavy=3.0, light=10.0, learn_cap=100.0)
    classification = classify(cluster, g, thresholds)
    assert classification.light == {4, 5}
    assert classification.light_neighbors[0] == [4, 5]

    queries = light_probe_queries([cluster], {0: classification})
    assert queries[0] == {4: [5], 5: [4]}
    assert 2 not in queries

    learned = import_outside_edges([cluster], {0: classification}, g, thresholds)[0]
    assert learned.by_node[0] == {(4, 5): LearnTag.LIGHT_PROBE}
    assert learned.by_node[1] == {(4, 5): LearnTag.LIGHT_PROBE}


def test_bad_nodes_do_not_probe(make_cluster, probe_graph):
    g, cluster, part = make_cluster(probe_graph, range(4))
    thresholds = ClusterThresholds(heavy=3.0, light=1.5, learn_cap=100.0)
    classification = classify(cluster, g, thresholds)
    assert classification.u_light == {0: 2, 1: 2, 2: 0, 3: 0}
    assert classification.bad == {0, 1}
    assert light_probe_queries([cluster], {0: classification}) == {}

    goals = mark_bad_edges(cluster, classification, part)
    assert goals.bad_edges == {(0, 1)}
    assert len(goals.goal) == 5
    assert part.labels[(0, 1)] == EdgeLabel.R
    assert (0, 1) not in part.edge_cluster


def test_mark_bad_edges_needs_both_endpoints(make_cluster):
    _, cluster, part = make_cluster(generate("complete:5"), range(5))
    classification = NeighborClassification(cluster_id=0, bad={2})
    goals = mark_bad_edges(cluster, classification, part)
    assert goals.bad_edges == set()
    assert len(goals.goal) == 10


def test_reshuffle_and_partition(make_cluster, star_graph):
    g, cluster, _ = make_cluster(star_graph, range(5))
    thresholds = ClusterThresholds(heavy=2.0, light=10.0, learn_cap=100.0)
    classifications = {0: classify(cluster, g, thresholds)}
    learned = import_outside_edges(
        [cluster], classifications, g, thresholds, probe=False
    )[0]
    (id_map,) = assign_cluster_ids([cluster], g.n)

    acc = Accounting()
    shuffled = reshuffle(cluster, g, 1.0, learned, id_map, accounting=acc)
    held = [e for edges in shuffled.owned.values() for e in edges]
    assert sorted(held) == sorted(g.edges)
    for new_id, edges in shuffled.owned.items():
        assert all(shuffled.responsibility.owner_of(g.tail(e)) == new_id for e in edges)
    assert shuffled.responsibility.block == 3
    assert not acc.violations

    partition = broadcast_partition(
        cluster, g.n, 2, shuffled.responsibility, id_map, seed=3, accounting=acc
    )
    assert set(partition.assignment) == set(range(g.n))
    assert set(partition.assignment.values()) <= {0, 1}
    assert acc.rounds_by_phase["partition"] >= 1


def test_cluster_k6_lists_all_k4(make_cluster):
    g, _, part = make_cluster(generate("complete:6"), range(6))
    acc = Accounting()
    strategy = ClusterStrategy.get_class_by_name("kp")()
    result = strategy.list_clusters(g, part, 4, 0.9, accounting=acc)
    assert len(result.cliques) == 15
    assert result.bad_fraction == 0.0
    assert result.diagnostics[0].k == 6
    assert result.diagnostics[0].goal_edges == 15
    assert {"cluster-ids", "partition", "listing"} <= set(acc.rounds_by_phase)


def test_kp_strategy_with_probe(make_cluster, probe_graph):
    g, _, part = make_cluster(probe_graph, range(4))
    config = ListingConfig(heavy_factor=2.0, light_factor=10.0)
    strategy = ClusterStrategy.get_class_by_name("kp")(config)
    result = strategy.list_clusters(g, part, 4, 1.0)
    assert result.cliques == brute_force_list_kp(g, 4)
    assert len(result.cliques) == 2


def test_k4_strategy_lists_through_light_nodes(make_cluster, probe_graph):
    g, cluster, part = make_cluster(probe_graph, range(4))
    strategy = ClusterStrategy.get_class_by_name("k4")()
    assert strategy.thresholds(g.n, 1.0).heavy == pytest.approx(6 ** (2 / 3))

    acc = Accounting()
    result = strategy.list_clusters(g, part, 4, 1.0, accounting=acc)
    assert result.cliques == brute_force_list_kp(g, 4)
    assert result.bad_edges == set()
    assert "light-listing" in acc.rounds_by_phase
    assert "light-probe" not in acc.rounds_by_phase

    with pytest.raises(ValueError):
        strategy.list_clusters(g, part, 5, 1.0)


def test_k4_light_listing_alone(make_cluster, probe_graph):
    g, cluster, _ = make_cluster(probe_graph, range(4))
    thresholds = ClusterThresholds(heavy=3.0, light=10.0, learn_cap=100.0)
    classifications = {0: classify(cluster, g, thresholds)}
    found = k4_light_listing([cluster], classifications, g)
    assert {c.nodes for c in found} == {(0, 1, 4, 5)}


@pytest.mark.parametrize("spec,p", [("gnp:30:0.5:3", 4), ("planted:36:5:2:0.35:1", 5)])
def test_every_clique_with_a_goal_edge_is_listed(spec, p):
    g, _ = degeneracy_orient(generate(spec))
    part = expander_decompose(g, 0.5)
    assert part.clusters
    strategy = ClusterStrategy.get_class_by_name("kp")()
    result = strategy.list_clusters(g, part, p, 1.0, seed=2)

    goal_edges = {e for goals in result.goals.values() for e in goals.goal}
    expected = brute_force_list_kp(g, p)
    assert result.cliques <= expected
    for clique in expected:
        if any(e in goal_edges for e in clique.edges()):
            assert clique in result.cliques


def test_empty_decomposition_lists_nothing():
    g, _ = degeneracy_orient(generate("gnp:20:0.05:1"))
    part = expander_decompose(g, 0.5)
    result = ClusterStrategy.get_class_by_name("kp")().list_clusters(g, part, 4, 1.0)
    assert result.cliques == set()
    assert result.bad_fraction == 0.0


def _certificate_graph(i):
    """Cluster K_k on 0..k-1 with heavy outsiders adjacent to all of it and light outsiders
    adjacent to 0 and 1 only.

    Heavy-heavy outside edges have a heavy tail; edges leaving a light outsider have it as tail.
    """
    rng = np.random.default_rng(i)
    k = 5 + i % 4
    heavy = list(range(k, k + 2 + i % 3))
    light = list(range(heavy[-1] + 1, heavy[-1] + 3 + i % 2))
    tails = {(u, v): u for u, v in itertools.combinations(range(k), 2)}
    for h in heavy:
        tails.update({(u, h): h for u in range(k)})
    for x in light:
        tails.update({(0, x): x, (1, x): x})
    tails.update({(a, b): a for a, b in itertools.combinations(heavy, 2)})
    for x in light:
        for h in heavy:
            if h == heavy[0] or rng.random() < 0.6:
                tails[(h, x)] = x
    for x, y in itertools.combinations(light, 2):
        if rng.random() < 0.5:
            tails[(x, y)] = x
    return _oriented(light[-1] + 1, tails), k


@pytest.mark.parametrize("i", range(20))
def test_learned_edges_complete_every_goal_clique(make_cluster, i):
    graph, k = _certificate_graph(i)
    g, cluster, part = make_cluster(graph, range(k))
    # odd instances make 0 and 1 bad, which turns (0, 1) into a deferred edge
    thresholds = ClusterThresholds(heavy=3.0, light=1.5 if i % 2 else 100.0, learn_cap=1e9)
    classification = classify(cluster, g, thresholds)
    goals = mark_bad_edges(cluster, classification, part)
    learned = import_outside_edges([cluster], {0: classification}, g, thresholds)[0]
    assert (classification.bad == {0, 1}) == bool(i % 2)

    inside = set(cluster.members)
    known = learned.edges()
    cases, misses = {"heavy-tail": 0, "light-tail": 0}, []
    for clique in brute_force_list_kp(g, 4):
        if not any(e in goals.goal for e in clique.edges()):
            continue
        for e in clique.edges():
            if e[0] in inside or e[1] in inside:
                continue
            cases["heavy-tail" if g.tail(e) in classification.heavy else "light-tail"] += 1
            if e not in known:
                misses.append((clique, e))
    assert misses == []
    assert cases["heavy-tail"] > 0
    assert (cases["light-tail"] > 0) == (i % 2 == 0)


@pytest.mark.slow
def test_bad_fraction_with_asymptotic_constants(make_cluster):
    generator = build_generator("planted:512:24:1:0.02:5")
    (planted,) = generator.planted_cliques()
    g, cluster, part = make_cluster(generator.generate(), planted.nodes)
    config = ListingConfig.asymptotic_constants()
    classification = classify(cluster, g, ClusterThresholds.for_step(g.n, 1.0, config))
    goals = mark_bad_edges(cluster, classification, part)
    fraction = len(goals.bad_edges) / (len(goals.goal) + len(goals.bad_edges))
    assert fraction <= config.bad_fraction_limit

    desk = classify(cluster, g, ClusterThresholds.for_step(g.n, 1.0, ListingConfig()))
    assert desk.u_light == classification.u_light
    assert desk.bad >= classification.bad
