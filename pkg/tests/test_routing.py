import pytest

from kplist.decomposition import Cluster
from kplist.sim import (
    Accounting,
    ClusterChannel,
    LoadCapExceeded,
    SimConfig,
    assign_cluster_ids,
    cluster_route,
)


@pytest.fixture
def channel():
    cluster = Cluster(0, tuple(range(8)), 0.5)
    config = SimConfig(routing_polylog_factor=2.0)
    return ClusterChannel.for_cluster(cluster, 16, config, phase="reshuffle")


def test_channel_cost(channel):
    assert channel.n_delta == 4.0
    assert channel.cost(0) == 0
    assert channel.cost(1) == 2
    assert channel.cost(4) == 2
    assert channel.cost(9) == 6
    assert channel.load_cap == 256 * 4.0 * 16


def test_cluster_route_delivers_and_charges(channel):
    acc = Accounting()
    messages = [(0, 1, "a"), (2, 1, "b"), (3, 3, "self"), (1, 0, "c")]
    inboxes, rounds = cluster_route(channel, messages, acc)
    assert inboxes[1] == [(0, "a"), (2, "b")]
    assert inboxes[3] == [(3, "self")]
    assert inboxes[0] == [(1, "c")]
    # node 1 receives 2 and sends 1; the self message is free
    assert rounds == 2
    assert acc.rounds_by_phase == {"reshuffle": 2}
    assert acc.messages_by_phase == {"reshuffle": 3}
    assert acc.max_load_by_phase == {"reshuffle": 2}


def test_cluster_route_self_only_is_free(channel):
    acc = Accounting()
    _, rounds = cluster_route(channel, [(4, 4, 0)] * 100, acc)
    assert rounds == 0
    assert acc.rounds_by_phase == {}


def test_cluster_route_rejects_outsiders(channel):
    with pytest.raises(ValueError):
        cluster_route(channel, [(0, 12, 0)])


def test_cluster_route_load_cap():
    cluster = Cluster(0, (0, 1, 2), 0.5)
    channel = ClusterChannel.for_cluster(cluster, 16, SimConfig(load_cap_factor=0.25))
    assert channel.load_cap == 16.0
    acc = Accounting()
    cluster_route(channel, [(0, 1, i) for i in range(16)], acc)
    with pytest.raises(LoadCapExceeded):
        cluster_route(channel, [(0, 1, i) for i in range(17)], acc)
    assert acc.violations[-1].node == 0
    assert acc.violations[-1].actual == 17.0


def test_clique_channel_is_uncapped():
    channel = ClusterChannel.for_clique(8)
    assert channel.load_cap is None
    assert channel.n_delta == 8.0
    _, rounds = cluster_route(channel, [(0, 1, i) for i in range(20)])
    assert rounds == 3


def test_assign_cluster_ids():
    clusters = [Cluster(0, (5, 9, 2), 0.5), Cluster(1, (7, 3), 0.5)]
    acc = Accounting()
    mappings = assign_cluster_ids(clusters, 16, acc)
    assert mappings[0] == {2: 1, 5: 2, 9: 3}
    assert mappings[1] == {3: 1, 7: 2}
    assert acc.rounds_by_phase == {"cluster-ids": 16}

    with pytest.raises(ValueError):
        assign_cluster_ids([Cluster(2, (), 0.5)], 16)
