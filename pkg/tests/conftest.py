import json

import networkx as nx
import pytest

from kplist.decomposition.partition import Cluster, EdgeLabel, EdgePartition
from kplist.graph import CliqueInstance, Graph, degeneracy_orient, generate


def to_networkx(g: Graph) -> nx.Graph:
    nxg = nx.Graph()
    nxg.add_nodes_from(range(g.n))
    nxg.add_edges_from(g.edges)
    return nxg


def nx_cliques(g: Graph, p: int):
    """Reference listing through networkx, independent of the package oracle."""
    found = set()
    for clique in nx.enumerate_all_cliques(to_networkx(g)):
        if len(clique) > p:
            break
        if len(clique) == p:
            found.add(CliqueInstance.of(clique))
    return found


@pytest.fixture(scope="session")
def nx_oracle():
    return nx_cliques


@pytest.fixture(scope="session")
def nx_degeneracy():
    """Largest core number, computed by networkx."""

    def _degeneracy(g: Graph) -> int:
        return max(nx.core_number(to_networkx(g)).values(), default=0)

    return _degeneracy


@pytest.fixture(scope="session")
def corpus():
    """Small seeded graphs covering dense, sparse, planted and structured inputs."""
    specs = [
        "complete:8",
        "empty:12",
        "gnp:24:0.3:1",
        "gnp:30:0.5:2",
        "planted:40:5:2:0.05:3",
        "bipartite:10:10:0.6:4",
        "barbell:6",
    ]
    return {spec: generate(spec) for spec in specs}


@pytest.fixture
def make_cluster():
    """Builds (oriented graph, partition) with `members` as the only cluster.

    Edges inside the cluster are M-edges, all others are S-edges oriented like the graph.
    """

    def _make(g: Graph, members, delta: float = 0.5):
        oriented = g if g.orientation else degeneracy_orient(g)[0]
        members = tuple(sorted(members))
        inside = set(members)
        cluster = Cluster(0, members, delta, 1.0)
        labels, edge_cluster, s_orientation = {}, {}, {}
        for e in sorted(oriented.edges):
            if e[0] in inside and e[1] in inside:
                labels[e] = EdgeLabel.M
                edge_cluster[e] = 0
            else:
                labels[e] = EdgeLabel.S
                s_orientation[e] = oriented.tail(e)
        part = EdgePartition(
            n=g.n,
            delta=delta,
            labels=labels,
            clusters=[cluster],
            edge_cluster=edge_cluster,
            s_orientation=s_orientation,
            phi_min=0.01,
        )
        return oriented, cluster, part

    return _make


@pytest.fixture
def config_file(tmp_path):
    """Writes a run config to a temporary JSON file and returns its path."""

    def _write(**kwargs):
        path = tmp_path / "run.json"
        path.write_text(json.dumps(kwargs))
        return str(path)

    return _write
