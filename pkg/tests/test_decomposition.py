import json

import numpy as np
import pytest

from kplist.decomposition import (
    DecompositionConfig,
    EdgeLabel,
    EdgePartition,
    conductance_certificate,
    cut_conductance,
    exact_conductance,
    expander_decompose,
    spectral_gap,
    sweep_cut,
    verify_decomposition,
)
from kplist.graph import generate
from kplist.sim import Accounting

K4_EDGES = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
PATH_EDGES = [(0, 1), (1, 2), (2, 3)]


def test_exact_conductance():
    assert exact_conductance(range(4), K4_EDGES) == pytest.approx(2 / 3)
    assert exact_conductance(range(4), PATH_EDGES) == pytest.approx(1 / 3)
    assert cut_conductance({0}, range(4), K4_EDGES) == pytest.approx(1.0)
    assert exact_conductance([7], []) == 0.0


def test_spectral_certificate_is_a_lower_bound():
    g = generate("gnp:14:0.5:3")
    members = [v for v in range(g.n) if g.degree(v) > 0]
    exact = conductance_certificate(members, g.edges, exact_limit=2**14)
    spectral = conductance_certificate(members, g.edges, exact_limit=1)
    assert spectral <= exact + 1e-9


def test_power_iteration_matches_dense():
    g = generate("barbell:5")
    members = list(range(g.n))
    dense, _ = spectral_gap(members, g.edges, dense_limit=2048)
    iterated, _ = spectral_gap(members, g.edges, dense_limit=1, iterations=3000)
    assert iterated == pytest.approx(dense, rel=0.05, abs=1e-3)


def test_sweep_cut_finds_the_bridge():
    g = generate("barbell:6")
    side, phi = sweep_cut(list(range(g.n)), g.edges)
    assert side in ({0, 1, 2, 3, 4, 5}, {6, 7, 8, 9, 10, 11})
    assert phi == pytest.approx(1 / 31)


def test_decompose_complete_graph():
    g = generate("complete:10")
    part = expander_decompose(g, 0.5)
    assert len(part.clusters) == 1
    assert part.clusters[0].members == tuple(range(10))
    assert part.M == set(g.edges)
    assert verify_decomposition(g, part).passed


def test_decompose_barbell():
    g = generate("barbell:8")
    acc = Accounting()
    part = expander_decompose(g, 0.5, accounting=acc)
    report = verify_decomposition(g, part)
    assert report.passed, report.details
    assert len(part.clusters) == 2
    assert part.labels[(7, 8)] != EdgeLabel.M
    assert len(part.M) == 56
    # n^(1 - delta) * ceil(log2 n)^2
    assert acc.rounds_by_phase == {"decomposition": 64}


def test_decompose_sparse_graph_is_all_s():
    g = generate("gnp:40:0.05:2")
    part = expander_decompose(g, 0.5)
    assert part.clusters == []
    assert part.S == set(g.edges)
    assert max(part.s_out_degrees().values(), default=0) <= 40**0.5
    assert verify_decomposition(g, part).passed


def test_decompose_empty_graph():
    acc = Accounting()
    part = expander_decompose(generate("empty:8"), 0.5, accounting=acc)
    assert part.labels == {}
    assert acc.total_rounds == 0


@pytest.mark.parametrize(
    "spec", ["gnp:30:0.4:1", "gnp:48:0.2:5", "planted:40:6:3:0.1:2"]
)
def test_decompose_random_graphs_verify(spec):
    g = generate(spec)
    for delta in (0.4, 0.6):
        part = expander_decompose(g, delta, DecompositionConfig())
        report = verify_decomposition(g, part)
        assert report.passed, report.details
        assert set(part.labels) == set(g.edges)


def test_decompose_rejects_bad_delta():
    with pytest.raises(ValueError):
        expander_decompose(generate("complete:4"), 1.0)


def test_verify_detects_broken_partitions():
    g = generate("barbell:8")
    part = expander_decompose(g, 0.5)

    broken = EdgePartition.from_dict(part.to_dict())
    del broken.labels[(0, 1)]
    assert not verify_decomposition(g, broken).checks["labels_total"]

    broken = EdgePartition.from_dict(part.to_dict())
    for e in list(broken.labels):
        broken.relabel(e, EdgeLabel.R)
    report = verify_decomposition(g, broken)
    assert not report.checks["r_bound"]
    assert "r_bound" in report.details

    broken = EdgePartition.from_dict(part.to_dict())
    broken.relabel((0, 1), EdgeLabel.S)
    assert not verify_decomposition(g, broken).checks["s_out_degree"]


def test_partition_json_round_trip():
    g = generate("barbell:8")
    part = expander_decompose(g, 0.5)
    loaded = EdgePartition.from_dict(json.loads(part.to_json()))
    assert loaded == part
    assert loaded.node_cluster() == part.node_cluster()
    assert loaded.s_graph().edges == part.S


def test_relabel_unknown_edge():
    part = expander_decompose(generate("complete:5"), 0.5)
    with pytest.raises(KeyError):
        part.relabel((0, 9), EdgeLabel.R)
    with pytest.raises(KeyError):
        part.cluster(42)
    assert np.isclose(part.phi_min, DecompositionConfig().resolve_phi(5))
