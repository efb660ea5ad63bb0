from kplist.graph.generators import GraphGenerator, build_generator, generate
from kplist.graph.graph import (
    CliqueInstance,
    Edge,
    Graph,
    edge_key,
    edge_subgraph,
    read_edge_list,
    restrict,
    write_edge_list,
)
from kplist.graph.oracle import brute_force_list_kp, enumerate_cliques
from kplist.graph.orientation import (
    OrientationCertificate,
    degeneracy_orient,
    ensure_oriented,
)
