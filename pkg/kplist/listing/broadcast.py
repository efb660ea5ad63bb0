from typing import Set, Tuple

from kplist.graph.graph import CliqueInstance, Graph, edge_key
from kplist.graph.oracle import cliques_containing
from kplist.sim.accounting import Accounting
from kplist.sim.config import SimConfig
from kplist.sim.engine import NodeContext, QueuedProtocol, RoundEngine


class EdgeFlood(QueuedProtocol):
    """Each node sends its out-edges, or with `full` all its edges, to every neighbor."""

    def __init__(self, graph: Graph, full: bool = False):
        self.graph = graph
        self.full = full

    def setup(self, ctx: NodeContext):
        v = ctx.node
        incident = sorted(edge_key(v, u) for u in ctx.neighbors)
        ctx.state["known"] = set(incident)
        edges = incident if self.full else self.graph.out_edges[v]
        for u in sorted(ctx.neighbors):
            for e in edges:
                if u not in e:
                    ctx.enqueue(u, *e)

    def on_message(self, ctx: NodeContext, msg):
        ctx.state["known"].add(edge_key(*msg.payload))


def flood_and_list(
    g: Graph,
    p: int,
    full: bool = False,
    seed: int = 0,
    sim_config: SimConfig = None,
    accounting: Accounting = None,
    phase: str = "broadcast",
) -> Tuple[Set[CliqueInstance], int]:
    """Floods edges and lets every node list the p-cliques containing itself.

    With out-edges only, a node still hears every edge between two of its neighbors, since one
    of them is the tail. Returns the cliques and the rounds charged.
    """
    accounting = accounting if accounting is not None else Accounting()
    if not full and not g.is_oriented:
        raise ValueError("Out-edge flooding needs an oriented graph.")
    before = accounting.rounds_by_phase.get(phase, 0)
    engine = RoundEngine(
        graph=g, seed=seed, config=sim_config, accounting=accounting, phase=phase
    )
    contexts = engine.run(EdgeFlood(g, full=full))

    cliques: Set[CliqueInstance] = set()
    for v in range(g.n):
        if g.degree(v) >= p - 1:
            cliques |= cliques_containing(v, contexts[v].state["known"], p)
    return cliques, accounting.rounds_by_phase.get(phase, 0) - before
