from collections import defaultdict, deque
from typing import Mapping, Sequence

from kplist.graph.graph import Edge, edge_key
from kplist.sim.engine import NodeContext, Protocol, QueuedProtocol, pack_bits, unpack_bits

ANNOUNCE, STATUS = 0, 1
QUERY, REPLY = 0, 1


class ClassifyNeighbors(Protocol):
    """Cluster nodes announce their cluster to outside neighbors, who answer with a heavy bit.

    After the run an outside node holds `counts[cid]`, its number of neighbors in cluster cid,
    and `announced[u] = cid` for every announcing neighbor. A cluster node holds `status[v]`,
    1 if v is heavy for its cluster.
    """

    def __init__(self, cluster_of: Mapping[int, int], heavy_threshold: float):
        self.cluster_of = cluster_of
        self.heavy_threshold = heavy_threshold

    def setup(self, ctx: NodeContext):
        cid = self.cluster_of.get(ctx.node)
        ctx.state.update(cluster=cid, counts=defaultdict(int), announced={}, status={})
        if cid is None:
            return
        for u in sorted(ctx.neighbors):
            if self.cluster_of.get(u) != cid:
                ctx.enqueue(u, ANNOUNCE, cid)

    def step(self, ctx: NodeContext):
        announcements = []
        for msg in ctx.inbox:
            kind, value = msg.payload
            if kind == ANNOUNCE:
                ctx.state["counts"][value] += 1
                ctx.state["announced"][msg.src] = value
                announcements.append(msg)
            else:
                ctx.state["status"][msg.src] = value
        for msg in announcements:
            heavy = ctx.state["counts"][msg.payload[1]] > self.heavy_threshold
            ctx.enqueue(msg.src, STATUS, int(heavy))
        ctx.flush()
        if not ctx.has_pending:
            ctx.halt()


class HeavyImport(QueuedProtocol):
    """Heavy outside nodes push chunks of their out-edges to their cluster neighbors."""

    def __init__(self, chunks: Mapping[int, Mapping[int, Sequence[Edge]]]):
        self.chunks = chunks

    def setup(self, ctx: NodeContext):
        ctx.state["imported"] = []
        for dst, edges in sorted(self.chunks.get(ctx.node, {}).items()):
            for e in edges:
                ctx.enqueue(dst, *e)

    def on_message(self, ctx: NodeContext, msg):
        ctx.state["imported"].append(edge_key(*msg.payload))


class ProbeExchange(Protocol):
    """A querier sends a neighbor lists of node IDs; the neighbor answers, per listed node,
    whether the two are adjacent.

    Lists are cut into chunks of `message_words - 1` IDs behind a query tag, answers come back as
    packed bitmaps behind a reply tag. Replies on an edge arrive in query order, so the querier
    matches them against its own FIFO of outstanding chunks. `adjacent` collects the confirmed
    edges.
    """

    def __init__(self, queries: Mapping[int, Mapping[int, Sequence[int]]]):
        self.queries = queries

    def setup(self, ctx: NodeContext):
        ctx.state["adjacent"] = set()
        ctx.state["awaiting"] = defaultdict(deque)
        width = ctx.message_words - 1
        if width < 1:
            raise ValueError("Probing needs messages of at least two fields.")
        for target, ids in sorted(self.queries.get(ctx.node, {}).items()):
            for start in range(0, len(ids), width):
                chunk = tuple(ids[start : start + width])
                ctx.enqueue(target, QUERY, *chunk)
                ctx.state["awaiting"][target].append(chunk)

    def step(self, ctx: NodeContext):
        for msg in ctx.inbox:
            kind, *words = msg.payload
            if kind == QUERY:
                bits = [int(w in ctx.neighbors) for w in words]
                ctx.enqueue(msg.src, REPLY, *pack_bits(bits, ctx.word_bits))
            else:
                chunk = ctx.state["awaiting"][msg.src].popleft()
                for w, bit in zip(chunk, unpack_bits(words, len(chunk), ctx.word_bits)):
                    if bit:
                        ctx.state["adjacent"].add(edge_key(msg.src, w))
        ctx.flush()
        if not ctx.has_pending:
            ctx.halt()


def outstanding(state) -> int:
    """Number of query chunks still unanswered at a node after a ProbeExchange run."""
    return sum(len(q) for q in state["awaiting"].values())
