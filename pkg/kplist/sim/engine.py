import abc
from collections import defaultdict, deque
from dataclasses import dataclass
from typing import Any, Deque, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from kplist.graph.graph import Graph
from kplist.logging import logger
from kplist.sim.accounting import (
    Accounting,
    BandwidthExceeded,
    BudgetViolation,
    PayloadTooLarge,
)
from kplist.sim.config import SimConfig
from kplist.utils import node_rng

Payload = Tuple[int, ...]


@dataclass(frozen=True)
class Message:
    src: int
    dst: int
    payload: Payload


class NodeContext:
    """What a node sees during a round: its inbox, its neighbors, its own state and RNG."""

    def __init__(
        self,
        node: int,
        neighbors: FrozenSet[int],
        rng: np.random.Generator,
        engine: "RoundEngine",
    ):
        self.node = node
        self.neighbors = neighbors
        self.rng = rng
        self.state: Dict[str, Any] = {}
        self.inbox: List[Message] = []
        self.round = 0
        self.halted = False
        self._engine = engine
        self._pending: Dict[int, Deque[Payload]] = defaultdict(deque)

    @property
    def capacity(self) -> int:
        return self._engine.capacity

    @property
    def word_bits(self) -> int:
        return self._engine.word_bits

    @property
    def message_words(self) -> int:
        return self._engine.config.message_words

    def send(self, dst: int, *payload: int):
        self._engine._post(self, dst, tuple(payload))

    def enqueue(self, dst: int, *payload: int):
        self._pending[dst].append(tuple(payload))

    def flush(self):
        """Sends up to the per-edge capacity from every non-empty queue."""
        for dst in sorted(self._pending):
            queue = self._pending[dst]
            for _ in range(min(self.capacity, len(queue))):
                self.send(dst, *queue.popleft())
        for dst in [d for d, q in self._pending.items() if not q]:
            del self._pending[dst]

    @property
    def has_pending(self) -> bool:
        return any(self._pending.values())

    def halt(self):
        self.halted = True


class Protocol(abc.ABC):
    """Per-node program. `setup` runs once before round 1, `step` once per round."""

    def setup(self, ctx: NodeContext):
        pass

    @abc.abstractmethod
    def step(self, ctx: NodeContext):
        pass


class QueuedProtocol(Protocol):
    """Handles each delivered message, drains queues at capacity, halts when idle."""

    def on_message(self, ctx: NodeContext, msg: Message):
        pass

    def step(self, ctx: NodeContext):
        for msg in ctx.inbox:
            self.on_message(ctx, msg)
        ctx.flush()
        if not ctx.has_pending:
            ctx.halt()


class RoundEngine:
    """Synchronous rounds over `graph`, or over the complete graph on n nodes when `clique`.

    Messages sent in round t are delivered at the barrier and read in round t+1. A halted node
    is not stepped until a message wakes it up. The run ends once every node is halted and no
    message is in flight. Nodes step in ID order, so a run is a pure function of the seed.
    """

    def __init__(
        self,
        graph: Optional[Graph] = None,
        n: Optional[int] = None,
        clique: bool = False,
        seed: int = 0,
        config: SimConfig = None,
        accounting: Accounting = None,
        phase: str = "protocol",
    ):
        if graph is None and n is None:
            raise ValueError("RoundEngine needs a graph or a node count.")
        self.graph = graph
        self.n = graph.n if graph is not None else n
        self.clique = clique or graph is None
        self.seed = seed
        self.config = config or SimConfig()
        self.accounting = accounting if accounting is not None else Accounting()
        self.phase = phase
        self.capacity = self.config.edge_capacity(self.n)
        self.word_bits = self.config.word_bits(self.n)
        self.clock = 0
        self._round_load: Dict[Tuple[int, int], int] = defaultdict(int)
        self._outgoing: List[Message] = []

    def _neighbors(self, v: int) -> FrozenSet[int]:
        if self.clique:
            return frozenset(u for u in range(self.n) if u != v)
        return self.graph.neighbors(v)

    def _post(self, ctx: NodeContext, dst: int, payload: Payload):
        src = ctx.node
        if self.clique:
            if not (0 <= dst < self.n) or dst == src:
                raise ValueError(f"Node {src} cannot send to {dst}.")
        elif dst not in ctx.neighbors:
            raise ValueError(f"Node {src} is not adjacent to {dst}.")
        if len(payload) > self.config.message_words:
            self._abort(
                PayloadTooLarge, src, self.config.message_words, len(payload),
                f"payload of {len(payload)} fields",
            )
        limit = 1 << self.word_bits
        for word in payload:
            if not (0 <= word < limit):
                self._abort(
                    PayloadTooLarge, src, limit - 1, word,
                    f"field value {word} wider than {self.word_bits} bits",
                )
        self._round_load[(src, dst)] += 1
        if self._round_load[(src, dst)] > self.capacity:
            self._abort(
                BandwidthExceeded, src, self.capacity, self._round_load[(src, dst)],
                f"edge ({src}->{dst}) in round {self.clock}",
            )
        self._outgoing.append(Message(src, dst, payload))

    def _abort(self, error, node, budget, actual, what):
        self.accounting.record_violation(node, self.phase, budget, actual)
        raise error(f"[{self.phase}] node {node} exceeded its budget: {what}.")

    def run(self, protocol: Protocol) -> Dict[int, NodeContext]:
        contexts = {
            v: NodeContext(v, self._neighbors(v), node_rng(self.seed, v), self)
            for v in range(self.n)
        }
        for v in range(self.n):
            protocol.setup(contexts[v])

        in_flight: Dict[int, List[Message]] = {}
        rounds = 0
        while True:
            active = [
                v for v in range(self.n) if not contexts[v].halted or v in in_flight
            ]
            if not active:
                break
            if self.clock >= self.config.max_rounds:
                raise RuntimeError(
                    f"[{self.phase}] protocol did not terminate within {self.clock} rounds."
                )
            self.clock += 1
            self._round_load.clear()
            self._outgoing = []

            for v in active:
                ctx = contexts[v]
                ctx.inbox = in_flight.pop(v, [])
                if ctx.inbox:
                    ctx.halted = False
                ctx.round = self.clock
                protocol.step(ctx)

            if self._outgoing:
                rounds += 1
                sent: Dict[int, int] = defaultdict(int)
                received: Dict[int, int] = defaultdict(int)
                for msg in self._outgoing:
                    in_flight.setdefault(msg.dst, []).append(msg)
                    sent[msg.src] += 1
                    received[msg.dst] += 1
                self.accounting.record_messages(self.phase, sent, received)

        for ctx in contexts.values():
            ctx.inbox = []
        if rounds:
            self.accounting.charge(self.phase, rounds)
        logger.debug("[%s] finished after %d communication rounds", self.phase, rounds)
        return contexts


def run_protocol(
    g: Graph,
    protocol: Protocol,
    phase: str = "protocol",
    seed: int = 0,
    config: SimConfig = None,
    accounting: Accounting = None,
    clique: bool = False,
) -> Tuple[Dict[int, Dict[str, Any]], Accounting]:
    """Runs `protocol` to completion and returns each node's final state with the accounting."""
    engine = RoundEngine(
        graph=None if clique else g,
        n=g.n,
        clique=clique,
        seed=seed,
        config=config,
        accounting=accounting,
        phase=phase,
    )
    contexts = engine.run(protocol)
    return {v: ctx.state for v, ctx in contexts.items()}, engine.accounting


def pack_bits(bits: Sequence[int], word_bits: int) -> Payload:
    words = []
    for start in range(0, len(bits), word_bits):
        word = 0
        for i, bit in enumerate(bits[start : start + word_bits]):
            word |= (1 if bit else 0) << i
        words.append(word)
    return tuple(words)


def unpack_bits(words: Iterable[int], count: int, word_bits: int) -> List[int]:
    bits = []
    for word in words:
        for i in range(word_bits):
            bits.append((word >> i) & 1)
    return bits[:count]


__all__ = [
    "BudgetViolation",
    "Message",
    "NodeContext",
    "Protocol",
    "QueuedProtocol",
    "RoundEngine",
    "pack_bits",
    "run_protocol",
    "unpack_bits",
]
