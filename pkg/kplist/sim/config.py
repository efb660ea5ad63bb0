import math
import os
from dataclasses import dataclass

from kplist.serializable import Serializable
from kplist.utils import ceil_log2, polylog


@dataclass
class SimConfig(Serializable):
    # a CONGEST edge carries bandwidth_factor * ceil(log2 n) bits per direction per round
    bandwidth_factor: int = int(os.getenv("KPLIST_BANDWIDTH_FACTOR", 3))
    # fields per message, each ceil(log2 n) bits wide
    message_words: int = 3
    # charged rounds per unit of normalized cluster load; None means ceil(log2 n)^2
    routing_polylog_factor: float = (
        float(os.environ["KPLIST_ROUTING_POLYLOG_FACTOR"])
        if "KPLIST_ROUTING_POLYLOG_FACTOR" in os.environ
        else None
    )
    load_cap_factor: float = float(os.getenv("KPLIST_LOAD_CAP_FACTOR", 256))
    clique_routing_factor: float = 1.0
    decomposition_factor: float = 1.0
    polylog_exponent: int = 2
    max_rounds: int = 1_000_000

    def word_bits(self, n: int) -> int:
        return ceil_log2(n)

    def edge_capacity(self, n: int) -> int:
        """Messages per edge per direction per round."""
        bandwidth_bits = self.bandwidth_factor * ceil_log2(n)
        message_bits = self.message_words * ceil_log2(n)
        return max(1, math.ceil(bandwidth_bits / message_bits))

    def routing_factor(self, n: int) -> float:
        if self.routing_polylog_factor is not None:
            return self.routing_polylog_factor
        return float(ceil_log2(n) ** 2)

    def polylog(self, n: int) -> int:
        return polylog(n, self.polylog_exponent)
