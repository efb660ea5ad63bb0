from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional

from kplist.serializable import Serializable


class BudgetViolation(RuntimeError):
    """A protocol tried to use more than its communication budget."""


class BandwidthExceeded(BudgetViolation):
    pass


class PayloadTooLarge(BudgetViolation):
    pass


class LoadCapExceeded(BudgetViolation):
    pass


class LearnCapExceeded(BudgetViolation):
    pass


@dataclass
class Violation(Serializable):
    node: int
    phase: str
    budget: float
    actual: float


@dataclass
class Accounting(Serializable):
    """Round and message bookkeeping of a simulated execution.

    Rounds are kept per phase label, in first-charged order. Message counters are kept per node
    and per phase; `max_load_by_phase` holds the largest per-node send or receive count seen in
    a single charged step of that phase.
    """

    rounds_by_phase: Dict[str, int] = field(default_factory=dict)
    sent: Dict[int, int] = field(default_factory=dict)
    received: Dict[int, int] = field(default_factory=dict)
    messages_by_phase: Dict[str, int] = field(default_factory=dict)
    max_load_by_phase: Dict[str, int] = field(default_factory=dict)
    violations: List[Violation] = field(default_factory=list)
    metrics: Dict[str, float] = field(default_factory=dict)

    @property
    def total_rounds(self) -> int:
        return sum(self.rounds_by_phase.values())

    @property
    def total_messages(self) -> int:
        return sum(self.messages_by_phase.values())

    def charge(self, phase: str, rounds: int):
        self.rounds_by_phase[phase] = self.rounds_by_phase.get(phase, 0) + int(rounds)

    def record_messages(
        self, phase: str, sent: Dict[int, int], received: Dict[int, int]
    ):
        for node, count in sent.items():
            self.sent[node] = self.sent.get(node, 0) + count
        for node, count in received.items():
            self.received[node] = self.received.get(node, 0) + count
        self.messages_by_phase[phase] = self.messages_by_phase.get(phase, 0) + sum(
            sent.values()
        )
        load = max(list(sent.values()) + list(received.values()) + [0])
        self.max_load_by_phase[phase] = max(self.max_load_by_phase.get(phase, 0), load)

    def record_violation(self, node: int, phase: str, budget: float, actual: float):
        self.violations.append(Violation(node, phase, float(budget), float(actual)))

    def absorb(self, other: "Accounting", prefix: Optional[str] = None):
        """Sequential composition: `other` ran after everything already recorded."""
        for phase, rounds in other.rounds_by_phase.items():
            self.charge(_join(prefix, phase), rounds)
        self._merge_messages(other, prefix)
        return self

    @classmethod
    def parallel(
        cls, accounts: Iterable["Accounting"], prefix: Optional[str] = None
    ) -> "Accounting":
        """Concurrent composition: each phase costs the slowest participant."""
        merged = cls()
        for acc in accounts:
            for phase, rounds in acc.rounds_by_phase.items():
                key = _join(prefix, phase)
                merged.rounds_by_phase[key] = max(merged.rounds_by_phase.get(key, 0), rounds)
            merged._merge_messages(acc, prefix)
        return merged

    def _merge_messages(self, other: "Accounting", prefix: Optional[str]):
        for node, count in other.sent.items():
            self.sent[node] = self.sent.get(node, 0) + count
        for node, count in other.received.items():
            self.received[node] = self.received.get(node, 0) + count
        for phase, count in other.messages_by_phase.items():
            key = _join(prefix, phase)
            self.messages_by_phase[key] = self.messages_by_phase.get(key, 0) + count
        for phase, load in other.max_load_by_phase.items():
            key = _join(prefix, phase)
            self.max_load_by_phase[key] = max(self.max_load_by_phase.get(key, 0), load)
        self.violations.extend(other.violations)
        for name, value in other.metrics.items():
            self.metrics[_join(prefix, name)] = value

    def message_histogram(self, which: str = "received") -> Dict[int, int]:
        """Number of nodes per message count."""
        counts = self.received if which == "received" else self.sent
        return dict(sorted(Counter(counts.values()).items()))

    def phase_rows(self) -> List[Dict]:
        return [
            {
                "phase": phase,
                "rounds": rounds,
                "messages": self.messages_by_phase.get(phase, 0),
                "max_load": self.max_load_by_phase.get(phase, 0),
            }
            for phase, rounds in self.rounds_by_phase.items()
        ]

    def asdict(self, skip_fields=None):
        data = super().asdict(skip_fields=skip_fields)
        data["total_rounds"] = self.total_rounds
        data["total_messages"] = self.total_messages
        data["histogram"] = {
            "sent": self.message_histogram("sent"),
            "received": self.message_histogram("received"),
        }
        return data


def _join(prefix: Optional[str], name: str) -> str:
    return f"{prefix}/{name}" if prefix else name


def phase_of(key: str) -> str:
    """Last component of a prefixed phase key."""
    return key.rsplit("/", 1)[-1]
