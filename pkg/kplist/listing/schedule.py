import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Union

from kplist.logging import logger

Number = Union[int, Fraction]


@dataclass(frozen=True)
class LogExponent:
    """An exponent `const + (per_log + loglog * log2(log2 n)) / log2 n`, kept exact."""

    const: Fraction = Fraction(0)
    per_log: Fraction = Fraction(0)
    loglog: Fraction = Fraction(0)

    def __post_init__(self):
        for name in ("const", "per_log", "loglog"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))

    def __add__(self, other: Union["LogExponent", Number]) -> "LogExponent":
        other = _lift(other)
        return LogExponent(
            self.const + other.const,
            self.per_log + other.per_log,
            self.loglog + other.loglog,
        )

    __radd__ = __add__

    def __neg__(self) -> "LogExponent":
        return LogExponent(-self.const, -self.per_log, -self.loglog)

    def __sub__(self, other: Union["LogExponent", Number]) -> "LogExponent":
        return self + (-_lift(other))

    def __rsub__(self, other: Number) -> "LogExponent":
        return _lift(other) - self

    def __mul__(self, scalar: Number) -> "LogExponent":
        scalar = Fraction(scalar)
        return LogExponent(self.const * scalar, self.per_log * scalar, self.loglog * scalar)

    __rmul__ = __mul__

    def value(self, n: int) -> float:
        log_n = math.log2(n)
        return float(self.const) + (
            float(self.per_log) + float(self.loglog) * math.log2(log_n)
        ) / log_n

    def power(self, n: int) -> float:
        return float(n) ** self.value(n)

    def __str__(self):
        return f"{self.const} + ({self.per_log} + {self.loglog}·loglog n)/log n"


def _lift(x: Union[LogExponent, Number]) -> LogExponent:
    return x if isinstance(x, LogExponent) else LogExponent(const=Fraction(x))


EPSILON0 = LogExponent(0, 1, 1)
LOGLOG_OVER_LOG = LogExponent(0, 0, 1)


def epsilon(k: int) -> LogExponent:
    return (k + 1) * EPSILON0 - k * LOGLOG_OVER_LOG


def delta(k: int) -> LogExponent:
    return 1 - epsilon(k)


def d(k: int) -> LogExponent:
    return delta(k) + EPSILON0


@dataclass(frozen=True)
class ScheduleStep:
    k: int
    d: LogExponent
    delta: LogExponent


class IterationSchedule:
    """Outer steps that lower the out-degree bound from n^(d_k) to n^(d_(k+1)).

    The `kp` variant stops once delta_k <= max(p/(p+2), 3/4); the `k4` variant once
    delta_k <= 2/3. With `forced_depth` the predicate is ignored and exactly that many steps run,
    as long as delta_k stays positive.
    """

    def __init__(
        self, n: int, p: int, variant: str = "kp", forced_depth: Optional[int] = None
    ):
        if variant not in ("kp", "k4"):
            raise ValueError(f"Unknown schedule variant {variant}.")
        self.n = n
        self.p = p
        self.variant = variant
        self.forced_depth = forced_depth

    @property
    def stop_threshold(self) -> float:
        if self.variant == "k4":
            return 2 / 3
        return max(self.p / (self.p + 2), 3 / 4)

    @property
    def max_steps(self) -> int:
        if self.n < 4:
            return 0
        return int(math.floor(math.log2(self.n)))

    def stops(self, k: int) -> bool:
        return delta(k).value(self.n) <= self.stop_threshold

    @property
    def forced(self) -> bool:
        return self.forced_depth is not None

    def steps(self) -> List[ScheduleStep]:
        out = []
        for k in range(self.max_steps):
            if self.forced:
                if k >= self.forced_depth:
                    break
                if delta(k).value(self.n) <= 0:
                    logger.warning(
                        "Forced depth %d truncated to %d: delta_%d is not positive at n=%d",
                        self.forced_depth,
                        k,
                        k,
                        self.n,
                    )
                    break
            elif self.stops(k):
                break
            out.append(ScheduleStep(k, d(k), delta(k)))
        return out

    def terminal_d(self) -> LogExponent:
        """Exponent bounding the residual out-degree after all steps."""
        return d(len(self.steps())) if self.max_steps else LogExponent(1)
