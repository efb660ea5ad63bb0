import math
from fractions import Fraction

import pytest

from kplist.listing.schedule import (
    EPSILON0,
    IterationSchedule,
    LogExponent,
    d,
    delta,
    epsilon,
)


def test_log_exponent_arithmetic():
    a = LogExponent(Fraction(1, 2), 1, 0)
    b = LogExponent(0, 2, 1)
    assert a + b == LogExponent(Fraction(1, 2), 3, 1)
    assert (a - a) == LogExponent()
    assert 1 - a == LogExponent(Fraction(1, 2), -1, 0)
    assert 2 * b == LogExponent(0, 4, 2)
    assert LogExponent(1).power(1024) == pytest.approx(1024.0)


def test_log_exponent_value():
    n = 2**16
    # log2 n = 16, log2 log2 n = 4
    assert EPSILON0.value(n) == pytest.approx((1 + 4) / 16)
    assert LogExponent(Fraction(3, 4)).value(n) == pytest.approx(0.75)


@pytest.mark.parametrize("k", [0, 1, 2, 5])
def test_d_minus_delta_is_epsilon0(k):
    assert d(k) - delta(k) == EPSILON0
    assert delta(k) == 1 - epsilon(k)


def test_epsilon_grows_with_k():
    n = 2**20
    values = [epsilon(k).value(n) for k in range(4)]
    assert values == sorted(values)
    assert d(0).value(n) == pytest.approx(1.0)


def test_strict_schedule_is_empty_at_small_n():
    schedule = IterationSchedule(256, 4)
    assert schedule.steps() == []
    assert schedule.terminal_d().value(256) == pytest.approx(1.0)


def test_strict_schedule_runs_at_large_n():
    n = 2**64
    schedule = IterationSchedule(n, 4)
    steps = schedule.steps()
    assert steps
    assert [s.k for s in steps] == list(range(len(steps)))
    assert all(s.delta.value(n) > schedule.stop_threshold for s in steps)
    assert schedule.stops(len(steps))


def test_stop_thresholds():
    assert IterationSchedule(1024, 4).stop_threshold == pytest.approx(3 / 4)
    assert IterationSchedule(1024, 8).stop_threshold == pytest.approx(8 / 10)
    assert IterationSchedule(1024, 4, "k4").stop_threshold == pytest.approx(2 / 3)
    with pytest.raises(ValueError):
        IterationSchedule(1024, 4, "k5")


def test_forced_depth():
    schedule = IterationSchedule(16, 4, forced_depth=2)
    assert schedule.forced
    steps = schedule.steps()
    assert [s.k for s in steps] == [0]
    assert steps[0].delta.value(16) > 0
    assert delta(1).value(16) <= 0

    assert len(IterationSchedule(2**20, 4, forced_depth=2).steps()) == 2
    assert IterationSchedule(2**20, 4, forced_depth=0).steps() == []


def test_tiny_graphs_have_no_steps():
    schedule = IterationSchedule(3, 4, forced_depth=3)
    assert schedule.max_steps == 0
    assert schedule.steps() == []
    assert schedule.terminal_d() == LogExponent(1)
    assert IterationSchedule(1024, 4).max_steps == math.floor(math.log2(1024))
