"""Traffic generation tests: periodic schedules with random phase."""

import numpy as np
import pytest

from lpwansim import traffic


def test_stationary_count_600s():
    # period 5 s over 600 s: always exactly 120 events regardless of phase
    rng = np.random.default_rng(0)
    for _ in range(50):
        events = traffic.schedule(0, 10, 5.0, 600.0, rng)
        assert len(events) == 120
        assert all(e.payload_B == 10 for e in events)


def test_wearable_single_event_at_phase_zero():
    class FixedRng:
        def uniform(self, lo, hi):
            return 0.0
    events = traffic.schedule(7, 100, 60.0, 59.0, FixedRng())
    assert len(events) == 1
    assert events[0].created_at == 0.0
    assert events[0].payload_B == 100


def test_total_offered_count_oracle():
    # 2000 stationary over 600 s -> 240000 events via the vectorized path
    payloads = np.full(2000, 10)
    periods = np.full(2000, 5.0)
    rng = np.random.default_rng(1)
    machine, times, payload, phases = traffic.schedule_all(payloads, periods, 600.0, rng)
    assert machine.size == 240_000
    # matches the per-machine closed form
    expected = sum(traffic.expected_event_count(p, 5.0, 600.0) for p in phases)
    assert machine.size == expected


def test_events_strictly_increasing_per_machine():
    payloads = np.array([10, 100, 10])
    periods = np.array([5.0, 60.0, 7.0])
    machine, times, payload, phases = traffic.schedule_all(payloads, periods, 300.0, np.random.default_rng(2))
    for m in range(3):
        tm = times[machine == m]
        assert np.all(np.diff(tm) > 0)
        assert tm.min() >= 0.0 and tm.max() < 300.0
        assert tm.min() == pytest.approx(phases[m])


def test_no_event_outside_horizon():
    rng = np.random.default_rng(3)
    events = traffic.schedule(0, 10, 5.0, 17.3, rng)
    assert all(0.0 <= e.created_at < 17.3 for e in events)


def test_deterministic_given_stream():
    a = traffic.schedule_all(np.full(10, 10), np.full(10, 5.0), 100.0, np.random.default_rng(9))
    b = traffic.schedule_all(np.full(10, 10), np.full(10, 5.0), 100.0, np.random.default_rng(9))
    for x, y in zip(a, b):
        assert np.array_equal(x, y)
