"""Uplink application traffic: strictly periodic per machine, random phase."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MessageEvent:
    machine_id: int
    created_at: float
    payload_B: int


def schedule(machine_id: int, payload_B: int, period_s: float, sim_duration_s: float,
             rng: np.random.Generator) -> list[MessageEvent]:
    """Periodic message events for one machine over [0, duration).

    The initial phase is uniform in [0, period) so the population does not
    burst in lockstep.
    """
    phase = rng.uniform(0.0, period_s)
    times = np.arange(phase, sim_duration_s, period_s)
    return [MessageEvent(machine_id, float(t), payload_B) for t in times]


def expected_event_count(phase: float, period_s: float, duration_s: float) -> int:
    """Closed-form count of events in [0, duration) given the phase."""
    if phase >= duration_s:
        return 0
    return math.ceil((duration_s - phase) / period_s)


def schedule_all(payloads: np.ndarray, periods: np.ndarray, sim_duration_s: float,
                 rng: np.random.Generator):
    """Vectorized schedule for a machine population.

    Returns (machine_idx, times, payload_B) sorted by time, plus per-machine
    phases (the duty-cycle warm start needs them).  Phases are drawn in
    machine-index order, so results are reproducible for a given stream.
    """
    n = payloads.size
    phases = rng.uniform(0.0, periods)
    counts = np.where(phases < sim_duration_s,
                      np.ceil((sim_duration_s - phases) / periods).astype(np.int64), 0)
    total = int(counts.sum())
    machine_idx = np.repeat(np.arange(n), counts)
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    k = np.arange(total) - np.repeat(starts, counts)
    times = phases[machine_idx] + k * periods[machine_idx]
    payload = payloads[machine_idx]
    order = np.argsort(times, kind="stable")
    return machine_idx[order], times[order], payload[order], phases
