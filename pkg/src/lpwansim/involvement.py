"""User-involvement strategies: relay association and assistant selection.

Type 1 recruits a random subset of vehicles that keep driving and relay
opportunistically.  Type 2 first finds the machines with inadequate baseline
connection quality, clusters their positions, and parks one assistant at the
street point nearest each cluster center for the whole replication.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import channel as ch
from .errors import ConfigError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AssociationDecision:
    machine_id: int
    target_kind: str           # "BS" or "VEHICLE"
    target_id: int
    beacon_rx_power_dbm: float
    decided_at: float


def associate(machine_id: int, machine_pos, bs_id: int, bs_pos,
              vehicle_ids, vehicle_pos, params: ch.ChannelParams,
              shadow, pl0_db: float, beacon_eirp_dbm: float,
              decided_at: float = 0.0, proximity_m: float = math.inf,
              wrap_xy=None) -> AssociationDecision:
    """Pick the uplink target with the strongest received beacon.

    Candidates are the BS plus every assisting vehicle within its service
    proximity; ties break toward the BS and then toward the lowest vehicle id
    (candidates are evaluated in that order and only a strictly stronger
    beacon displaces the choice).  Machine-to-vehicle geometry uses the torus
    metric when wrap_xy is given.
    """
    best_id, best_kind = bs_id, "BS"
    best_rx = beacon_eirp_dbm + ch.path_gain(params, bs_pos, machine_pos, shadow, pl0_db)
    order = np.argsort(np.asarray(vehicle_ids))
    for j in order:
        if ch.distance_3d(vehicle_pos[j], machine_pos, wrap_xy) > proximity_m:
            continue
        rx = beacon_eirp_dbm + ch.path_gain(params, vehicle_pos[j], machine_pos,
                                            shadow, pl0_db, wrap_xy)
        if rx > best_rx:
            best_id, best_kind, best_rx = int(vehicle_ids[j]), "VEHICLE", rx
    return AssociationDecision(machine_id, best_kind, best_id, best_rx, decided_at)


def choose_type1_assistants(vehicle_ids, n_assisting: int,
                            rng: np.random.Generator) -> np.ndarray:
    """Uniform random subset of vehicles that will assist while driving.

    Implemented as a prefix of a seeded permutation, so sweeps over
    n_assisting with a common seed get nested assistant sets (smaller counts
    are subsets of larger ones), which keeps SINR monotone comparisons tight.
    """
    ids = np.asarray(vehicle_ids)
    if n_assisting > ids.size:
        raise ConfigError(f"n_assisting {n_assisting} exceeds vehicle count {ids.size}")
    perm = rng.permutation(ids)
    return np.sort(perm[:n_assisting])


def kmeans(points: np.ndarray, k: int, rng: np.random.Generator,
           max_iter: int = 100, tol_m: float = 0.1, n_init: int = 10):
    """Lloyd k-means with seeded k-means++ restarts (best WCSS wins).

    Returns (centers, labels, wcss).  Empty clusters are re-seeded on the
    point farthest from its current center.
    """
    pts = np.asarray(points, dtype=float)
    n = pts.shape[0]
    if not (1 <= k <= n):
        raise ConfigError(f"k must lie in [1, {n}], got {k}")
    best = None
    for _ in range(max(1, n_init)):
        out = _lloyd(pts, k, rng, max_iter, tol_m)
        if best is None or out[2] < best[2]:
            best = out
    return best


def _lloyd(pts, k, rng, max_iter, tol_m):
    n = pts.shape[0]
    centers = np.empty((k, pts.shape[1]))
    centers[0] = pts[rng.integers(n)]
    d2 = np.sum((pts - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0:
            centers[j] = pts[rng.integers(n)]
        else:
            centers[j] = pts[np.searchsorted(np.cumsum(d2 / total), rng.random())]
        d2 = np.minimum(d2, np.sum((pts - centers[j]) ** 2, axis=1))
    labels = np.zeros(n, dtype=np.int64)
    for _ in range(max_iter):
        dist2 = np.sum((pts[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        labels = np.argmin(dist2, axis=1)
        new_centers = centers.copy()
        for j in range(k):
            members = labels == j
            if members.any():
                new_centers[j] = pts[members].mean(axis=0)
            else:
                far = np.argmax(dist2[np.arange(n), labels])
                new_centers[j] = pts[far]
        shift = np.sqrt(np.sum((new_centers - centers) ** 2, axis=1)).max()
        centers = new_centers
        if shift <= tol_m:
            break
    dist2 = np.sum((pts[:, None, :] - centers[None, :, :]) ** 2, axis=2)
    labels = np.argmin(dist2, axis=1)
    wcss = float(dist2[np.arange(n), labels].sum())
    return centers, labels, wcss


def choose_type2_parking(machine_pos_2d: np.ndarray, baseline_sinr_db: np.ndarray,
                         vehicle_ids, n_assisting: int, sinr_threshold_db: float,
                         rng: np.random.Generator):
    """Cluster the suffering machines and pair parked assistants to centers.

    baseline_sinr_db holds NaN for machines that produced no baseline sample;
    those count as suffering (no evidence of adequate connectivity).  If no
    machine suffers, falls back to clustering the whole population.
    Returns a list of (vehicle_id, (x, y) parking target).
    """
    ids = np.asarray(vehicle_ids)
    if n_assisting > ids.size:
        raise ConfigError(f"n_assisting {n_assisting} exceeds vehicle count {ids.size}")
    if n_assisting == 0:
        return []
    sinr = np.asarray(baseline_sinr_db, dtype=float)
    suffering = np.isnan(sinr) | (sinr < sinr_threshold_db)
    if not suffering.any():
        log.warning("no machine below %.1f dB baseline SINR; clustering all machines",
                    sinr_threshold_db)
        suffering = np.ones(sinr.size, dtype=bool)
    pts = np.asarray(machine_pos_2d, dtype=float)[suffering]
    k = min(n_assisting, pts.shape[0])
    centers, _, _ = kmeans(pts, k, rng)
    chosen = choose_type1_assistants(ids, n_assisting, rng)
    return [(int(chosen[i]), (float(centers[i % k, 0]), float(centers[i % k, 1])))
            for i in range(n_assisting)]
