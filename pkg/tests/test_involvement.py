"""Involvement-strategy tests: association, assistant choice, clustering."""

import logging
import math

import numpy as np
import pytest

from lpwansim import involvement as inv
from lpwansim.channel import ChannelParams
from lpwansim.errors import ConfigError


PARAMS = ChannelParams(pl0_db=51.2, ref_distance_m=10.0, exponent=3.5,
                       shadowing_sigma_db=0.0)


def test_associate_no_vehicles_degenerates_to_bs():
    d = inv.associate(0, (100.0, 100.0, 1.5), 99, (2000.0, 525.0, 10.0),
                      [], np.empty((0, 3)), PARAMS, None, 51.2, 14.0)
    assert d.target_kind == "BS" and d.target_id == 99


def test_associate_prefers_adjacent_vehicle():
    # vehicle 10 m away vs BS at 1 km with equal beacon EIRP: hand comparison
    # of the two path gains decides for the vehicle
    machine = (100.0, 100.0, 1.5)
    vehicle = np.array([[100.0, 110.0, 1.5]])
    bs = (1100.0, 100.0, 10.0)
    d = inv.associate(0, machine, 99, bs, [42], vehicle, PARAMS, None, 51.2, 14.0,
                      proximity_m=150.0)
    assert d.target_kind == "VEHICLE" and d.target_id == 42
    gain_v = -(51.2 + 35.0 * math.log10(10.0 / 10.0))
    assert d.beacon_rx_power_dbm == pytest.approx(14.0 + gain_v)


def test_associate_tie_breaks_to_lowest_vehicle_id():
    machine = (0.0, 0.0, 1.5)
    vehicles = np.array([[30.0, 0.0, 1.5], [-30.0, 0.0, 1.5]])
    d = inv.associate(0, machine, 99, (5000.0, 0.0, 10.0), [7, 3], vehicles,
                      PARAMS, None, 51.2, 14.0, proximity_m=200.0)
    assert d.target_kind == "VEHICLE"
    assert d.target_id == 3


def test_associate_out_of_proximity_vehicle_ignored():
    machine = (0.0, 0.0, 1.5)
    vehicles = np.array([[120.0, 0.0, 1.5]])
    d = inv.associate(0, machine, 99, (800.0, 0.0, 10.0), [4], vehicles,
                      PARAMS, None, 51.2, 14.0, proximity_m=100.0)
    assert d.target_kind == "BS"


def test_type1_degenerate_sizes():
    ids = np.arange(100, 150)
    rng = np.random.default_rng(0)
    assert inv.choose_type1_assistants(ids, 0, rng).size == 0
    assert set(inv.choose_type1_assistants(ids, 50, np.random.default_rng(0))) == set(ids)
    with pytest.raises(ConfigError):
        inv.choose_type1_assistants(ids, 51, rng)


def test_type1_deterministic_and_nested():
    ids = np.arange(200)
    a = inv.choose_type1_assistants(ids, 20, np.random.default_rng(5))
    b = inv.choose_type1_assistants(ids, 20, np.random.default_rng(5))
    assert np.array_equal(a, b)
    bigger = inv.choose_type1_assistants(ids, 50, np.random.default_rng(5))
    assert set(a) <= set(bigger)


def test_kmeans_single_cluster_centroid():
    pts = np.array([[0.0, 0.0], [0.0, 2.0], [2.0, 0.0], [2.0, 2.0]])
    centers, labels, wcss = inv.kmeans(pts, 1, np.random.default_rng(1))
    assert np.allclose(centers[0], [1.0, 1.0])
    assert wcss == pytest.approx(8.0)


def test_kmeans_k_equals_n_is_exact():
    rng = np.random.default_rng(2)
    pts = rng.uniform(0, 100, (12, 2))
    centers, labels, wcss = inv.kmeans(pts, 12, np.random.default_rng(3))
    assert wcss == pytest.approx(0.0, abs=1e-18)
    assert np.allclose(np.sort(centers, axis=0), np.sort(pts, axis=0))


def _lloyd_once(pts, k, rng):
    # independent plain Lloyd with uniform random init (restart oracle)
    centers = pts[rng.choice(len(pts), size=k, replace=False)].copy()
    for _ in range(200):
        d2 = ((pts[:, None, :] - centers[None, :, :]) ** 2).sum(2)
        lab = d2.argmin(1)
        new = centers.copy()
        for j in range(k):
            if (lab == j).any():
                new[j] = pts[lab == j].mean(0)
        if np.allclose(new, centers, atol=1e-9):
            centers = new
            break
        centers = new
    d2 = ((pts[:, None, :] - centers[None, :, :]) ** 2).sum(2)
    return d2.min(1).sum()


def test_kmeans_wcss_vs_1000_restart_oracle():
    # fixed 30-point instance: three well separated blobs plus stragglers
    rng = np.random.default_rng(77)
    blob = lambda cx, cy, n: rng.normal((cx, cy), 3.0, (n, 2))
    pts = np.vstack([blob(0, 0, 10), blob(60, 10, 10), blob(30, 70, 8),
                     [[15.0, 35.0], [45.0, 40.0]]])
    assert pts.shape == (30, 2)
    oracle_rng = np.random.default_rng(123)
    best = min(_lloyd_once(pts, 3, oracle_rng) for _ in range(1000))
    _, _, wcss = inv.kmeans(pts, 3, np.random.default_rng(9))
    assert wcss <= best * 1.01


def test_type2_pairs_assistants_with_centroids():
    rng = np.random.default_rng(4)
    pos = rng.uniform(0, 1000, (50, 2))
    sinr = np.full(50, 20.0)
    sinr[:20] = 3.0  # suffering
    out = inv.choose_type2_parking(pos, sinr, np.arange(500, 520), 4, 10.0,
                                   np.random.default_rng(5))
    assert len(out) == 4
    ids = [v for v, _ in out]
    assert len(set(ids)) == 4 and all(500 <= v < 520 for v in ids)


def test_type2_nan_counts_as_suffering():
    pos = np.array([[0.0, 0.0], [10.0, 0.0], [500.0, 500.0]])
    sinr = np.array([np.nan, 3.0, 30.0])
    out = inv.choose_type2_parking(pos, sinr, [1, 2, 3], 1, 10.0,
                                   np.random.default_rng(6))
    (vid, (x, y)), = out
    # centroid of the two suffering machines, not the healthy one
    assert x == pytest.approx(5.0) and y == pytest.approx(0.0)


def test_type2_empty_suffering_set_falls_back(caplog):
    pos = np.random.default_rng(7).uniform(0, 100, (10, 2))
    sinr = np.full(10, 30.0)
    with caplog.at_level(logging.WARNING):
        out = inv.choose_type2_parking(pos, sinr, [1, 2], 2, 10.0,
                                       np.random.default_rng(8))
    assert len(out) == 2
    assert any("clustering all machines" in r.message for r in caplog.records)


def test_type2_zero_assistants():
    assert inv.choose_type2_parking(np.zeros((3, 2)), np.zeros(3), [1], 0, 10.0,
                                    np.random.default_rng(9)) == []
