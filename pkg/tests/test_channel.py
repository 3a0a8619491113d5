"""Channel model unit tests: path gain, shadowing determinism, SINR."""

import math

import numpy as np
import pytest

from lpwansim import channel as ch


def _params(**kw):
    base = dict(pl0_db=38.0, ref_distance_m=1.0, exponent=3.5,
                shadowing_sigma_db=0.0, shadowing_corr_m=50.0)
    base.update(kw)
    return ch.ChannelParams(**base)


def test_log_distance_hand_value():
    # -(38 + 10*3.5*log10(100)) = -108 dB
    p = _params()
    g = ch.path_gain(p, (0, 0, 0), (100, 0, 0))
    assert g == pytest.approx(-108.0, abs=1e-12)


def test_reference_distance_anchor():
    p = _params()
    assert ch.path_gain(p, (0, 0, 0), (1, 0, 0)) == pytest.approx(-38.0)


def test_near_field_clamp():
    p = _params()
    assert ch.path_gain(p, (0, 0, 0), (0.01, 0, 0)) == pytest.approx(-38.0)


def test_shadowed_gain_is_frozen_per_replication():
    p = _params(shadowing_sigma_db=8.0)
    field = ch.ShadowField(seed=5, sigma_db=8.0, corr_m=50.0)
    a, b = (10.0, 20.0, 1.5), (300.0, 400.0, 10.0)
    g1 = ch.path_gain(p, a, b, field)
    g2 = ch.path_gain(p, a, b, field)
    assert g1 == g2
    # same seed, fresh field object: still identical
    field2 = ch.ShadowField(seed=5, sigma_db=8.0, corr_m=50.0)
    assert ch.path_gain(p, a, b, field2) == g1
    # different seed differs
    field3 = ch.ShadowField(seed=6, sigma_db=8.0, corr_m=50.0)
    assert ch.path_gain(p, a, b, field3) != g1


def test_shadow_link_is_symmetric():
    p = _params(shadowing_sigma_db=8.0)
    field = ch.ShadowField(seed=5, sigma_db=8.0, corr_m=50.0)
    a, b = (10.0, 20.0, 1.5), (300.0, 400.0, 10.0)
    assert ch.path_gain(p, a, b, field) == ch.path_gain(p, b, a, field)


def test_gauss_many_matches_gauss_at():
    field = ch.ShadowField(seed=11, sigma_db=8.0, corr_m=50.0)
    rng = np.random.default_rng(0)
    xs = rng.uniform(0, 1050, 64)
    ys = rng.uniform(0, 1050, 64)
    bulk = field.gauss_many(xs, ys)
    for x, y, v in zip(xs, ys, bulk):
        assert field.gauss_at(x, y) == pytest.approx(v, abs=1e-12)


def test_shadow_spatial_correlation_decays():
    field = ch.ShadowField(seed=2, sigma_db=8.0, corr_m=50.0)
    rng = np.random.default_rng(1)
    xs = rng.uniform(100, 900, 4000)
    ys = rng.uniform(100, 900, 4000)
    g = field.gauss_many(xs, ys)
    g_near = field.gauss_many(xs + 5.0, ys)
    g_far = field.gauss_many(np.mod(xs + 500.0, 1000.0), ys)
    r_near = np.corrcoef(g, g_near)[0, 1]
    r_far = np.corrcoef(g, g_far)[0, 1]
    assert r_near > 0.9
    assert abs(r_far) < 0.15


def test_noise_power():
    p = _params()
    assert ch.noise_power_dbm(p, 100.0) == pytest.approx(-154.0)
    assert ch.noise_power_dbm(p, 1e6, 5.0) == pytest.approx(-109.0)


def test_sinr_no_interferers_hand_value():
    # Prx -110 dBm over 100 Hz: SINR = -110 - (-154) = 44 dB
    assert ch.sinr_db(-110.0, [], -154.0) == pytest.approx(44.0, abs=1e-9)


def test_sinr_equal_power_interferer_near_zero():
    s = ch.sinr_db(-90.0, [-90.0], -200.0)
    assert s == pytest.approx(0.0, abs=1e-6)


def test_sinr_monotone_in_interference():
    base = ch.sinr_db(-100.0, [-120.0], -150.0)
    more = ch.sinr_db(-100.0, [-120.0, -125.0], -150.0)
    fewer = ch.sinr_db(-100.0, [], -150.0)
    assert more < base < fewer


def test_torus_distance():
    assert ch.distance_3d((1049.0, 0, 0), (1.0, 0, 0), wrap_xy=(1050.0, 1050.0)) \
        == pytest.approx(2.0)
    assert ch.distance_3d((1049.0, 0, 0), (1.0, 0, 0)) == pytest.approx(1048.0)


def test_free_space_anchor():
    # 868 MHz at 1 m: 20 log10(4 pi f / c) ~ 31.2 dB
    v = ch.free_space_pl0_db(868e6, 1.0)
    assert v == pytest.approx(20 * math.log10(4 * math.pi * 868e6 / 299792458.0), abs=1e-12)
    assert v == pytest.approx(31.2, abs=0.1)


def test_deterministic_geometry_without_shadowing():
    p = _params(shadowing_sigma_db=0.0)
    field = ch.ShadowField(seed=1, sigma_db=0.0, corr_m=50.0)
    g = ch.path_gain(p, (0, 0, 1.5), (30, 40, 11.5))
    expected = -(38.0 + 35.0 * math.log10(math.sqrt(30**2 + 40**2 + 10**2)))
    assert g == pytest.approx(expected, abs=1e-12)
    assert ch.path_gain(p, (0, 0, 1.5), (30, 40, 11.5), field) == g
