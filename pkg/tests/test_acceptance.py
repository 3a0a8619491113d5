"""Acceptance suite: every exit criterion at desk scale, one line per check.

Desk scale is 10 rounds x 600 s simulated per (RAT, involvement,
vehicle-count) point over the full default deployment (2,000 stationary +
3,000 wearable machines, 1,000 vehicles).  The trend criteria share one
session-scoped campaign matrix; the oracle and determinism criteria run
standalone.  Run with `pytest tests/test_acceptance.py -s` to see the
per-criterion PASS lines.
"""

import json
import hashlib
import math
import time

import numpy as np
import pytest

import lpwansim as L
import lpwansim.channel as ch
import lpwansim.engine as eng
from lpwansim.cli import main as cli_main
from lpwansim.engine import pilot_mean_sinr_db, run_campaign, run_replication
from lpwansim.metrics import aggregate
from lpwansim.rats import DUTY_WINDOW_S, load_profiles

RATS = ("SIGFOX", "LORAWAN", "HALOW", "NBIOT")
SWEEP = (0, 5, 10, 20, 50, 100, 200)
ROUNDS = 10
BASE_SEED = 101
WORKERS = 2
PROFILES = load_profiles()


def report(tag, ok, detail=""):
    print(f"ACCEPTANCE {tag}: {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, f"{tag} failed: {detail}"


def desk_cfg(rat, **kw):
    base = dict(rat=rat, seed=BASE_SEED, rounds=ROUNDS, sim_duration_s=600.0)
    base.update(kw)
    return L.ScenarioConfig(**base)


# ---------------------------------------------------------------------------
# shared campaign matrix (criteria 2, 4, 5)
# ---------------------------------------------------------------------------

@pytest.fixture(scope="session")
def matrix():
    """Calibrate every RAT, then run the full desk-scale sweep matrix."""
    out = {}
    for rat in RATS:
        t0 = time.time()
        cfg = desk_cfg(rat)
        d = L.calibrate_bs_distance(cfg, PROFILES[rat], workers=WORKERS)
        pilot_cfg = cfg.with_overrides(involvement=L.Involvement.BASELINE,
                                       n_assisting_vehicles=0,
                                       sim_duration_s=60.0, rounds=10)
        achieved = pilot_mean_sinr_db(pilot_cfg, PROFILES[rat], d,
                                      rounds=10, workers=WORKERS)
        base_cfg = cfg.with_overrides(involvement=L.Involvement.BASELINE,
                                      n_assisting_vehicles=0)
        baseline = run_campaign(base_cfg, ROUNDS, BASE_SEED, bs_distance_m=d,
                                workers=WORKERS)
        reports = {("BASELINE", 0): aggregate(baseline, baseline)}
        for inv in (L.Involvement.TYPE1, L.Involvement.TYPE2):
            for k in SWEEP:
                if k == 0:
                    reports[(inv.value, 0)] = aggregate(
                        baseline, baseline, involvement=inv.value, n_assisting=0)
                    continue
                c = cfg.with_overrides(involvement=inv, n_assisting_vehicles=k)
                logs = run_campaign(c, ROUNDS, BASE_SEED, bs_distance_m=d,
                                    workers=WORKERS)
                reports[(inv.value, k)] = aggregate(logs, baseline)
                del logs
        out[rat] = {"d": d, "achieved": achieved, "reports": reports,
                    "sweep_s": time.time() - t0}
        print(f"[matrix] {rat}: d*={d:.1f} m pilot={achieved:.2f} dB "
              f"sweep={out[rat]['sweep_s']:.0f}s")
    return out


# ---------------------------------------------------------------------------
# criterion 1: determinism
# ---------------------------------------------------------------------------

def test_c1_determinism(tmp_path):
    cfg = L.ScenarioConfig(n_stationary=60, n_wearable=90, n_vehicles=50,
                           n_pedestrians=90, rat="LORAWAN", rounds=3,
                           sim_duration_s=60.0, seed=17)
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg.to_dict()))
    digests = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        rc = cli_main(["--config", str(cfg_path), "--out", str(out),
                       "--involvement", "type1", "--vehicles", "0",
                       "--vehicles", "10", "--export-logs"])
        assert rc == 0
        h = hashlib.sha256()
        h.update((out / "summary.csv").read_bytes())
        for d in sorted((out / "logs").iterdir()):
            for f in sorted(d.iterdir()):
                h.update(f.read_bytes())
        digests.append(h.hexdigest())
    report("1-determinism", digests[0] == digests[1],
           f"summary+logs digest {digests[0][:12]}")


# ---------------------------------------------------------------------------
# criterion 2: baseline calibration
# ---------------------------------------------------------------------------

def test_c2_calibration(matrix):
    ok = True
    detail = []
    for rat in RATS:
        a = matrix[rat]["achieved"]
        ok &= abs(a - 10.0) <= 0.25
        detail.append(f"{rat}: d*={matrix[rat]['d']:.0f} m, {a:.2f} dB")
    report("2a-calibration-target", ok, "; ".join(detail))
    report("2b-distance-ordering",
           matrix["LORAWAN"]["d"] > matrix["HALOW"]["d"],
           f"LoRaWAN {matrix['LORAWAN']['d']:.0f} m > HaLow {matrix['HALOW']['d']:.0f} m")


# ---------------------------------------------------------------------------
# criterion 3: degenerate equivalence at full scale
# ---------------------------------------------------------------------------

def test_c3_degenerate_equivalence(tmp_path):
    d = 1000.0
    base = run_replication(desk_cfg("NBIOT"), BASE_SEED, bs_distance_m=d)
    paths = {}
    eng.write_log_csv(base, tmp_path / "baseline.csv")
    paths["BASELINE"] = (tmp_path / "baseline.csv").read_bytes()
    for inv in (L.Involvement.TYPE1, L.Involvement.TYPE2):
        cfg = desk_cfg("NBIOT", involvement=inv, n_assisting_vehicles=0)
        log = run_replication(cfg, BASE_SEED, bs_distance_m=d)
        eng.write_log_csv(log, tmp_path / f"{inv.value}.csv")
        paths[inv.value] = (tmp_path / f"{inv.value}.csv").read_bytes()
    ok = paths["TYPE1"] == paths["BASELINE"] and paths["TYPE2"] == paths["BASELINE"]
    report("3-degenerate-equivalence", ok,
           f"{len(paths['BASELINE'])} bytes identical across involvements")


# ---------------------------------------------------------------------------
# criterion 4: Fig-4 SINR trends
# ---------------------------------------------------------------------------

def _series(matrix, rat, inv):
    return [matrix[rat]["reports"][(inv, k)] for k in SWEEP]


def test_c4a_sinr_nondecreasing(matrix):
    ok = True
    worst = ""
    for rat in RATS:
        for inv in ("TYPE1", "TYPE2"):
            s = _series(matrix, rat, inv)
            for a, b in zip(s, s[1:]):
                slack = a.sinr_ci95_db + b.sinr_ci95_db
                if b.mean_sinr_db < a.mean_sinr_db - slack:
                    ok = False
                    worst = (f"{rat}/{inv}: {a.n_assisting}->{b.n_assisting} "
                             f"{a.mean_sinr_db:.2f}->{b.mean_sinr_db:.2f} ci {slack:.2f}")
    report("4a-sinr-nondecreasing", ok, worst or "all series monotone within CIs")


def test_c4b_uplift_at_20(matrix):
    ok = True
    detail = []
    for rat in RATS:
        base = matrix[rat]["reports"][("BASELINE", 0)].mean_sinr_db
        for inv in ("TYPE1", "TYPE2"):
            lift = matrix[rat]["reports"][(inv, 20)].mean_sinr_db - base
            detail.append(f"{rat}/{inv}:+{lift:.1f}")
            ok &= lift >= 1.0
    report("4b-uplift-at-20", ok, " ".join(detail))


def test_c4c_sigfox_largest_gain(matrix):
    ok = True
    detail = []
    for inv in ("TYPE1", "TYPE2"):
        for k in (50, 100, 200):
            gains = {rat: (matrix[rat]["reports"][(inv, k)].mean_sinr_db
                           - matrix[rat]["reports"][("BASELINE", 0)].mean_sinr_db)
                     for rat in RATS}
            if max(gains, key=gains.get) != "SIGFOX":
                ok = False
                detail.append(f"{inv}@{k}: {gains}")
    report("4c-sigfox-largest-gain", ok, "; ".join(detail) or "SIGFOX leads at every point >= 50")


def test_c4d_type2_exceeds_type1(matrix):
    ok = True
    detail = []
    for rat in RATS:
        for k in (20, 50, 100, 200):
            delta = (matrix[rat]["reports"][("TYPE2", k)].mean_sinr_db
                     - matrix[rat]["reports"][("TYPE1", k)].mean_sinr_db)
            detail.append(f"{rat}@{k}:{delta:+.1f}")
            ok &= delta >= 1.0
    report("4d-type2-over-type1", ok, " ".join(detail))


# ---------------------------------------------------------------------------
# criterion 5: Fig-5 EE trends
# ---------------------------------------------------------------------------

def test_c5a_sigfox_ee_gain_small(matrix):
    gains = [(inv, k, matrix["SIGFOX"]["reports"][(inv, k)].ee_gain_vs_baseline)
             for inv in ("TYPE1", "TYPE2") for k in SWEEP]
    ok = all(g < 1.10 for _, _, g in gains)
    worst = max(gains, key=lambda t: t[2])
    report("5a-sigfox-ee-gain", ok, f"max {worst[2]:.3f} at {worst[0]}@{worst[1]}")


def test_c5b_nbiot_type2_ee_gain(matrix):
    g100 = matrix["NBIOT"]["reports"][("TYPE2", 100)].ee_gain_vs_baseline
    g200 = matrix["NBIOT"]["reports"][("TYPE2", 200)].ee_gain_vs_baseline
    report("5b-nbiot-type2-ee", g100 >= 2.0 and g200 >= 2.0,
           f"gain@100={g100:.2f} gain@200={g200:.2f}")


def test_c5c_adaptive_rats_beat_sigfox_ee(matrix):
    ok = True
    detail = []
    for inv in ("TYPE1", "TYPE2"):
        for k in (50, 100, 200):
            sig = matrix["SIGFOX"]["reports"][(inv, k)].ee_gain_vs_baseline
            for rat in ("LORAWAN", "HALOW"):
                g = matrix[rat]["reports"][(inv, k)].ee_gain_vs_baseline
                if g <= sig:
                    ok = False
                    detail.append(f"{rat}/{inv}@{k}: {g:.2f} <= {sig:.2f}")
    report("5c-adaptive-ee-exceeds-sigfox", ok, "; ".join(detail) or "all points exceed")


# ---------------------------------------------------------------------------
# criterion 6: oracle suites
# ---------------------------------------------------------------------------

def _oracle_recompute(log, cfg, profile, sample_idx):
    c = log.columns
    start, air = c["start_s"], c["airtime_s"]
    end = start + air
    wrap = (cfg.area_m[0], cfg.area_m[1])
    shadow = ch.ShadowField(log.seed * 8 + eng._S_SHADOW,
                            cfg.channel.shadowing_sigma_db,
                            cfg.channel.shadowing_corr_m)
    out = np.empty(sample_idx.size)
    for n, i in enumerate(sample_idx):
        mask = ((c["channel"] == c["channel"][i])
                & (start < end[i]) & (end > start[i]))
        mask[i] = False
        if not profile.is_aloha:
            mask &= (c["rx_id"] != c["rx_id"][i]) & ~c["rx_is_bs"] & ~np.array(c["rx_is_bs"][i])
        rec = log.record(int(i))
        concurrent = [log.record(int(j)) for j in np.nonzero(mask)[0]]
        out[n] = ch.transmission_sinr(rec, concurrent, cfg.channel, profile,
                                      shadow, log.pl0_db, wrap)
    return out


def test_c6a_sinr_brute_force_1000():
    rng = np.random.default_rng(0)
    worst = 0.0
    for rat, inv, k, d in (("SIGFOX", L.Involvement.TYPE1, 20, 8000.0),
                           ("LORAWAN", L.Involvement.TYPE1, 50, 1000.0)):
        cfg = desk_cfg(rat, involvement=inv, n_assisting_vehicles=k)
        log = run_replication(cfg, BASE_SEED, bs_distance_m=d)
        n = min(500, log.n_records)
        idx = rng.choice(log.n_records, size=n, replace=False)
        oracle = _oracle_recompute(log, cfg, PROFILES[rat], idx)
        diff = np.max(np.abs(oracle - log.columns["sinr_db"][idx]))
        worst = max(worst, float(diff))
    report("6a-sinr-oracle", worst < 1e-9, f"max |diff| = {worst:.2e} dB over 1000 samples")


def test_c6b_link_adaptation_grid():
    from lpwansim.rats import select_link_params, select_link_params_bulk
    rng = np.random.default_rng(1)
    ok = True
    for rat in RATS:
        profile = PROFILES[rat]
        gains = rng.uniform(-160.0, -50.0, 1000)
        noise = -115.0
        idx, power = select_link_params_bulk(profile, gains, noise)
        for g, i, p in zip(gains, idx, power):
            best = None
            margin = profile.link_margin_db
            for m in profile.mcs_table:
                for pw in profile.tx_power_dbm_set:
                    if pw + g - noise >= m.sinr_threshold_db + margin:
                        key = (m.data_rate_bps, -pw)
                        if best is None or key > (best[0].data_rate_bps, -best[1]):
                            best = (m, pw)
            if best is None:
                best = (profile.mcs_table[0], profile.max_power_dbm)
            scalar = select_link_params(profile, g, noise)
            if not (profile.mcs_table[i] is best[0] and p == best[1]
                    and scalar == best):
                ok = False
    report("6b-link-adaptation-grid", ok, "4000 selections match exhaustive search")


def test_c6c_mobility_statistics():
    from lpwansim.grid import StreetGrid
    from lpwansim.mobility import MobilityField
    grid = StreetGrid(80.0, 25.0, 10, 10)
    n = 4000
    rng = np.random.default_rng(2)
    straight = left = right = crossings = 0
    field = MobilityField(grid, np.zeros(n, dtype=np.int8),
                          np.full(n, 5, dtype=np.int32),
                          np.full(n, grid.centerline(4) - 0.3),
                          np.ones(n, dtype=np.int8), np.full(n, 30 / 3.6),
                          np.full(n, 2.5), np.full(n, 1.5))
    for _ in range(3):
        field.offset[:] = grid.centerline(4) - 0.3
        field.axis[:] = 0
        field.sign[:] = 1
        field.step_all(0.1, rng)
        crossings += n
        stayed = field.axis == 0
        straight += int(stayed.sum())
        left += int((~stayed & (field.sign == -1)).sum())
        right += int((~stayed & (field.sign == 1)).sum())
    turn_ok = (abs(straight / crossings - 0.5) <= 0.02
               and abs(left / crossings - 0.25) <= 0.02
               and abs(right / crossings - 0.25) <= 0.02)

    gaps = L.sample_vehicle_gaps(np.random.default_rng(3), 10_000, 3.0)
    gap_ok = abs(gaps.mean() - 3.0) <= 0.15

    world = L.build_world(L.ScenarioConfig(), np.random.default_rng(4), 1000.0)
    n0 = world.mobiles.n
    for _ in range(100):
        world.mobiles.step_all(0.1, rng)
    conserve_ok = world.mobiles.n == n0 and np.isfinite(world.mobiles.positions()).all()

    report("6c-mobility-statistics", turn_ok and gap_ok and conserve_ok,
           f"turns {straight/crossings:.3f}/{left/crossings:.3f}/{right/crossings:.3f}, "
           f"mean gap {gaps.mean():.3f} m, count conserved")


def test_c6d_duty_legality_post_hoc():
    ok = True
    for rat, d in (("SIGFOX", 8000.0), ("LORAWAN", 1000.0)):
        cfg = desk_cfg(rat)
        log = run_replication(cfg, BASE_SEED + 1, bs_distance_m=d)
        c = log.columns
        budget = 0.01 * DUTY_WINDOW_S
        order = np.lexsort((c["start_s"], c["tx_id"]))
        tx = c["tx_id"][order]
        st = c["start_s"][order]
        air = c["airtime_s"][order]
        for m in np.unique(tx):
            s = st[tx == m]
            a = air[tx == m]
            lo = np.searchsorted(s, s - DUTY_WINDOW_S, side="right")
            cum = np.concatenate(([0.0], np.cumsum(a)))
            used = cum[np.arange(1, s.size + 1)] - cum[lo]
            if not np.all(used <= budget + 1e-6):
                ok = False
    report("6d-duty-legality", ok, "every accepted schedule within 1% duty")


def test_c6e_kmeans_restart_oracle():
    from lpwansim.involvement import kmeans
    rng = np.random.default_rng(77)
    pts = np.vstack([rng.normal((0, 0), 3.0, (10, 2)),
                     rng.normal((60, 10), 3.0, (10, 2)),
                     rng.normal((30, 70), 3.0, (8, 2)),
                     [[15.0, 35.0], [45.0, 40.0]]])
    oracle_rng = np.random.default_rng(123)

    def lloyd_once():
        centers = pts[oracle_rng.choice(len(pts), size=3, replace=False)].copy()
        for _ in range(200):
            d2 = ((pts[:, None, :] - centers[None, :, :]) ** 2).sum(2)
            lab = d2.argmin(1)
            new = np.array([pts[lab == j].mean(0) if (lab == j).any() else centers[j]
                            for j in range(3)])
            if np.allclose(new, centers, atol=1e-12):
                break
            centers = new
        d2 = ((pts[:, None, :] - centers[None, :, :]) ** 2).sum(2)
        return d2.min(1).sum()

    best = min(lloyd_once() for _ in range(1000))
    _, _, wcss = kmeans(pts, 3, np.random.default_rng(9))
    report("6e-kmeans-wcss", wcss <= best * 1.01,
           f"wcss {wcss:.2f} vs 1000-restart best {best:.2f}")


# ---------------------------------------------------------------------------
# criterion 7: traffic determinism
# ---------------------------------------------------------------------------

def test_c7_offered_message_count():
    cfg = desk_cfg("NBIOT")
    log = run_replication(cfg, BASE_SEED, bs_distance_m=1000.0)
    expected = 2000 * 120 + 3000 * 10
    report("7-offered-count", log.offered_messages == expected,
           f"{log.offered_messages} == {expected}")


# ---------------------------------------------------------------------------
# desk-scale runtime bound (from the acceptance preamble)
# ---------------------------------------------------------------------------

def test_runtime_budget(matrix):
    worst = max((m["sweep_s"], rat) for rat, m in matrix.items())
    report("runtime-budget", worst[0] < 600.0,
           f"slowest RAT sweep {worst[1]}: {worst[0]:.0f} s (< 600 s)")
