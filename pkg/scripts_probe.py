"""Scratch probe: trend directions for the acceptance criteria (not shipped)."""
import json
import sys
import time

import lpwansim as L
from lpwansim.engine import run_campaign
from lpwansim.metrics import aggregate

RAT = sys.argv[1]
ROUNDS = int(sys.argv[2]) if len(sys.argv) > 2 else 3
KS = [int(x) for x in sys.argv[3].split(",")] if len(sys.argv) > 3 else [0, 20, 100, 200]

profiles = L.load_profiles()
cfg = L.ScenarioConfig(rat=RAT, seed=11)
t0 = time.time()
d = L.calibrate_bs_distance(cfg, profiles[RAT], workers=2)
print(f"{RAT} d*={d:.0f} m ({time.time()-t0:.0f}s)")

base_cfg = cfg.with_overrides(involvement=L.Involvement.BASELINE, n_assisting_vehicles=0,
                              rounds=ROUNDS)
base = run_campaign(base_cfg, ROUNDS, cfg.seed, bs_distance_m=d, workers=2)
rep0 = aggregate(base, base)
print(f"  baseline: sinr={rep0.mean_sinr_db:.2f} ci={rep0.sinr_ci95_db:.2f} "
      f"ee={rep0.energy_efficiency_bit_per_j:.1f} dlv={rep0.delivery_ratio:.3f}")

out = {"rat": RAT, "d": d, "baseline": rep0.mean_sinr_db,
       "baseline_ee": rep0.energy_efficiency_bit_per_j, "points": []}
for inv in (L.Involvement.TYPE1, L.Involvement.TYPE2):
    for k in KS:
        if k == 0:
            continue
        t0 = time.time()
        c = cfg.with_overrides(involvement=inv, n_assisting_vehicles=k, rounds=ROUNDS)
        logs = run_campaign(c, ROUNDS, cfg.seed, bs_distance_m=d, workers=2)
        r = aggregate(logs, base)
        print(f"  {inv.value} k={k}: sinr={r.mean_sinr_db:.2f} (+{r.mean_sinr_db-rep0.mean_sinr_db:.2f}) "
              f"ci={r.sinr_ci95_db:.2f} ee_gain={r.ee_gain_vs_baseline:.3f} "
              f"dlv={r.delivery_ratio:.3f} [{time.time()-t0:.0f}s]")
        out["points"].append({"inv": inv.value, "k": k, "sinr": r.mean_sinr_db,
                              "ci": r.sinr_ci95_db, "ee_gain": r.ee_gain_vs_baseline,
                              "dlv": r.delivery_ratio})

with open(f"/tmp/probe_{RAT}.json", "w") as fh:
    json.dump(out, fh, indent=1)
