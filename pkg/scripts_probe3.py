"""Scratch probe: full criteria sweep check after constant changes."""
import sys
import time

import lpwansim as L
from lpwansim.engine import run_campaign
from lpwansim.metrics import aggregate

RAT = sys.argv[1]
ROUNDS = int(sys.argv[2]) if len(sys.argv) > 2 else 3
KS = (20, 50, 200)

profiles = L.load_profiles()
cfg = L.ScenarioConfig(rat=RAT, seed=11)
t0 = time.time()
d = L.calibrate_bs_distance(cfg, profiles[RAT], workers=2)
print(f"{RAT} d*={d:.0f} m  ({time.time()-t0:.0f}s)")
base_cfg = cfg.with_overrides(involvement=L.Involvement.BASELINE,
                              n_assisting_vehicles=0, rounds=ROUNDS)
base = run_campaign(base_cfg, ROUNDS, cfg.seed, bs_distance_m=d, workers=2)
r0 = aggregate(base, base)
print(f"  baseline sinr={r0.mean_sinr_db:.2f} dlv={r0.delivery_ratio:.3f} "
      f"ee={r0.energy_efficiency_bit_per_j:.1f}")
res = {}
for inv in (L.Involvement.TYPE1, L.Involvement.TYPE2):
    for k in KS:
        c = cfg.with_overrides(involvement=inv, n_assisting_vehicles=k, rounds=ROUNDS)
        logs = run_campaign(c, ROUNDS, cfg.seed, bs_distance_m=d, workers=2)
        r = aggregate(logs, base)
        res[(inv.value, k)] = r
        print(f"  {inv.value} k={k}: sinr={r.mean_sinr_db:.2f} "
              f"(+{r.mean_sinr_db - r0.mean_sinr_db:.2f}) ee_gain={r.ee_gain_vs_baseline:.3f}")
for k in KS:
    d21 = res[("TYPE2", k)].mean_sinr_db - res[("TYPE1", k)].mean_sinr_db
    print(f"  T2-T1 @ {k}: {d21:+.2f} dB")
