"""A reduced end-to-end campaign: calibrate, sweep, aggregate, export.

This is the whole evaluation pipeline at toy scale.  The resulting
summary.csv is exactly what the plotting frontend consumes
(see frontend/README.md for rendering it into figures).
"""

import numpy as np

import lpwansim as L
from lpwansim.engine import run_campaign
from lpwansim.metrics import aggregate, diagnostics_row, write_diagnostics_csv, write_summary_csv

cfg = L.ScenarioConfig(
    n_stationary=150, n_wearable=200, n_pedestrians=200, n_vehicles=100,
    rat="NBIOT", rounds=4, sim_duration_s=90.0, seed=21,
)
profiles = L.load_profiles()

d = L.calibrate_bs_distance(cfg, profiles[cfg.rat], pilot_rounds=4,
                            pilot_duration_s=45.0)
print(f"calibrated BS distance: {d:.0f} m")

base_cfg = cfg.with_overrides(involvement=L.Involvement.BASELINE, n_assisting_vehicles=0)
baseline = run_campaign(base_cfg, cfg.rounds, cfg.seed, bs_distance_m=d)
reports = [aggregate(baseline, baseline)]
diag = [diagnostics_row(baseline, reports[0])]

for inv in (L.Involvement.TYPE1, L.Involvement.TYPE2):
    for k in (0, 10, 25, 50):
        if k == 0:
            rep = aggregate(baseline, baseline, involvement=inv.value, n_assisting=0)
            logs = baseline
        else:
            c = cfg.with_overrides(involvement=inv, n_assisting_vehicles=k)
            logs = run_campaign(c, cfg.rounds, cfg.seed, bs_distance_m=d)
            rep = aggregate(logs, baseline)
        reports.append(rep)
        diag.append(diagnostics_row(logs, rep))
        print(f"{inv.value:5s} k={k:3d}: SINR {rep.mean_sinr_db:6.2f} dB "
              f"(ci {rep.sinr_ci95_db:.2f}), EE gain {rep.ee_gain_vs_baseline:.2f}")

write_summary_csv(reports, "summary.csv")
write_diagnostics_csv(diag, "diagnostics.csv")
print("wrote summary.csv and diagnostics.csv")
