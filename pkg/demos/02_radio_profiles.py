"""Walk through the four radio technologies: airtime, adaptation, duty cycle.

Shows why the same 10 B sensor reading costs 2 s of air on SIGFOX and under
a millisecond on Wi-Fi HaLow, how link adaptation reacts to an improving
channel, and what the 1% ISM duty cycle does to a chatty device.
"""

import lpwansim as L
from lpwansim.rats import DUTY_WINDOW_S, airtime, duty_cycle_gate, select_link_params

profiles = L.load_profiles()

print("=== time on air for one 10 B reading (slowest / fastest MCS) ===")
for name, p in profiles.items():
    slow = airtime(p, p.mcs_table[0], min(10, p.max_payload_B))
    fast = airtime(p, p.mcs_table[-1], min(10, p.max_payload_B))
    print(f"  {name:8s}: {slow * 1e3:10.2f} ms .. {fast * 1e3:8.3f} ms "
          f"({len(p.mcs_table)} MCS, powers {p.tx_power_dbm_set[0]:.0f}..{p.max_power_dbm:.0f} dBm)")

print("\n=== link adaptation on an improving NB-IoT channel ===")
nb = profiles["NBIOT"]
noise = -118.4
for gain in (-145.0, -130.0, -115.0, -100.0, -85.0):
    mcs, power = select_link_params(nb, gain, noise)
    print(f"  path gain {gain:6.1f} dB -> {mcs.data_rate_bps / 1e3:6.1f} kbps at {power:5.1f} dBm")

print("\n=== the ISM duty cycle against a 5 s reporting period (SIGFOX) ===")
sig = profiles["SIGFOX"]
frame = airtime(sig, sig.mcs_table[0], 10)
history = []
t, sent = 0.0, 0
while t < DUTY_WINDOW_S:
    t_ok = duty_cycle_gate(history, sig, t, frame)
    if t_ok >= DUTY_WINDOW_S:
        break
    history.append((t_ok, frame))
    sent += 1
    t = t_ok + frame
print(f"  frames of {frame:.2f} s legally sent in the first hour: {sent} "
      f"(a 5 s period would want {int(DUTY_WINDOW_S / 5)})")
