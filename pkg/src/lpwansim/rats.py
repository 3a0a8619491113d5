"""Radio-technology profiles: MCS tables, airtime, link adaptation, duty cycle.

All numeric constants live in ``data/rat_profiles.json`` together with a
per-value source note; this module only loads, validates and interprets them.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import ProfileError

DUTY_WINDOW_S = 3600.0

RAT_NAMES = ("SIGFOX", "LORAWAN", "HALOW", "NBIOT")


@dataclass(frozen=True)
class Mcs:
    """One modulation-and-coding operating point."""

    index: int
    data_rate_bps: float
    sinr_threshold_db: float
    spectral: str


@dataclass(frozen=True)
class RatProfile:
    """Complete radio parameter set for one technology."""

    name: str
    carrier_hz: float
    channel_bw_hz: float
    n_channels: int
    mcs_table: tuple[Mcs, ...]
    tx_power_dbm_set: tuple[float, ...]
    max_payload_B: int
    duty_cycle_limit: float | None
    phy_overhead_B: int
    noise_figure_db: float
    frame_repeats: int
    access: str
    link_margin_db: float
    pa_efficiency: float
    tx_circuit_w: float
    beacon_eirp_dbm: float
    relay_proximity_m: float

    @property
    def max_power_dbm(self) -> float:
        return self.tx_power_dbm_set[-1]

    @property
    def is_aloha(self) -> bool:
        return self.access == "aloha"

    def validate(self):
        if not self.mcs_table:
            raise ProfileError(f"{self.name}: empty MCS table")
        rates = [m.data_rate_bps for m in self.mcs_table]
        thresholds = [m.sinr_threshold_db for m in self.mcs_table]
        if any(b <= a for a, b in zip(rates, rates[1:])):
            raise ProfileError(f"{self.name}: data rates not strictly increasing")
        if any(b <= a for a, b in zip(thresholds, thresholds[1:])):
            raise ProfileError(f"{self.name}: SINR thresholds not strictly increasing")
        if any(b <= a for a, b in zip(self.tx_power_dbm_set, self.tx_power_dbm_set[1:])):
            raise ProfileError(f"{self.name}: power set not strictly increasing")
        if self.n_channels < 1:
            raise ProfileError(f"{self.name}: n_channels must be >= 1")
        if self.access not in ("aloha", "scheduled"):
            raise ProfileError(f"{self.name}: unknown access mode {self.access!r}")
        if self.frame_repeats < 1:
            raise ProfileError(f"{self.name}: frame_repeats must be >= 1")
        if self.duty_cycle_limit is not None and not (0.0 < self.duty_cycle_limit <= 1.0):
            raise ProfileError(f"{self.name}: duty cycle limit outside (0, 1]")
        if self.name == "SIGFOX":
            if self.channel_bw_hz != 100.0 or len(self.mcs_table) != 1 \
                    or len(self.tx_power_dbm_set) != 1 or self.max_payload_B != 12:
                raise ProfileError("SIGFOX profile must be 100 Hz, single MCS, single power, 12 B")
        if self.name == "LORAWAN":
            if not (863e6 <= self.carrier_hz <= 870e6):
                raise ProfileError("LORAWAN carrier must lie in the 868 MHz band")
            sfs = sorted(lora_spreading_factor(m) for m in self.mcs_table)
            if sfs != [7, 8, 9, 10, 11, 12] or self.channel_bw_hz != 125000.0:
                raise ProfileError("LORAWAN MCS table must be SF7..SF12 at 125 kHz")
        if self.name == "HALOW" and self.channel_bw_hz != 1e6:
            raise ProfileError("HALOW channel bandwidth must be 1 MHz")
        if self.name == "NBIOT":
            if self.channel_bw_hz != 180e3 or len(self.mcs_table) != 7:
                raise ProfileError("NBIOT profile must be 180 kHz with exactly 7 MCS entries")


def load_profiles(path=None) -> dict[str, RatProfile]:
    """Load and validate all RAT profiles from the constants file."""
    if path is None:
        text = resources.files("lpwansim").joinpath("data/rat_profiles.json").read_text()
    else:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    raw = json.loads(text)
    profiles = {}
    for name, entry in raw.items():
        if name == "version":
            continue
        fields = {k: v for k, v in entry.items() if k != "sources"}
        fields["mcs_table"] = tuple(
            Mcs(m["index"], float(m["data_rate_bps"]), float(m["sinr_threshold_db"]), m["spectral"])
            for m in fields["mcs_table"]
        )
        fields["tx_power_dbm_set"] = tuple(float(p) for p in fields["tx_power_dbm_set"])
        profile = RatProfile(name=name, **fields)
        profile.validate()
        profiles[name] = profile
    missing = set(RAT_NAMES) - set(profiles)
    if missing:
        raise ProfileError(f"profiles file is missing {sorted(missing)}")
    return profiles


def lora_spreading_factor(mcs: Mcs) -> int:
    if not mcs.spectral.startswith("SF"):
        raise ProfileError(f"not a LoRa MCS: {mcs.spectral!r}")
    return int(mcs.spectral[2:].split("/")[0])


def lora_time_on_air(payload_B: int, sf: int, bw_hz: float = 125e3,
                     preamble_symbols: int = 8, coding_rate: int = 1,
                     explicit_header: bool = True, crc: bool = True) -> float:
    """LoRa frame time on air (seconds), standard Semtech expression.

    Low-data-rate optimisation is engaged for SF11/SF12 at 125 kHz as the
    LoRaWAN regional parameters mandate.
    """
    t_sym = (2 ** sf) / bw_hz
    de = 1 if (sf >= 11 and bw_hz == 125e3) else 0
    ih = 0 if explicit_header else 1
    crc_bits = 16 if crc else 0
    num = 8 * payload_B - 4 * sf + 28 + crc_bits - 20 * ih
    n_payload = 8 + max(math.ceil(num / (4 * (sf - 2 * de))) * (coding_rate + 4), 0)
    t_preamble = (preamble_symbols + 4.25) * t_sym
    return t_preamble + n_payload * t_sym


def airtime(profile: RatProfile, mcs: Mcs, payload_B: int) -> float:
    """Seconds on air for one frame carrying payload_B application bytes."""
    if payload_B <= 0:
        raise ValueError("payload must be positive")
    if payload_B > profile.max_payload_B:
        raise ValueError(
            f"payload {payload_B} B exceeds {profile.name} frame limit "
            f"{profile.max_payload_B} B; fragment before transmission")
    if profile.name == "LORAWAN":
        return lora_time_on_air(payload_B + profile.phy_overhead_B, lora_spreading_factor(mcs))
    return (profile.phy_overhead_B + payload_B) * 8.0 / mcs.data_rate_bps


def select_link_params(profile: RatProfile, estimated_path_gain_db: float,
                       noise_plus_interference_dbm: float,
                       margin_db: float | None = None) -> tuple[Mcs, float]:
    """Pick (MCS, transmit power) for a link.

    Lexicographic rule: the fastest MCS whose threshold plus margin is
    reachable at maximum power, then the lowest power that still clears it.
    If even the slowest MCS is unreachable, fall back to best effort
    (slowest MCS at maximum power).
    """
    if not profile.mcs_table:
        raise ProfileError(f"{profile.name}: empty MCS table")
    margin = profile.link_margin_db if margin_db is None else margin_db
    best_pred = profile.max_power_dbm + estimated_path_gain_db - noise_plus_interference_dbm
    chosen = None
    for mcs in reversed(profile.mcs_table):
        if mcs.sinr_threshold_db + margin <= best_pred:
            chosen = mcs
            break
    if chosen is None:
        return profile.mcs_table[0], profile.max_power_dbm
    required = chosen.sinr_threshold_db + margin + noise_plus_interference_dbm - estimated_path_gain_db
    for power in profile.tx_power_dbm_set:
        if power >= required:
            return chosen, power
    return chosen, profile.max_power_dbm


def select_link_params_bulk(profile: RatProfile, gain_db: np.ndarray,
                            noise_dbm: float, margin_db: float | None = None):
    """Vectorized variant of select_link_params for engine batches.

    Returns (mcs_index, power_dbm) arrays following the same rule.
    """
    margin = profile.link_margin_db if margin_db is None else margin_db
    thresholds = np.array([m.sinr_threshold_db for m in profile.mcs_table])
    powers = np.asarray(profile.tx_power_dbm_set)
    best_pred = profile.max_power_dbm + gain_db - noise_dbm
    idx = np.searchsorted(thresholds, best_pred - margin, side="right") - 1
    fallback = idx < 0
    idx = np.where(fallback, 0, idx)
    required = thresholds[idx] + margin + noise_dbm - gain_db
    p_idx = np.minimum(np.searchsorted(powers, required, side="left"), len(powers) - 1)
    power = np.where(fallback, profile.max_power_dbm, powers[p_idx])
    return idx, power


def duty_cycle_gate(node_tx_history, profile: RatProfile, now: float,
                    requested_airtime: float) -> float:
    """Earliest permitted start time for a transmission (== now means allow).

    ISM technologies are held to (airtime in the trailing window + request)
    <= limit * window; scheduled licensed/LBT technologies always allow.
    Airtime is attributed at frame start.  Returns +inf if the request alone
    exceeds the whole window budget.
    """
    if profile.duty_cycle_limit is None:
        return now
    budget = profile.duty_cycle_limit * DUTY_WINDOW_S
    if requested_airtime > budget:
        return math.inf
    in_window = [(s, a) for s, a in node_tx_history if now - DUTY_WINDOW_S < s <= now]
    used = sum(a for _, a in in_window)
    if used + requested_airtime <= budget:
        return now
    in_window.sort()
    defer = now
    for start, air in in_window:
        used -= air
        defer = start + DUTY_WINDOW_S
        if used + requested_airtime <= budget:
            break
    # strictly future: a defer target can float-collide with `now`, and the
    # blocking entry only ages out of the window strictly after it
    return max(defer, now + 1e-6)


def consumed_power_w(profile: RatProfile, tx_power_dbm: float) -> float:
    """Device power draw while transmitting: PA at fixed efficiency + circuit."""
    rf_w = 10.0 ** ((tx_power_dbm - 30.0) / 10.0)
    return rf_w / profile.pa_efficiency + profile.tx_circuit_w


def fragment_sizes(payload_B: int, max_payload_B: int) -> list[int]:
    """Split an application payload into frame-sized fragments."""
    if payload_B <= 0:
        raise ValueError("payload must be positive")
    if payload_B <= max_payload_B:
        return [payload_B]
    n_full, rest = divmod(payload_B, max_payload_B)
    sizes = [max_payload_B] * n_full
    if rest:
        sizes.append(rest)
    return sizes
