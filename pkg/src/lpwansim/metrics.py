"""Campaign aggregation: mean SINR, energy efficiency, EE gain, delivery.

SINR is pooled in the dB domain per the scenario decision; the linear-domain
mean is emitted alongside in the diagnostics file so the choice stays
auditable.  EE gains divide by a seed-matched baseline campaign (common
random numbers across involvement arms).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import MetricsError

SUMMARY_COLUMNS = (
    "rat", "involvement", "n_assisting", "mean_sinr_db", "sinr_ci95_db",
    "energy_efficiency_bit_per_j", "ee_gain_vs_baseline", "delivery_ratio", "rounds",
)

DIAGNOSTIC_COLUMNS = (
    "rat", "involvement", "n_assisting", "mean_sinr_db", "mean_sinr_linear_db",
    "per_machine_ee_median_bit_per_j", "n_records", "offered_messages",
    "delivered_messages", "total_energy_j",
)


@dataclass(frozen=True)
class MetricsReport:
    rat: str
    involvement: str
    n_assisting: int
    mean_sinr_db: float
    sinr_ci95_db: float
    energy_efficiency_bit_per_j: float
    ee_gain_vs_baseline: float | None
    delivery_ratio: float
    rounds: int


def energy_efficiency(logs) -> float:
    """Reliably delivered payload bits per joule of machine radio energy.

    The numerator counts only messages whose fragments all succeeded; the
    denominator counts every transmission attempt, failures included.
    """
    if not logs or all(log.n_records == 0 for log in logs):
        raise MetricsError("energy efficiency needs at least one transmission record")
    bits = sum(log.delivered_bits for log in logs)
    energy = sum(log.total_energy_j for log in logs)
    if energy <= 0.0:
        raise MetricsError("total energy is zero; energy efficiency undefined")
    return bits / energy


def aggregate(logs, baseline_logs=None, rat: str | None = None,
              involvement: str | None = None, n_assisting: int | None = None) -> MetricsReport:
    """Fold a campaign's logs into one MetricsReport row.

    All logs must share the same configuration (seeds aside).  The 95% CI
    half-width comes from the t distribution over per-round mean SINRs and is
    reported as +inf when only one round carries records.
    """
    if not logs:
        raise MetricsError("no logs to aggregate")
    cfg = logs[0].cfg
    if any(log.cfg_hash != logs[0].cfg_hash for log in logs):
        raise MetricsError("logs do not share a configuration")
    n_records = sum(log.n_records for log in logs)
    if n_records == 0:
        raise MetricsError("campaign produced no transmission records")

    pooled_sum = sum(float(log.columns["sinr_db"].sum()) for log in logs)
    mean_sinr = pooled_sum / n_records
    round_means = [float(log.columns["sinr_db"].mean()) for log in logs if log.n_records]
    if len(round_means) >= 2:
        sd = float(np.std(round_means, ddof=1))
        tq = float(stats.t.ppf(0.975, len(round_means) - 1))
        ci = tq * sd / np.sqrt(len(round_means))
    else:
        ci = float("inf")

    ee = energy_efficiency(logs)
    gain = None
    if baseline_logs is not None:
        gain = ee / energy_efficiency(baseline_logs)

    offered = sum(log.offered_messages for log in logs)
    delivered = sum(log.delivered_messages for log in logs)
    ratio = delivered / offered if offered else 0.0

    return MetricsReport(
        rat=rat if rat is not None else cfg.rat,
        involvement=involvement if involvement is not None else cfg.involvement.value,
        n_assisting=n_assisting if n_assisting is not None else cfg.n_assisting_vehicles,
        mean_sinr_db=mean_sinr, sinr_ci95_db=float(ci),
        energy_efficiency_bit_per_j=ee, ee_gain_vs_baseline=gain,
        delivery_ratio=ratio, rounds=len(logs))


def diagnostics_row(logs, report: MetricsReport) -> dict:
    """Auxiliary per-campaign values kept out of the summary contract."""
    linear_sum = sum(float((10.0 ** (log.columns["sinr_db"] / 10.0)).sum()) for log in logs)
    n = sum(log.n_records for log in logs)
    linear_mean_db = 10.0 * np.log10(linear_sum / n) if n else float("nan")
    energy = np.sum([log.per_machine_energy_j for log in logs], axis=0)
    bits = np.sum([log.per_machine_delivered_bits for log in logs], axis=0)
    active = energy > 0
    median_ee = float(np.median(bits[active] / energy[active])) if active.any() else float("nan")
    return {
        "rat": report.rat, "involvement": report.involvement,
        "n_assisting": report.n_assisting, "mean_sinr_db": report.mean_sinr_db,
        "mean_sinr_linear_db": float(linear_mean_db),
        "per_machine_ee_median_bit_per_j": median_ee, "n_records": n,
        "offered_messages": sum(log.offered_messages for log in logs),
        "delivered_messages": sum(log.delivered_messages for log in logs),
        "total_energy_j": sum(log.total_energy_j for log in logs),
    }


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(float(value))  # plain-float repr even for numpy scalars
    return str(value)


def write_summary_csv(reports, path):
    """The plotting contract: exactly SUMMARY_COLUMNS, one row per campaign."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(SUMMARY_COLUMNS) + "\n")
        for r in reports:
            row = [r.rat, r.involvement, r.n_assisting, r.mean_sinr_db, r.sinr_ci95_db,
                   r.energy_efficiency_bit_per_j, r.ee_gain_vs_baseline,
                   r.delivery_ratio, r.rounds]
            fh.write(",".join(_cell(v) for v in row) + "\n")


def write_diagnostics_csv(rows, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(DIAGNOSTIC_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(_cell(row[c]) for c in DIAGNOSTIC_COLUMNS) + "\n")
