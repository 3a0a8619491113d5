"""Radio channel model: log-distance path gain, correlated shadowing, SINR.

The link model is a classic urban abstraction: free-space anchor loss at a
reference distance, a log-distance slope, and a log-normal shadowing term
drawn from a spatially correlated Gaussian field that is frozen for the
lifetime of one replication.  A link's shadowing value combines the field at
both endpoints, so links sharing an endpoint are correlated and the value is
symmetric (uplink estimate == beacon measurement).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class ChannelParams:
    """Propagation constants for one scenario.

    pl0_db of None means "free-space loss at ref_distance_m for the RAT
    carrier", resolved when the link budget is assembled.  The default
    close-in reference of 10 m anchors the 3.5-exponent slope the way macro
    models do; a 1 m free-space anchor would overstate loss at street scales
    by ~15 dB and no single base station could then serve the area.
    """

    pl0_db: float | None = None
    ref_distance_m: float = 10.0
    exponent: float = 3.5
    shadowing_sigma_db: float = 6.0
    shadowing_corr_m: float = 50.0
    thermal_noise_dbm_per_hz: float = -174.0
    # fast-fading margin on links whose relay endpoint is a vehicle in motion
    # (Rayleigh at 30 km/h, no receive diversity); parked relays are
    # quasi-static and pay nothing
    moving_relay_penalty_db: float = 6.0

    def validate(self):
        if not (2.0 <= self.exponent <= 6.0):
            raise ConfigError(f"path-loss exponent {self.exponent} outside [2, 6]")
        if self.shadowing_sigma_db < 0:
            raise ConfigError("shadowing sigma must be >= 0")
        if self.ref_distance_m <= 0:
            raise ConfigError("reference distance must be positive")
        if self.shadowing_corr_m <= 0:
            raise ConfigError("shadowing decorrelation length must be positive")
        if self.moving_relay_penalty_db < 0:
            raise ConfigError("moving-relay penalty must be >= 0")


@dataclass(frozen=True)
class LinkSample:
    """One evaluated link, kept for logging and debugging."""

    tx_id: int
    rx_id: int
    distance_3d_m: float
    path_gain_db: float
    time_s: float


def free_space_pl0_db(carrier_hz: float, ref_distance_m: float = 1.0) -> float:
    """Free-space path loss at the reference distance (Friis)."""
    return 20.0 * math.log10(4.0 * math.pi * ref_distance_m * carrier_hz / SPEED_OF_LIGHT)


def noise_power_dbm(params: ChannelParams, bandwidth_hz: float, noise_figure_db: float = 0.0) -> float:
    """Thermal noise integrated over the receive bandwidth plus receiver NF."""
    return params.thermal_noise_dbm_per_hz + 10.0 * math.log10(bandwidth_hz) + noise_figure_db


class ShadowField:
    """Spatially correlated log-normal shadowing field, frozen per replication.

    Unit-variance Gaussians live on a square lattice with spacing equal to the
    decorrelation length; queries are bilinear interpolations.  Every lattice
    value is derived from a stable per-cell seed so the field is identical no
    matter in which order (or over which extent) it is observed -- the base
    station may sit tens of kilometres outside the deployment area.
    """

    _TAG = 0x5AD0

    def __init__(self, seed: int, sigma_db: float, corr_m: float,
                 area_cells: tuple[int, int, int, int] = (-3, 27, -3, 27)):
        self.seed = int(seed)
        self.sigma_db = float(sigma_db)
        self.corr_m = float(corr_m)
        self._cache: dict[tuple[int, int], float] = {}
        i0, i1, j0, j1 = area_cells
        self._i0, self._j0 = i0, j0
        if sigma_db > 0.0:
            self._grid = np.empty((i1 - i0 + 1, j1 - j0 + 1))
            for di in range(self._grid.shape[0]):
                for dj in range(self._grid.shape[1]):
                    self._grid[di, dj] = self._cell(i0 + di, j0 + dj)
        else:
            self._grid = np.zeros((i1 - i0 + 1, j1 - j0 + 1))

    def _cell(self, i: int, j: int) -> float:
        key = (i, j)
        v = self._cache.get(key)
        if v is None:
            ss = np.random.SeedSequence(entropy=(self.seed, self._TAG, i + (1 << 20), j + (1 << 20)))
            v = float(np.random.default_rng(ss).standard_normal())
            self._cache[key] = v
        return v

    def gauss_at(self, x: float, y: float) -> float:
        """Unit-variance field value at one point (handles any coordinates)."""
        if self.sigma_db == 0.0:
            return 0.0
        u, v = x / self.corr_m, y / self.corr_m
        i, j = math.floor(u), math.floor(v)
        fu, fv = u - i, v - j
        g00 = self._cell(i, j)
        g10 = self._cell(i + 1, j)
        g01 = self._cell(i, j + 1)
        g11 = self._cell(i + 1, j + 1)
        return (g00 * (1 - fu) * (1 - fv) + g10 * fu * (1 - fv)
                + g01 * (1 - fu) * fv + g11 * fu * fv)

    def gauss_many(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Vectorized field lookup; points must fall inside the area lattice."""
        if self.sigma_db == 0.0:
            return np.zeros(np.shape(x))
        u = np.asarray(x, dtype=float) / self.corr_m
        v = np.asarray(y, dtype=float) / self.corr_m
        i = np.floor(u).astype(np.int64)
        j = np.floor(v).astype(np.int64)
        fu, fv = u - i, v - j
        a, b = i - self._i0, j - self._j0
        g = self._grid
        return (g[a, b] * (1 - fu) * (1 - fv) + g[a + 1, b] * fu * (1 - fv)
                + g[a, b + 1] * (1 - fu) * fv + g[a + 1, b + 1] * fu * fv)

    def link_shadow_db(self, g_tx: float | np.ndarray, g_rx: float | np.ndarray):
        """Shadowing of a link from the endpoint field values (symmetric)."""
        return self.sigma_db * (np.asarray(g_tx) + np.asarray(g_rx)) / math.sqrt(2.0)


def distance_3d(a, b, wrap_xy=None) -> float:
    """Euclidean 3-D distance; wrap_xy = (size_x, size_y) applies the torus
    minimum-image convention on the horizontal axes (used for links whose
    endpoints both live inside the wraparound deployment area)."""
    ax, ay, az = a
    bx, by, bz = b
    dx = ax - bx
    dy = ay - by
    if wrap_xy is not None:
        sx, sy = wrap_xy
        dx = dx - sx * round(dx / sx)
        dy = dy - sy * round(dy / sy)
    return math.sqrt(dx * dx + dy * dy + (az - bz) ** 2)


def path_gain(params: ChannelParams, tx_pos, rx_pos,
              shadow_field: ShadowField | None = None,
              pl0_db: float | None = None, wrap_xy=None) -> float:
    """Path gain (dB, <= 0) between two 3-D positions.

    gain = -(pl0 + 10 n log10(d/d0)) - shadow; distances below the reference
    are clamped to it (near-field guard).
    """
    pl0 = params.pl0_db if pl0_db is None else pl0_db
    if pl0 is None:
        raise ConfigError("pl0_db unresolved: pass pl0_db or set it in ChannelParams")
    d = max(distance_3d(tx_pos, rx_pos, wrap_xy), params.ref_distance_m)
    gain = -(pl0 + 10.0 * params.exponent * math.log10(d / params.ref_distance_m))
    if shadow_field is not None and shadow_field.sigma_db > 0.0:
        g_tx = shadow_field.gauss_at(tx_pos[0], tx_pos[1])
        g_rx = shadow_field.gauss_at(rx_pos[0], rx_pos[1])
        gain -= float(shadow_field.link_shadow_db(g_tx, g_rx))
    return gain


def path_gain_bulk(params: ChannelParams, pl0_db: float,
                   dist_m: np.ndarray, shadow_db: np.ndarray | float = 0.0) -> np.ndarray:
    """Vectorized path gain from precomputed distances and shadowing values."""
    d = np.maximum(dist_m, params.ref_distance_m)
    return -(pl0_db + 10.0 * params.exponent * np.log10(d / params.ref_distance_m)) - shadow_db


def dbm_to_mw(dbm):
    return np.power(10.0, np.asarray(dbm, dtype=float) / 10.0)


def mw_to_dbm(mw):
    return 10.0 * np.log10(mw)


def sinr_db(signal_dbm: float, interferer_dbm, noise_dbm: float) -> float:
    """SINR from a received signal level, co-channel interferer levels, noise."""
    denom_mw = float(dbm_to_mw(noise_dbm))
    interferers = np.atleast_1d(np.asarray(interferer_dbm, dtype=float))
    if interferers.size:
        denom_mw += float(dbm_to_mw(interferers).sum())
    return signal_dbm - 10.0 * math.log10(denom_mw)


def transmission_sinr(record, concurrent, params: ChannelParams, profile,
                      shadow_field: ShadowField | None, pl0_db: float,
                      wrap_xy=None) -> float:
    """Reference SINR of one logged transmission against its concurrent set.

    This is the plain definition used as the correctness oracle for the
    engine's interference bookkeeping: signal from the record's own endpoints,
    interference summed over the already-filtered concurrent records (same
    channel, time overlap, co-channel rules applied by the caller), thermal
    noise over the profile bandwidth.  wrap_xy applies the torus metric when
    the receiver is inside the deployment area (a vehicle relay).
    """
    wrap = wrap_xy if record.target_kind == "VEHICLE" else None
    penalty = params.moving_relay_penalty_db if record.rx_moving else 0.0
    signal = record.tx_power_dbm - penalty + path_gain(
        params, record.tx_pos, record.rx_pos, shadow_field, pl0_db, wrap)
    noise = noise_power_dbm(params, profile.channel_bw_hz, profile.noise_figure_db)
    levels = [
        other.tx_power_dbm - penalty + path_gain(params, other.tx_pos, record.rx_pos,
                                                 shadow_field, pl0_db, wrap)
        for other in concurrent
    ]
    return sinr_db(signal, levels, noise)
