"""Scenario construction: configuration, node placement, BS calibration.

The world is a Manhattan grid torus.  Machines (stationary boxes and
pedestrian-carried wearables) are placed uniformly on sidewalks, vehicles on
street lanes with exponential longitudinal gaps, and the single base station
due east of the area center at a distance calibrated so the baseline mean
uplink SINR hits the configured target.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .channel import ChannelParams
from .errors import CalibrationError, ConfigError
from .grid import SIDEWALK_MARGIN_M, VEHICLE_LANE_OFFSET_M, StreetGrid
from .mobility import MobilityField
from .rats import RAT_NAMES

KMH_TO_MPS = 1000.0 / 3600.0


class NodeKind(str, enum.Enum):
    STATIONARY_MACHINE = "stationary_machine"
    WEARABLE_MACHINE = "wearable_machine"
    PEDESTRIAN = "pedestrian"
    VEHICLE = "vehicle"
    BASE_STATION = "base_station"


class Involvement(str, enum.Enum):
    BASELINE = "BASELINE"
    TYPE1 = "TYPE1"
    TYPE2 = "TYPE2"


@dataclass(frozen=True)
class Node:
    """Snapshot view of one positioned entity."""

    id: int
    kind: NodeKind
    position: tuple[float, float, float]
    heading: str | None = None
    assisting: bool = False
    carried_by: int | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    """Every scenario parameter, including the paper-gap decisions."""

    block_size_m: float = 80.0
    street_width_m: float = 25.0
    grid_blocks: tuple[int, int] = (10, 10)
    area_m: tuple[float, float] = (1050.0, 1050.0)
    n_stationary: int = 2000
    n_wearable: int = 3000
    n_vehicles: int = 1000
    n_pedestrians: int = 3000
    vehicle_speed_kmh: float = 30.0
    pedestrian_speed_kmh: float = 5.0
    mean_inter_vehicle_m: float = 3.0
    bs_height_m: float = 10.0
    car_roof_height_m: float = 1.5
    stationary_height_range_m: tuple[float, float] = (0.0, 10.0)
    wearable_height_m: float = 1.5
    stationary_payload_B: int = 10
    wearable_payload_B: int = 100
    stationary_period_s: float = 5.0
    wearable_period_s: float = 60.0
    target_baseline_sinr_db: float = 10.0
    rat: str = "SIGFOX"
    involvement: Involvement = Involvement.BASELINE
    n_assisting_vehicles: int = 0
    rounds: int = 100
    sim_duration_s: float = 600.0
    seed: int = 1
    channel: ChannelParams = field(default_factory=ChannelParams)

    def validate(self):
        positive_counts = {
            "grid_blocks_x": self.grid_blocks[0], "grid_blocks_y": self.grid_blocks[1],
            "n_stationary": self.n_stationary, "n_wearable": self.n_wearable,
            "n_vehicles": self.n_vehicles, "n_pedestrians": self.n_pedestrians,
            "rounds": self.rounds,
        }
        for name, value in positive_counts.items():
            if value <= 0:
                raise ConfigError(f"{name} must be > 0, got {value}")
        pitch = self.block_size_m + self.street_width_m
        for ax, blocks, size in zip("xy", self.grid_blocks, self.area_m):
            if not math.isclose(blocks * pitch, size, rel_tol=0, abs_tol=1e-6):
                raise ConfigError(
                    f"area_{ax} {size} m does not tile: {blocks} blocks x "
                    f"({self.block_size_m} + {self.street_width_m}) m = {blocks * pitch} m")
        lo, hi = self.stationary_height_range_m
        if lo < 0 or hi <= lo:
            raise ConfigError(f"stationary height range [{lo}, {hi}) is invalid")
        if self.rat not in RAT_NAMES:
            raise ConfigError(f"unknown rat {self.rat!r}; expected one of {RAT_NAMES}")
        if self.n_assisting_vehicles < 0 or self.n_assisting_vehicles > self.n_vehicles:
            raise ConfigError("n_assisting_vehicles must lie in [0, n_vehicles]")
        if self.involvement == Involvement.BASELINE and self.n_assisting_vehicles != 0:
            raise ConfigError("BASELINE involvement forces n_assisting_vehicles = 0")
        for name in ("vehicle_speed_kmh", "pedestrian_speed_kmh", "mean_inter_vehicle_m",
                     "stationary_period_s", "wearable_period_s"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be > 0")
        if self.stationary_payload_B <= 0 or self.wearable_payload_B <= 0:
            raise ConfigError("payload sizes must be > 0")
        if self.sim_duration_s < 0:
            raise ConfigError("sim_duration_s must be >= 0")
        self.channel.validate()

    def with_overrides(self, **kw) -> "ScenarioConfig":
        cfg = replace(self, **kw)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        d = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, ChannelParams):
                v = {cf.name: getattr(v, cf.name) for cf in fields(ChannelParams)}
            elif isinstance(v, Involvement):
                v = v.value
            elif isinstance(v, tuple):
                v = list(v)
            d[f.name] = v
        return d


def config_from_dict(data: dict) -> ScenarioConfig:
    """Build and validate a config from a parsed JSON document.

    Unknown keys (top-level or inside channel) are a hard error so typos
    cannot silently fall back to defaults.
    """
    known = {f.name for f in fields(ScenarioConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kw = dict(data)
    if "channel" in kw:
        ch = kw["channel"]
        if not isinstance(ch, dict):
            raise ConfigError("channel must be an object")
        ch_known = {f.name for f in fields(ChannelParams)}
        ch_unknown = set(ch) - ch_known
        if ch_unknown:
            raise ConfigError(f"unknown channel keys: {sorted(ch_unknown)}")
        kw["channel"] = ChannelParams(**ch)
    for name in ("grid_blocks", "area_m", "stationary_height_range_m"):
        if name in kw:
            v = kw[name]
            if not (isinstance(v, (list, tuple)) and len(v) == 2):
                raise ConfigError(f"{name} must be a pair")
            kw[name] = tuple(v)
    if "involvement" in kw:
        try:
            kw["involvement"] = Involvement(str(kw["involvement"]).upper())
        except ValueError:
            raise ConfigError(f"unknown involvement {kw['involvement']!r}") from None
    cfg = ScenarioConfig(**kw)
    cfg.validate()
    return cfg


def load_config(path) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    return config_from_dict(data)


def config_hash(cfg: ScenarioConfig) -> str:
    canonical = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def sample_vehicle_gaps(rng: np.random.Generator, n: int, mean_m: float = 3.0) -> np.ndarray:
    """i.i.d. exponential longitudinal gaps between consecutive vehicles."""
    return rng.exponential(mean_m, size=n)


class World:
    """All placed nodes of one replication plus the geometry index.

    Node ids are assigned contiguously: stationary machines, wearables,
    pedestrians, vehicles, then the base station last.
    """

    def __init__(self, cfg: ScenarioConfig, grid: StreetGrid, machine_pos0,
                 machine_is_wearable, wearable_carrier_row, mobiles: MobilityField,
                 bs_distance_m: float):
        self.cfg = cfg
        self.grid = grid
        self.machine_pos0 = machine_pos0
        self.machine_is_wearable = machine_is_wearable
        self.wearable_carrier_row = wearable_carrier_row
        self.mobiles = mobiles
        self.n_stationary = cfg.n_stationary
        self.n_wearable = cfg.n_wearable
        self.n_pedestrians = cfg.n_pedestrians
        self.n_vehicles = cfg.n_vehicles
        self.assisting_vehicle_ids: tuple[int, ...] = ()
        self.bs_distance_m = float(bs_distance_m)

    # --- id layout ---
    @property
    def n_machines(self) -> int:
        return self.n_stationary + self.n_wearable

    @property
    def first_pedestrian_id(self) -> int:
        return self.n_machines

    @property
    def first_vehicle_id(self) -> int:
        return self.n_machines + self.n_pedestrians

    @property
    def bs_id(self) -> int:
        return self.first_vehicle_id + self.n_vehicles

    def vehicle_row(self, vehicle_id: int) -> int:
        row = vehicle_id - self.first_vehicle_id
        if not (0 <= row < self.n_vehicles):
            raise ConfigError(f"no vehicle with id {vehicle_id}")
        return self.n_pedestrians + row

    def vehicle_rows(self, vehicle_ids) -> np.ndarray:
        ids = np.asarray(vehicle_ids, dtype=np.int64)
        return ids - self.first_vehicle_id + self.n_pedestrians

    @property
    def vehicle_ids(self) -> np.ndarray:
        return np.arange(self.first_vehicle_id, self.first_vehicle_id + self.n_vehicles)

    @property
    def bs_pos(self) -> np.ndarray:
        cx, cy = self.grid.size_x / 2.0, self.grid.size_y / 2.0
        return np.array([cx + self.bs_distance_m, cy, self.cfg.bs_height_m])

    def set_bs_distance(self, d_m: float):
        self.bs_distance_m = float(d_m)

    # --- machine positions ---
    def machine_positions(self, machine_idx: np.ndarray, extra_dt: np.ndarray) -> np.ndarray:
        """Positions of the given machines, each at tick start + extra_dt."""
        machine_idx = np.asarray(machine_idx)
        pos = self.machine_pos0[machine_idx].copy()
        wear = self.machine_is_wearable[machine_idx]
        if wear.any():
            rows = self.wearable_carrier_row[machine_idx[wear] - self.n_stationary]
            pos[wear] = self.mobiles.positions_at_times(rows, np.asarray(extra_dt)[wear])
        return pos

    @property
    def mobile_node_ids(self) -> np.ndarray:
        return np.arange(self.first_pedestrian_id, self.bs_id)

    @property
    def mobile_kinds(self) -> list[str]:
        return ([NodeKind.PEDESTRIAN.value] * self.n_pedestrians
                + [NodeKind.VEHICLE.value] * self.n_vehicles)

    def iter_nodes(self):
        """Materialise Node views of the full world at the current time."""
        assisting = set(self.assisting_vehicle_ids)
        heights = self.machine_pos0[:, 2]
        wear_pos = self.machine_positions(
            np.arange(self.n_machines), np.zeros(self.n_machines))
        for i in range(self.n_stationary):
            yield Node(i, NodeKind.STATIONARY_MACHINE,
                       (wear_pos[i, 0], wear_pos[i, 1], heights[i]))
        for w in range(self.n_wearable):
            mi = self.n_stationary + w
            carrier = self.first_pedestrian_id + int(self.wearable_carrier_row[w])
            yield Node(mi, NodeKind.WEARABLE_MACHINE,
                       tuple(wear_pos[mi]), carried_by=carrier)
        mob_pos = self.mobiles.positions()
        for row in range(self.mobiles.n):
            nid = self.first_pedestrian_id + row
            kind = NodeKind.PEDESTRIAN if row < self.n_pedestrians else NodeKind.VEHICLE
            state = self.mobiles.state_of(row, nid)
            yield Node(nid, kind, tuple(mob_pos[row]),
                       heading=state.heading if self.mobiles.active[row] else None,
                       assisting=(kind == NodeKind.VEHICLE and nid in assisting))
        yield Node(self.bs_id, NodeKind.BASE_STATION, tuple(self.bs_pos))


def build_world(cfg: ScenarioConfig, rng: np.random.Generator,
                bs_distance_m: float = 1000.0) -> World:
    """Place every node of a fresh replication; reproducible from (cfg, rng)."""
    cfg.validate()
    grid = StreetGrid(cfg.block_size_m, cfg.street_width_m,
                      cfg.grid_blocks[0], cfg.grid_blocks[1])

    # stationary machines on sidewalk frames, heights uniform in their range
    sx, sy = grid.sample_sidewalk_points(rng, cfg.n_stationary)
    lo, hi = cfg.stationary_height_range_m
    sz = rng.uniform(lo, hi, cfg.n_stationary)

    # pedestrians on the street graph, on block-adjacent spans only so the
    # wearables they carry start on sidewalks
    n_mob = cfg.n_pedestrians + cfg.n_vehicles
    axis = np.empty(n_mob, dtype=np.int8)
    street = np.empty(n_mob, dtype=np.int32)
    offset = np.empty(n_mob, dtype=float)
    sign = np.empty(n_mob, dtype=np.int8)
    speed = np.empty(n_mob, dtype=float)
    lateral = np.empty(n_mob, dtype=float)
    height = np.empty(n_mob, dtype=float)

    ped = slice(0, cfg.n_pedestrians)
    sid = rng.integers(0, grid.n_streets, cfg.n_pedestrians)
    axis[ped] = (sid >= grid.nx).astype(np.int8)
    street[ped] = np.where(sid < grid.nx, sid, sid - grid.nx)
    spans = np.where(axis[ped] == 0, grid.ny, grid.nx)
    k = (rng.random(cfg.n_pedestrians) * spans).astype(np.int64)
    offset[ped] = k * grid.pitch + cfg.street_width_m + rng.random(cfg.n_pedestrians) * cfg.block_size_m
    sign[ped] = np.where(rng.random(cfg.n_pedestrians) < 0.5, 1, -1)
    speed[ped] = cfg.pedestrian_speed_kmh * KMH_TO_MPS
    lateral[ped] = grid.pedestrian_lane_offset()
    height[ped] = cfg.wearable_height_m

    # vehicles: lane chosen uniformly, consecutive in-lane gaps i.i.d. Exp(mean)
    veh = slice(cfg.n_pedestrians, n_mob)
    lanes = rng.integers(0, 2 * grid.n_streets, cfg.n_vehicles)
    v_axis = np.empty(cfg.n_vehicles, dtype=np.int8)
    v_street = np.empty(cfg.n_vehicles, dtype=np.int32)
    v_offset = np.empty(cfg.n_vehicles, dtype=float)
    v_sign = np.empty(cfg.n_vehicles, dtype=np.int8)
    for lane in range(2 * grid.n_streets):
        members = np.nonzero(lanes == lane)[0]
        if members.size == 0:
            continue
        sid_l = lane // 2
        ax = 0 if sid_l < grid.nx else 1
        length = grid.street_length(ax)
        anchor = rng.uniform(0.0, length)
        gaps = sample_vehicle_gaps(rng, members.size, cfg.mean_inter_vehicle_m)
        v_axis[members] = ax
        v_street[members] = sid_l if sid_l < grid.nx else sid_l - grid.nx
        v_offset[members] = (anchor + np.cumsum(gaps)) % length
        v_sign[members] = 1 if lane % 2 else -1
    axis[veh] = v_axis
    street[veh] = v_street
    offset[veh] = v_offset
    sign[veh] = v_sign
    speed[veh] = cfg.vehicle_speed_kmh * KMH_TO_MPS
    lateral[veh] = VEHICLE_LANE_OFFSET_M
    height[veh] = cfg.car_roof_height_m

    mobiles = MobilityField(grid, axis, street, offset, sign, speed, lateral, height)

    # wearables ride pedestrians (round-robin when counts differ)
    carrier_row = np.arange(cfg.n_wearable, dtype=np.int64) % cfg.n_pedestrians
    ped_pos0 = mobiles.positions(idx=carrier_row)

    machine_pos0 = np.empty((cfg.n_stationary + cfg.n_wearable, 3))
    machine_pos0[:cfg.n_stationary, 0] = sx
    machine_pos0[:cfg.n_stationary, 1] = sy
    machine_pos0[:cfg.n_stationary, 2] = sz
    machine_pos0[cfg.n_stationary:] = ped_pos0
    machine_is_wearable = np.zeros(cfg.n_stationary + cfg.n_wearable, dtype=bool)
    machine_is_wearable[cfg.n_stationary:] = True

    return World(cfg, grid, machine_pos0, machine_is_wearable, carrier_row,
                 mobiles, bs_distance_m)


def calibrate_bs_distance(cfg: ScenarioConfig, profile, *, pilot_rounds: int = 10,
                          pilot_duration_s: float = 60.0, tol_db: float = 0.25,
                          d_lo: float = 10.0, d_hi: float = 100_000.0,
                          probe_m: float = 1000.0, max_iter: int = 48,
                          workers: int = 1) -> float:
    """Find the BS distance whose baseline pooled mean SINR hits the target.

    The pilot estimator runs `pilot_rounds` short baseline replications with
    common random numbers across distance probes, so the objective is a fixed
    deterministic function of distance and bisection converges to the stated
    tolerance.  Probes start at 1 km and the bracket is expanded/shrunk
    geometrically before bisecting in the log-distance domain.
    """
    from .engine import pilot_mean_sinr_db

    base = cfg.with_overrides(involvement=Involvement.BASELINE, n_assisting_vehicles=0,
                              sim_duration_s=pilot_duration_s, rounds=pilot_rounds)
    target = cfg.target_baseline_sinr_db

    def measure(d):
        return pilot_mean_sinr_db(base, profile, d, rounds=pilot_rounds, workers=workers)

    d = min(max(probe_m, d_lo), d_hi)
    v = measure(d)
    if abs(v - target) <= tol_db:
        return d
    if v > target:
        lo, f_lo = d, v
        hi = d
        while True:
            hi = min(hi * 4.0, d_hi)
            f_hi = measure(hi)
            if abs(f_hi - target) <= tol_db:
                return hi
            if f_hi < target:
                break
            lo, f_lo = hi, f_hi
            if hi >= d_hi:
                raise CalibrationError(
                    f"target {target} dB unreachable: SINR still {f_hi:.2f} dB at {hi:.0f} m",
                    bracket=(d_lo, d_hi), achieved=f_hi)
    else:
        hi, f_hi = d, v
        lo = d
        while True:
            lo = max(lo / 4.0, d_lo)
            f_lo = measure(lo)
            if abs(f_lo - target) <= tol_db:
                return lo
            if f_lo > target:
                break
            hi, f_hi = lo, f_lo
            if lo <= d_lo:
                raise CalibrationError(
                    f"target {target} dB unreachable: SINR only {f_lo:.2f} dB at {lo:.0f} m",
                    bracket=(d_lo, d_hi), achieved=f_lo)
    for _ in range(max_iter):
        mid = math.sqrt(lo * hi)
        v = measure(mid)
        if abs(v - target) <= tol_db:
            return mid
        if v > target:
            lo = mid
        else:
            hi = mid
    raise CalibrationError(
        f"bisection did not reach {target}±{tol_db} dB within {max_iter} iterations",
        bracket=(lo, hi), achieved=v)


def write_snapshot_csv(world: World, path):
    """Deployment snapshot at the current instant (Fig.-3-style data)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("node_id,kind,x_m,y_m,z_m\n")
        for node in world.iter_nodes():
            x, y, z = (float(v) for v in node.position)
            fh.write(f"{node.id},{node.kind.value},{x!r},{y!r},{z!r}\n")
