"""Manhattan mobility: constant-speed motion on the street graph.

Nodes live on street centerlines, parameterised by (axis, street index,
offset along the street, direction sign).  At every intersection crossing a
new direction is drawn: straight 0.5, left 0.25, right 0.25 (no U-turns).
The map is a torus, so offsets simply wrap.  Lateral lane placement
(right-hand traffic for vehicles, sidewalk-side for pedestrians) only affects
the Cartesian rendering of a state, not its kinematics.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import PlacementError, StepSizeError
from .grid import StreetGrid

HEADINGS = ("N", "S", "E", "W")

# (axis, sign) <-> compass heading; axis 0 moves along y, axis 1 along x
_HEADING_OF = {(0, 1): "N", (0, -1): "S", (1, 1): "E", (1, -1): "W"}
_STATE_OF = {v: k for k, v in _HEADING_OF.items()}

P_STRAIGHT = 0.5
P_LEFT = 0.25


@dataclass(frozen=True)
class MobilityState:
    """Single-node kinematic state on the street graph."""

    node_id: int
    axis: int           # 0: on a vertical street (moving along y); 1: horizontal
    street_index: int
    offset_m: float
    speed_mps: float
    heading_sign: int   # +1 = N/E, -1 = S/W

    @property
    def heading(self) -> str:
        return _HEADING_OF[(self.axis, self.heading_sign)]

    @property
    def lane_position(self):
        return (self.axis, self.street_index), self.offset_m


def state_from_heading(node_id, street_index, offset_m, speed_mps, heading) -> MobilityState:
    axis, sign = _STATE_OF[heading]
    return MobilityState(node_id, axis, street_index, offset_m, speed_mps, sign)


def _turn_sign(axis, sign, go_left):
    # axis 0: left of N(+) is W(-), left of S(-) is E(+); axis 1 mirrored
    if axis == 0:
        return -sign if go_left else sign
    return sign if go_left else -sign


def step(state: MobilityState, grid: StreetGrid, dt: float,
         rng: np.random.Generator) -> MobilityState:
    """Advance one node by dt seconds (at most one intersection crossing)."""
    if dt <= 0:
        raise StepSizeError("dt must be positive")
    travel = state.speed_mps * dt
    if travel > grid.block_size_m:
        raise StepSizeError(
            f"dt {dt} s travels {travel:.1f} m > block size {grid.block_size_m} m")
    length = grid.street_length(state.axis)
    m = (state.offset_m - grid.half_street) % grid.pitch
    gap = (grid.pitch - m) if state.heading_sign > 0 else (m if m > 0 else grid.pitch)
    new_offset = (state.offset_m + state.heading_sign * travel) % length
    if travel <= gap:
        return replace(state, offset_m=new_offset)
    u = rng.random()
    if u < P_STRAIGHT:
        return replace(state, offset_m=new_offset)
    cross_coord = (state.offset_m + state.heading_sign * gap) % length
    k = int(round((cross_coord - grid.half_street) / grid.pitch)) % \
        (grid.ny if state.axis == 0 else grid.nx)
    residual = travel - gap
    go_left = u < P_STRAIGHT + P_LEFT
    new_sign = _turn_sign(state.axis, state.heading_sign, go_left)
    new_axis = 1 - state.axis
    new_length = grid.street_length(new_axis)
    offset = (grid.centerline(state.street_index) + new_sign * residual) % new_length
    return MobilityState(state.node_id, new_axis, k, offset, state.speed_mps, new_sign)


class MobilityField:
    """Vectorized mobility state for all mobile nodes of one replication.

    Rows are immutable in count; parked nodes are frozen in place and skipped
    by stepping.  Cartesian positions are derived on demand, optionally
    extrapolated a fraction of a tick along the current heading.
    """

    def __init__(self, grid: StreetGrid, axis, street_index, offset, sign,
                 speed, lateral, height):
        self.grid = grid
        self.axis = np.asarray(axis, dtype=np.int8)
        self.street_index = np.asarray(street_index, dtype=np.int32)
        self.offset = np.asarray(offset, dtype=float)
        self.sign = np.asarray(sign, dtype=np.int8)
        self.speed = np.asarray(speed, dtype=float)
        self.lateral = np.asarray(lateral, dtype=float)
        self.height = np.asarray(height, dtype=float)
        self.active = np.ones(self.offset.shape, dtype=bool)
        self.parked_xy = np.full((self.offset.size, 2), np.nan)

    @property
    def n(self) -> int:
        return self.offset.size

    def copy(self) -> "MobilityField":
        out = MobilityField(self.grid, self.axis.copy(), self.street_index.copy(),
                            self.offset.copy(), self.sign.copy(), self.speed.copy(),
                            self.lateral.copy(), self.height.copy())
        out.active = self.active.copy()
        out.parked_xy = self.parked_xy.copy()
        return out

    def positions(self, extra_dt: float = 0.0, idx=None) -> np.ndarray:
        """(n, 3) Cartesian positions, extrapolated extra_dt along headings."""
        if idx is None:
            idx = slice(None)
        axis = self.axis[idx]
        sign = self.sign[idx]
        active = self.active[idx]
        off = self.offset[idx] + np.where(active, sign * self.speed[idx] * extra_dt, 0.0)
        center = self.street_index[idx] * self.grid.pitch + self.grid.half_street
        lat_sign = np.where(axis == 0, sign, -sign)
        lat = center + lat_sign * self.lateral[idx]
        vertical = axis == 0
        x = np.mod(np.where(vertical, lat, off), self.grid.size_x)
        y = np.mod(np.where(vertical, off, lat), self.grid.size_y)
        parked = ~active
        if parked.any():
            x = np.where(parked, self.parked_xy[idx][..., 0], x)
            y = np.where(parked, self.parked_xy[idx][..., 1], y)
        return np.stack([x, y, self.height[idx]], axis=-1)

    def positions_at_times(self, idx: np.ndarray, extra_dt: np.ndarray) -> np.ndarray:
        """Positions of chosen rows, each extrapolated by its own extra_dt."""
        axis = self.axis[idx]
        sign = self.sign[idx]
        active = self.active[idx]
        off = self.offset[idx] + np.where(active, sign * self.speed[idx] * extra_dt, 0.0)
        center = self.street_index[idx] * self.grid.pitch + self.grid.half_street
        lat = center + np.where(axis == 0, sign, -sign) * self.lateral[idx]
        vertical = axis == 0
        x = np.mod(np.where(vertical, lat, off), self.grid.size_x)
        y = np.mod(np.where(vertical, off, lat), self.grid.size_y)
        parked = ~active
        if parked.any():
            x = np.where(parked, self.parked_xy[idx, 0], x)
            y = np.where(parked, self.parked_xy[idx, 1], y)
        return np.stack([x, y, self.height[idx]], axis=-1)

    def step_all(self, dt: float, rng: np.random.Generator):
        """Advance every active node by dt (vectorized scalar-step semantics)."""
        g = self.grid
        act = self.active
        travel = np.where(act, self.speed * dt, 0.0)
        if travel.size and travel.max() > g.block_size_m:
            raise StepSizeError("dt crosses more than one intersection")
        m = (self.offset - g.half_street) % g.pitch
        gap = np.where(self.sign > 0, g.pitch - m, np.where(m > 0, m, g.pitch))
        length = np.where(self.axis == 0, g.size_y, g.size_x)
        crossed = act & (travel > gap)
        self.offset = (self.offset + self.sign * travel) % length
        if not crossed.any():
            return
        ci = np.nonzero(crossed)[0]
        u = rng.random(ci.size)
        turning = u >= P_STRAIGHT
        ti = ci[turning]
        if ti.size == 0:
            return
        go_left = u[turning] < P_STRAIGHT + P_LEFT
        axis = self.axis[ti]
        sign = self.sign[ti]
        cross_coord = (self.offset[ti] - self.sign[ti] * (travel[ti] - gap[ti])) % length[ti]
        n_cross = np.where(axis == 0, g.ny, g.nx)
        k = np.round((cross_coord - g.half_street) / g.pitch).astype(np.int64) % n_cross
        residual = travel[ti] - gap[ti]
        new_sign = np.where(axis == 0,
                            np.where(go_left, -sign, sign),
                            np.where(go_left, sign, -sign)).astype(np.int8)
        old_center = self.street_index[ti] * g.pitch + g.half_street
        new_axis = (1 - axis).astype(np.int8)
        new_length = np.where(new_axis == 0, g.size_y, g.size_x)
        self.offset[ti] = (old_center + new_sign * residual) % new_length
        self.axis[ti] = new_axis
        self.sign[ti] = new_sign
        self.street_index[ti] = k

    def park(self, row: int, x: float, y: float):
        self.active[row] = False
        self.parked_xy[row] = (x, y)

    def state_of(self, row: int, node_id: int) -> MobilityState:
        return MobilityState(node_id, int(self.axis[row]), int(self.street_index[row]),
                             float(self.offset[row]), float(self.speed[row]),
                             int(self.sign[row]))


def park_vehicle(world, vehicle_id: int, target_xy) -> object:
    """Park a vehicle at the nearest street-lane point to target_xy.

    The vehicle stops (speed effectively zero via exclusion from stepping)
    and keeps that position for the rest of the replication.  Co-location of
    several parked vehicles is permitted.
    """
    row = world.vehicle_row(vehicle_id)
    px, py, _, _, _ = world.grid.nearest_lane_point(float(target_xy[0]), float(target_xy[1]))
    world.mobiles.park(row, px, py)
    return world


def write_trace_csv(path, world, duration_s: float, dt: float, rng: np.random.Generator):
    """Debug/visualisation trace of all mobile nodes: t_s, node_id, kind, x, y, z."""
    field = world.mobiles
    ids = world.mobile_node_ids
    kinds = world.mobile_kinds
    n_steps = int(round(duration_s / dt))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("t_s,node_id,kind,x_m,y_m,z_m\n")
        for s in range(n_steps + 1):
            t = s * dt
            pos = field.positions()
            for i in range(field.n):
                fh.write(f"{t!r},{ids[i]},{kinds[i]},"
                         f"{pos[i, 0]!r},{pos[i, 1]!r},{pos[i, 2]!r}\n")
            if s < n_steps:
                field.step_all(dt, rng)
