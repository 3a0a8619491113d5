"""Manhattan street-grid geometry.

The map tiles each axis as [street | block | street | block | ...]: a street
of width ``street_width`` occupies the first part of every tile of pitch
``block_size + street_width`` and the block fills the rest.  Street
centerlines therefore sit at ``k * pitch + street_width / 2``.  Sidewalks are
2 m strips just inside every block edge.  The map is a torus: coordinates
wrap at the area boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PlacementError

SIDEWALK_MARGIN_M = 2.0
VEHICLE_LANE_OFFSET_M = 2.5


@dataclass(frozen=True)
class StreetGrid:
    block_size_m: float
    street_width_m: float
    nx: int  # vertical streets (count along x)
    ny: int  # horizontal streets (count along y)

    @property
    def pitch(self) -> float:
        return self.block_size_m + self.street_width_m

    @property
    def size_x(self) -> float:
        return self.nx * self.pitch

    @property
    def size_y(self) -> float:
        return self.ny * self.pitch

    @property
    def half_street(self) -> float:
        return self.street_width_m / 2.0

    @property
    def n_streets(self) -> int:
        return self.nx + self.ny

    def centerline(self, index: int) -> float:
        """Centerline coordinate of street `index` on its own axis."""
        return index * self.pitch + self.half_street

    def centerlines_x(self) -> np.ndarray:
        return np.arange(self.nx) * self.pitch + self.half_street

    def centerlines_y(self) -> np.ndarray:
        return np.arange(self.ny) * self.pitch + self.half_street

    def street_length(self, axis: int) -> float:
        # vertical streets (axis 0) run the full y extent, horizontal the x extent
        return self.size_y if axis == 0 else self.size_x

    def pedestrian_lane_offset(self) -> float:
        return self.half_street + SIDEWALK_MARGIN_M / 2.0

    def sample_sidewalk_points(self, rng: np.random.Generator, n: int):
        """n points uniform over the sidewalk frames of all blocks -> (x, y)."""
        b = self.block_size_m
        m = SIDEWALK_MARGIN_M
        inner = b - 2.0 * m
        # frame decomposed into south/north strips (full width) and west/east
        # strips (between them), sampled by area
        areas = np.array([b * m, b * m, m * inner, m * inner])
        strip = rng.choice(4, size=n, p=areas / areas.sum())
        u = rng.random(n)
        v = rng.random(n)
        lx = np.where(strip <= 1, u * b, u * m + np.where(strip == 3, b - m, 0.0))
        ly = np.where(strip <= 1, v * m + np.where(strip == 1, b - m, 0.0), m + v * inner)
        bi = rng.integers(0, self.nx, size=n)
        bj = rng.integers(0, self.ny, size=n)
        x = bi * self.pitch + self.street_width_m + lx
        y = bj * self.pitch + self.street_width_m + ly
        return x, y

    def on_sidewalk(self, x, y) -> np.ndarray:
        """Boolean mask: point lies on a sidewalk strip (frame of some block)."""
        lx = np.mod(np.asarray(x, dtype=float), self.pitch) - self.street_width_m
        ly = np.mod(np.asarray(y, dtype=float), self.pitch) - self.street_width_m
        b = self.block_size_m
        m = SIDEWALK_MARGIN_M
        in_block = (lx >= 0) & (ly >= 0)
        near_edge = (lx < m) | (lx >= b - m) | (ly < m) | (ly >= b - m)
        return in_block & near_edge

    def nearest_centerline_distance(self, x, y) -> np.ndarray:
        """Distance (torus-aware) to the nearest street centerline."""
        dx = np.abs(np.mod(np.asarray(x, dtype=float) - self.half_street, self.pitch))
        dy = np.abs(np.mod(np.asarray(y, dtype=float) - self.half_street, self.pitch))
        dx = np.minimum(dx, self.pitch - dx)
        dy = np.minimum(dy, self.pitch - dy)
        return np.minimum(dx, dy)

    def nearest_lane_point(self, x: float, y: float):
        """Project (x, y) onto the nearest street centerline (torus-aware).

        Returns (px, py, axis, street_index, offset) with coordinates wrapped
        into the area.  Raises PlacementError if no centerline lies within
        one block size of the point.
        """
        x = float(np.mod(x, self.size_x))
        y = float(np.mod(y, self.size_y))
        cx = self.centerlines_x()
        cy = self.centerlines_y()
        dxs = np.abs(cx - x)
        dxs = np.minimum(dxs, self.size_x - dxs)
        dys = np.abs(cy - y)
        dys = np.minimum(dys, self.size_y - dys)
        iv = int(np.argmin(dxs))
        ih = int(np.argmin(dys))
        if min(dxs[iv], dys[ih]) > self.block_size_m:
            raise PlacementError(f"no street lane within one block of ({x:.1f}, {y:.1f})")
        if dxs[iv] <= dys[ih]:
            return float(cx[iv]), y, 0, iv, y
        return x, float(cy[ih]), 1, ih, x

    def block_index(self, x, y):
        """Tile indices (bi, bj) of positions; streets attribute to their tile."""
        bi = np.floor_divide(np.asarray(x, dtype=float), self.pitch).astype(int)
        bj = np.floor_divide(np.asarray(y, dtype=float), self.pitch).astype(int)
        return np.clip(bi, 0, self.nx - 1), np.clip(bj, 0, self.ny - 1)
