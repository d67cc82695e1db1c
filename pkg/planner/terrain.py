"""
Terrain height fields and the TerrainModel consumed by constraints and validators.

Each primitive has a sharp variant (used by the validators) and a smoothed
variant (used by the solver). Smoothing ramps sit on the low side of every
edge, so the smoothed field is never below the sharp one.
"""

from dataclasses import dataclass, replace
from typing import Optional, Protocol, Sequence, Tuple

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from planner.errors import ConfigError

DEFAULT_RAMP = 0.01


class HeightField(Protocol):
    def height(self, x, y, sharp: bool = False): ...

    def gradient(self, x, y, sharp: bool = False) -> Tuple[float, float]: ...


# ============================================================================
# Primitives
# ============================================================================

@dataclass(frozen=True)
class FlatGround:
    level: float = 0.0

    def height(self, x, y, sharp: bool = False):
        return np.zeros_like(np.asarray(x, dtype=float)) + self.level

    def gradient(self, x, y, sharp: bool = False) -> Tuple[float, float]:
        return 0.0, 0.0


def _smoothstep(u):
    u = np.clip(u, 0.0, 1.0)
    return u * u * (3.0 - 2.0 * u)


def _smoothstep_slope(u):
    inside = (u > 0.0) & (u < 1.0)
    return np.where(inside, 6.0 * u * (1.0 - u), 0.0)


@dataclass(frozen=True)
class Pallet:
    """
    Axis-aligned box of given height whose near edge is at x = edge_x.

    length=None means the pallet extends to +inf in x.
    """

    height_m: float
    edge_x: float
    length: Optional[float] = None
    ramp: float = DEFAULT_RAMP

    def __post_init__(self):
        if self.height_m < 0:
            raise ConfigError("pallet height must be non-negative")
        if self.ramp <= 0:
            raise ConfigError("smoothing ramp width must be positive")
        if self.length is not None and self.length <= 0:
            raise ConfigError("pallet length must be positive")

    @property
    def far_edge(self) -> float:
        return np.inf if self.length is None else self.edge_x + self.length

    def height(self, x, y, sharp: bool = False):
        x = np.asarray(x, dtype=float)
        if sharp:
            on_top = (x >= self.edge_x) & (x <= self.far_edge)
            return np.where(on_top, self.height_m, 0.0)
        rise = _smoothstep((x - (self.edge_x - self.ramp)) / self.ramp)
        if self.length is None:
            return self.height_m * rise
        fall = _smoothstep(((self.far_edge + self.ramp) - x) / self.ramp)
        return self.height_m * np.minimum(rise, fall)

    def gradient(self, x, y, sharp: bool = False) -> Tuple[float, float]:
        if sharp:
            return 0.0, 0.0
        u_rise = (float(x) - (self.edge_x - self.ramp)) / self.ramp
        slope = float(_smoothstep_slope(u_rise))
        if self.length is not None and float(x) > self.far_edge:
            u_fall = ((self.far_edge + self.ramp) - float(x)) / self.ramp
            slope = -float(_smoothstep_slope(u_fall))
        return self.height_m * slope / self.ramp, 0.0


class HeightSamples:
    """Heights sampled on a regular (x, y) grid, interpolated bilinearly"""

    def __init__(self, xs: Sequence[float], ys: Sequence[float], heights: Sequence[Sequence[float]]):
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        heights = np.asarray(heights, dtype=float)
        if heights.shape != (xs.size, ys.size):
            raise ConfigError(
                f"height samples must have shape ({xs.size}, {ys.size}), got {heights.shape}"
            )
        if not np.all(np.isfinite(heights)):
            raise ConfigError("height samples must be finite")
        self.xs, self.ys, self.heights = xs, ys, heights
        self._interp = RegularGridInterpolator(
            (xs, ys), heights, method="linear", bounds_error=False, fill_value=None
        )

    def height(self, x, y, sharp: bool = False):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        x, y = np.broadcast_arrays(x, y)
        points = np.stack([x.ravel(), y.ravel()], axis=-1)
        values = self._interp(points).reshape(x.shape)
        return values if values.ndim else float(values)

    def gradient(self, x, y, sharp: bool = False) -> Tuple[float, float]:
        step = 1e-6
        hx = (self.height(x + step, y) - self.height(x - step, y)) / (2 * step)
        hy = (self.height(x, y + step) - self.height(x, y - step)) / (2 * step)
        return float(hx), float(hy)


# ============================================================================
# Terrain model
# ============================================================================

@dataclass(frozen=True)
class TerrainModel:
    """Height field plus contact parameters (friction, swing clearance, force cap)"""

    surface: HeightField
    friction: float = 0.5
    min_clearance: float = 0.03
    force_cap: float = 1765.8
    sharp: bool = False

    def __post_init__(self):
        if self.friction <= 0:
            raise ConfigError("friction coefficient must be positive")
        if self.min_clearance < 0:
            raise ConfigError("min_clearance must be non-negative")
        if self.force_cap <= 0:
            raise ConfigError("force_cap must be positive")

    def as_sharp(self) -> "TerrainModel":
        return replace(self, sharp=True)

    def height(self, x, y):
        value = self.surface.height(x, y, sharp=self.sharp)
        return float(value) if np.ndim(value) == 0 else value

    def gradient(self, x: float, y: float) -> Tuple[float, float]:
        return self.surface.gradient(x, y, sharp=self.sharp)

    def normal(self, x: float, y: float) -> np.ndarray:
        hx, hy = self.gradient(x, y)
        s = np.array([-hx, -hy, 1.0])
        return s / np.linalg.norm(s)

    def tangents(self, x: float, y: float) -> Tuple[np.ndarray, np.ndarray]:
        """Unit tangents with t1 x t2 = s"""
        hx, _ = self.gradient(x, y)
        t1 = np.array([1.0, 0.0, hx])
        t1 /= np.linalg.norm(t1)
        t2 = np.cross(self.normal(x, y), t1)
        return t1, t2 / np.linalg.norm(t2)

    def frame(self, x: float, y: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(s, t1, t2) at a point"""
        t1, t2 = self.tangents(x, y)
        return self.normal(x, y), t1, t2
