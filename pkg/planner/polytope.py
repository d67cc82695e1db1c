"""
Force polytopes in halfspace form.

The exact polytope maps the joint-torque box through J(q)^-T and takes the
convex hull. The morphed polytope approximates it from a few polytopes
precomputed at sampled hip-to-foot distances: facet normal angles and offsets
are interpolated in the distance l, then the normals are rotated by the leg
tilt alpha.
"""

import itertools
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import ConvexHull

from planner.errors import DegenerateFoot, KinkWarning, SingularConfiguration
from planner.kinematics import PlanarLeg, leg_ik, leg_jacobian

if TYPE_CHECKING:
    from planner.model import LegModel, RobotModel

logger = logging.getLogger(__name__)

SINGULAR_DET = 1e-8
DEGENERATE_LENGTH = 1e-6
KINK_BAND = 1e-9


@dataclass(frozen=True)
class HalfspacePolytope:
    """{f : normals @ f <= offsets} with unit-norm rows"""

    normals: np.ndarray
    offsets: np.ndarray
    vertices: Optional[np.ndarray] = None

    def __post_init__(self):
        norms = np.linalg.norm(self.normals, axis=1)
        if not np.allclose(norms, 1.0, atol=1e-10):
            raise ValueError("polytope normals must be unit vectors")
        if self.normals.shape[0] != self.offsets.shape[0]:
            raise ValueError("one offset per normal is required")

    @property
    def count(self) -> int:
        return self.normals.shape[0]

    @property
    def dim(self) -> int:
        return self.normals.shape[1]

    @property
    def angles(self) -> np.ndarray:
        """atan2(n_z, n_x) of each row, sagittal polytopes only"""
        return np.arctan2(self.normals[:, -1], self.normals[:, 0])

    def residual(self, force: Sequence[float]) -> np.ndarray:
        return self.normals @ np.asarray(force, dtype=float) - self.offsets

    def contains(self, force: Sequence[float], tol: float = 1e-9) -> bool:
        return bool(np.all(self.residual(force) <= tol))

    def sorted_by_angle(self) -> "HalfspacePolytope":
        order = np.argsort(self.angles)
        return HalfspacePolytope(self.normals[order], self.offsets[order], self.vertices)


@dataclass(frozen=True)
class PolarFootCoord:
    l: float
    alpha: float


# ============================================================================
# Exact polytope
# ============================================================================

def _merge_coplanar(equations: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    merged = []
    for eq in equations:
        if not any(np.allclose(eq, other, atol=tol * max(1.0, abs(other[-1]))) for other in merged):
            merged.append(eq)
    return np.array(merged)


def polytope_from_jacobian(jacobian: np.ndarray, torque_limits: Sequence[float]) -> HalfspacePolytope:
    """Image of the torque box under J^-T, in halfspace form"""
    jacobian = np.asarray(jacobian, dtype=float)
    tau = np.asarray(torque_limits, dtype=float)
    if abs(np.linalg.det(jacobian)) <= SINGULAR_DET:
        raise SingularConfiguration(f"|det J| = {abs(np.linalg.det(jacobian)):.3e} <= {SINGULAR_DET}")

    signs = np.array(list(itertools.product((-1.0, 1.0), repeat=tau.size)))
    torques = signs * tau
    vertices = np.linalg.solve(jacobian.T, torques.T).T

    hull = ConvexHull(vertices)
    equations = _merge_coplanar(hull.equations)
    normals = equations[:, :-1]
    offsets = -equations[:, -1]
    scale = np.linalg.norm(normals, axis=1)
    return HalfspacePolytope(normals / scale[:, None], offsets / scale, vertices)


def exact_force_polytope(q: Sequence[float], leg: PlanarLeg, torque_limits: Sequence[float]) -> HalfspacePolytope:
    """Ground-truth polytope of realisable foot forces at joint configuration q"""
    return polytope_from_jacobian(leg_jacobian(q, leg), torque_limits)


# ============================================================================
# Polar coordinates and predefined polytopes
# ============================================================================

def polar_coords(p_base: Sequence[float], hip: Sequence[float]) -> PolarFootCoord:
    """Hip-to-foot distance and tilt (positive when the foot is ahead of the hip)"""
    p = np.asarray(p_base, dtype=float)
    h = np.asarray(hip, dtype=float)
    dx, dz = p[0] - h[0], p[-1] - h[-1]
    length = math.hypot(dx, dz)
    if length < DEGENERATE_LENGTH:
        raise DegenerateFoot(f"foot is {length:.2e} m from the hip")
    return PolarFootCoord(length, math.atan2(dx, -dz))


def _wrap(angle):
    return (np.asarray(angle) + np.pi) % (2.0 * np.pi) - np.pi


def rotation_2d(alpha: float) -> np.ndarray:
    c, s = math.cos(alpha), math.sin(alpha)
    return np.array([[c, -s], [s, c]])


def rotation_2d_derivative(alpha: float) -> np.ndarray:
    c, s = math.cos(alpha), math.sin(alpha)
    return np.array([[-s, -c], [c, -s]])


@dataclass(frozen=True)
class PredefinedPolytopes:
    """
    Polytopes sampled at increasing hip-to-foot distances with the leg vertical.

    Rows are put in correspondence at construction: the nominal polytope is
    sorted by normal angle and every other polytope is matched to it by nearest
    angle. The stored angles are unwrapped to lie within pi of the nominal ones.
    """

    distances: np.ndarray
    polytopes: Tuple[HalfspacePolytope, ...]
    nominal_index: Optional[int] = None
    angles: np.ndarray = field(init=False)
    offsets: np.ndarray = field(init=False)

    def __post_init__(self):
        distances = np.asarray(self.distances, dtype=float)
        if distances.size < 3 or distances.size != len(self.polytopes):
            raise ValueError("need at least three distances, one polytope each")
        if np.any(np.diff(distances) <= 0):
            raise ValueError(f"distances must be strictly increasing, got {distances}")
        counts = {p.count for p in self.polytopes}
        if len(counts) != 1:
            raise ValueError(f"predefined polytopes have different facet counts: {sorted(counts)}")
        if any(p.dim != 2 for p in self.polytopes):
            raise ValueError("predefined polytopes must be sagittal (2-D)")

        nominal = distances.size // 2 if self.nominal_index is None else self.nominal_index
        reference = self.polytopes[nominal].sorted_by_angle()
        ref_angles = reference.angles

        angles = np.empty((distances.size, reference.count))
        offsets = np.empty_like(angles)
        for k, poly in enumerate(self.polytopes):
            gap = np.abs(_wrap(poly.angles[None, :] - ref_angles[:, None]))
            match = np.argmin(gap, axis=1)
            if len(set(match.tolist())) != reference.count:
                raise ValueError(
                    f"facet correspondence between polytope {k} and the nominal polytope is ambiguous"
                )
            angles[k] = ref_angles + _wrap(poly.angles[match] - ref_angles)
            offsets[k] = poly.offsets[match]

        object.__setattr__(self, "distances", distances)
        object.__setattr__(self, "nominal_index", nominal)
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "offsets", offsets)

    @property
    def row_count(self) -> int:
        return self.angles.shape[1]

    @property
    def nominal_distance(self) -> float:
        return float(self.distances[self.nominal_index])

    def clamp(self, length: float) -> float:
        return float(np.clip(length, self.distances[0], self.distances[-1]))

    def interpolation(self, length: float) -> Tuple[int, int, float, float]:
        """(a, b, t, dt/dl) for the clamped distance"""
        clamped = self.clamp(length)
        a, b = select_neighbors(clamped, self)
        span = self.distances[b] - self.distances[a]
        t = (clamped - self.distances[a]) / span
        inside = self.distances[0] <= length <= self.distances[-1]
        return a, b, t, (1.0 / span if inside else 0.0)

    @classmethod
    def from_leg(cls, leg: PlanarLeg, torque_limits: Sequence[float],
                 distances: Sequence[float]) -> "PredefinedPolytopes":
        """Exact polytopes of a sagittal leg standing vertically at each distance"""
        hip = leg.sagittal_hip()
        polytopes = []
        for length in distances:
            q = leg_ik(hip + np.array([0.0, -length]), leg)
            polytopes.append(exact_force_polytope(q, leg, torque_limits))
            logger.debug("Predefined polytope at l=%.3f: %d facets", length, polytopes[-1].count)
        return cls(np.asarray(distances, dtype=float), tuple(polytopes))


def select_neighbors(length: float, predefined: PredefinedPolytopes) -> Tuple[int, int]:
    """First interval [l_k, l_k+1] with l <= l_k+1 (0-based, after clamping)"""
    clamped = predefined.clamp(length)
    for k in range(predefined.distances.size - 1):
        if clamped <= predefined.distances[k + 1]:
            return k, k + 1
    last = predefined.distances.size - 1
    return last - 1, last


def morph_normal(coord: PolarFootCoord, row: int, predefined: PredefinedPolytopes) -> np.ndarray:
    a, b, t, _ = predefined.interpolation(coord.l)
    theta = predefined.angles[a, row] + t * (predefined.angles[b, row] - predefined.angles[a, row])
    return rotation_2d(coord.alpha) @ np.array([math.cos(theta), math.sin(theta)])


def morph_offset(coord: PolarFootCoord, row: int, predefined: PredefinedPolytopes) -> float:
    a, b, t, _ = predefined.interpolation(coord.l)
    return float(predefined.offsets[a, row] + t * (predefined.offsets[b, row] - predefined.offsets[a, row]))


def morph(coord: PolarFootCoord, predefined: PredefinedPolytopes) -> HalfspacePolytope:
    """All rows at once"""
    a, b, t, _ = predefined.interpolation(coord.l)
    theta = predefined.angles[a] + t * (predefined.angles[b] - predefined.angles[a])
    offsets = predefined.offsets[a] + t * (predefined.offsets[b] - predefined.offsets[a])
    unit = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    return HalfspacePolytope(unit @ rotation_2d(coord.alpha).T, offsets)


def morphed_polytope(p_base: Sequence[float], leg_index: int, model: "RobotModel") -> HalfspacePolytope:
    leg = model.legs[leg_index]
    return morph(polar_coords(p_base, leg.hip), leg.polytopes)


def _warn_if_kink(length: float, predefined: PredefinedPolytopes) -> None:
    for interior in predefined.distances[1:-1]:
        if abs(length - interior) < KINK_BAND:
            warnings.warn(
                f"l={length:.12f} is at the interpolation kink l={interior}; one-sided derivative used",
                KinkWarning,
                stacklevel=3,
            )


def polytope_constraint_jacobian(p_base: Sequence[float], force: Sequence[float], leg_index: int,
                                 model: "RobotModel") -> Tuple[np.ndarray, np.ndarray]:
    """
    Analytic derivatives of g = A(p) f - d(p).

    Returns (dg/dp, dg/df) with p the base-frame foot position (3 columns, the
    y column is zero) and f the sagittal force (f_x', f_z).
    """
    leg = model.legs[leg_index]
    predefined = leg.polytopes
    p = np.asarray(p_base, dtype=float)
    f = np.asarray(force, dtype=float)
    coord = polar_coords(p, leg.hip)
    _warn_if_kink(coord.l, predefined)

    a, b, t, dt_dl = predefined.interpolation(coord.l)
    theta = predefined.angles[a] + t * (predefined.angles[b] - predefined.angles[a])
    unit = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    unit_slope = np.stack([-np.sin(theta), np.cos(theta)], axis=1)
    rot = rotation_2d(coord.alpha)

    normals = unit @ rot.T
    dtheta_dl = (predefined.angles[b] - predefined.angles[a]) * dt_dl
    doffset_dl = (predefined.offsets[b] - predefined.offsets[a]) * dt_dl
    dnormal_dl = (unit_slope @ rot.T) * dtheta_dl[:, None]
    dnormal_dalpha = unit @ rotation_2d_derivative(coord.alpha).T

    dg_dl = dnormal_dl @ f - doffset_dl
    dg_dalpha = dnormal_dalpha @ f

    dx = p[0] - leg.hip[0]
    dz = p[-1] - leg.hip[-1]
    length_sq = coord.l**2
    dl_dp = np.array([dx / coord.l, 0.0, dz / coord.l])
    dalpha_dp = np.array([-dz / length_sq, 0.0, dx / length_sq])

    dg_dp = np.outer(dg_dl, dl_dp) + np.outer(dg_dalpha, dalpha_dp)
    return dg_dp, normals


def lateral_force_bound(leg: "LegModel") -> float:
    """Bound on the force component normal to the sagittal plane: tau_HAA over nominal hip height"""
    depth = float(leg.hip[2] - leg.nominal_foot[2])
    return float(leg.torque_limits[0]) / depth


def compare_polytopes(approx: HalfspacePolytope, exact: HalfspacePolytope) -> Tuple[float, float]:
    """Worst facet-angle deviation (deg) and worst relative offset deviation after matching rows by angle"""
    if approx.count != exact.count:
        return math.inf, math.inf
    gap = np.abs(_wrap(approx.angles[:, None] - exact.angles[None, :]))
    match = np.argmin(gap, axis=1)
    angle_dev = np.degrees(np.max(gap[np.arange(approx.count), match]))
    offset_dev = np.max(np.abs(approx.offsets - exact.offsets[match]) / np.abs(exact.offsets[match]))
    return float(angle_dev), float(offset_dev)
