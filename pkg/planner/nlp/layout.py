"""
Decision-vector layout.

Per knot: r(3), rd(3), theta(3), omega(3), then the foot position of every leg,
then the force of every leg in stance at that knot. Forces are stored in units
of body weight.
"""

from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

BASE_FIELDS = ("r", "rd", "theta", "omega")
BASE_SIZE = 12


@dataclass
class VariableLayout:
    knot_count: int
    leg_names: Tuple[str, ...]
    stance: np.ndarray  # (knots, legs) bool
    force_unit: float
    size: int = field(init=False)
    _base: np.ndarray = field(init=False, repr=False)
    _feet: np.ndarray = field(init=False, repr=False)
    _forces: Dict[Tuple[int, int], int] = field(init=False, repr=False)

    def __post_init__(self):
        legs = len(self.leg_names)
        if self.stance.shape != (self.knot_count, legs):
            raise ValueError("stance mask shape does not match knots x legs")
        self._base = np.empty(self.knot_count, dtype=int)
        self._feet = np.empty((self.knot_count, legs), dtype=int)
        self._forces = {}
        cursor = 0
        for k in range(self.knot_count):
            self._base[k] = cursor
            cursor += BASE_SIZE
            for i in range(legs):
                self._feet[k, i] = cursor
                cursor += 3
            for i in range(legs):
                if self.stance[k, i]:
                    self._forces[(k, i)] = cursor
                    cursor += 3
        self.size = cursor

    @staticmethod
    def expected_size(knot_count: int, legs: int, stance_pairs: int) -> int:
        return knot_count * (BASE_SIZE + 3 * legs) + 3 * stance_pairs

    def base(self, k: int, name: str) -> np.ndarray:
        offset = self._base[k] + 3 * BASE_FIELDS.index(name)
        return np.arange(offset, offset + 3)

    def foot(self, k: int, leg: int) -> np.ndarray:
        return np.arange(self._feet[k, leg], self._feet[k, leg] + 3)

    def force(self, k: int, leg: int) -> Optional[np.ndarray]:
        start = self._forces.get((k, leg))
        return None if start is None else np.arange(start, start + 3)

    def stance_legs(self, k: int) -> Sequence[int]:
        return [i for i in range(len(self.leg_names)) if self.stance[k, i]]

    def scales(self) -> np.ndarray:
        """Physical value = scaled value * scale"""
        scale = np.ones(self.size)
        for start in self._forces.values():
            scale[start:start + 3] = self.force_unit
        return scale

    def pack(self, r, rd, theta, omega, feet, forces) -> np.ndarray:
        """Physical arrays to a scaled decision vector; swing forces are dropped"""
        x = np.zeros(self.size)
        for k in range(self.knot_count):
            for name, values in zip(BASE_FIELDS, (r, rd, theta, omega)):
                x[self.base(k, name)] = values[k]
            for i in range(len(self.leg_names)):
                x[self.foot(k, i)] = feet[k, i]
                idx = self.force(k, i)
                if idx is not None:
                    x[idx] = forces[k, i] / self.force_unit
        return x

    def unpack(self, x: np.ndarray) -> Dict[str, np.ndarray]:
        """Scaled decision vector to physical arrays; swing forces are zero"""
        legs = len(self.leg_names)
        out = {name: np.empty((self.knot_count, 3)) for name in BASE_FIELDS}
        out["feet"] = np.empty((self.knot_count, legs, 3))
        out["forces"] = np.zeros((self.knot_count, legs, 3))
        for k in range(self.knot_count):
            for name in BASE_FIELDS:
                out[name][k] = x[self.base(k, name)]
            for i in range(legs):
                out["feet"][k, i] = x[self.foot(k, i)]
                idx = self.force(k, i)
                if idx is not None:
                    out["forces"][k, i] = x[idx] * self.force_unit
        return out
