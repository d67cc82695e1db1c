"""
Tests for the decision-vector layout
"""

import numpy as np

from planner.nlp.layout import VariableLayout


def _layout():
    stance = np.array([
        [True, True],
        [True, False],
        [True, True],
    ])
    return VariableLayout(3, ("A", "B"), stance, force_unit=100.0)


def test_size_counts_only_stance_forces():
    layout = _layout()
    assert layout.size == VariableLayout.expected_size(3, 2, 5)
    assert layout.size == 3 * (12 + 6) + 15


def test_indices_are_disjoint_and_cover_the_vector():
    layout = _layout()
    used = []
    for k in range(3):
        for name in ("r", "rd", "theta", "omega"):
            used += layout.base(k, name).tolist()
        for i in range(2):
            used += layout.foot(k, i).tolist()
            force = layout.force(k, i)
            if force is not None:
                used += force.tolist()
    assert sorted(used) == list(range(layout.size))


def test_swing_leg_has_no_force():
    layout = _layout()
    assert layout.force(1, 1) is None
    assert layout.stance_legs(1) == [0]


def test_pack_scales_forces_and_drops_swing():
    layout = _layout()
    rng = np.random.default_rng(0)
    r, rd, theta, omega = (rng.normal(size=(3, 3)) for _ in range(4))
    feet = rng.normal(size=(3, 2, 3))
    forces = rng.normal(size=(3, 2, 3)) * 100.0
    x = layout.pack(r, rd, theta, omega, feet, forces)
    assert np.allclose(x[layout.force(0, 0)], forces[0, 0] / 100.0)

    parts = layout.unpack(x)
    assert np.allclose(parts["r"], r)
    assert np.allclose(parts["feet"], feet)
    assert np.allclose(parts["forces"][1, 1], 0.0)
    assert np.allclose(parts["forces"][2, 1], forces[2, 1])


def test_scales():
    layout = _layout()
    scales = layout.scales()
    assert np.all(scales[layout.force(2, 1)] == 100.0)
    assert np.all(scales[layout.base(0, "r")] == 1.0)
