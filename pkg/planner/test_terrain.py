"""
Tests for height fields and the terrain contact frame
"""

import numpy as np
import pytest

from planner.errors import ConfigError
from planner.terrain import FlatGround, HeightSamples, Pallet, TerrainModel


def test_flat_ground():
    terrain = TerrainModel(FlatGround())
    assert terrain.height(0.3, -1.0) == 0.0
    assert np.allclose(terrain.normal(0.3, -1.0), [0.0, 0.0, 1.0])


def test_pallet_sharp_edge():
    pallet = Pallet(height_m=0.10, edge_x=0.5)
    assert float(pallet.height(0.4999, 0.0, sharp=True)) == 0.0
    assert float(pallet.height(0.5, 0.0, sharp=True)) == pytest.approx(0.10)
    assert float(pallet.height(3.0, 0.0, sharp=True)) == pytest.approx(0.10)


def test_pallet_ramp_sits_below_the_edge():
    pallet = Pallet(height_m=0.10, edge_x=0.5, ramp=0.01)
    assert float(pallet.height(0.49, 0.0)) == pytest.approx(0.0)
    assert float(pallet.height(0.495, 0.0)) == pytest.approx(0.05)
    assert float(pallet.height(0.5, 0.0)) == pytest.approx(0.10)


def test_smoothed_pallet_never_below_sharp():
    pallet = Pallet(height_m=0.15, edge_x=0.5, length=0.4, ramp=0.02)
    xs = np.linspace(0.0, 1.5, 3001)
    assert np.all(pallet.height(xs, 0.0) >= pallet.height(xs, 0.0, sharp=True) - 1e-12)


def test_pallet_gradient_matches_finite_differences():
    pallet = Pallet(height_m=0.10, edge_x=0.5, length=0.6, ramp=0.01)
    step = 1e-7
    for x in (0.3, 0.492, 0.4975, 0.8, 1.103, 1.107):
        numeric = (pallet.height(x + step, 0.0) - pallet.height(x - step, 0.0)) / (2 * step)
        assert pallet.gradient(x, 0.0)[0] == pytest.approx(float(numeric), abs=1e-5)


def test_pallet_rejects_negative_height():
    with pytest.raises(ConfigError):
        Pallet(height_m=-0.1, edge_x=0.5)


def test_sharp_terrain_view():
    terrain = TerrainModel(Pallet(height_m=0.10, edge_x=0.5))
    assert terrain.height(0.495, 0.0) == pytest.approx(0.05)
    assert terrain.as_sharp().height(0.495, 0.0) == 0.0


def test_frame_is_orthonormal_on_a_slope():
    xs = np.linspace(-1.0, 1.0, 21)
    ys = np.linspace(-1.0, 1.0, 21)
    heights = 0.3 * xs[:, None] + 0.1 * ys[None, :]
    terrain = TerrainModel(HeightSamples(xs, ys, heights))
    s, t1, t2 = terrain.frame(0.05, 0.05)
    for v in (s, t1, t2):
        assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(np.cross(t1, t2), s, atol=1e-12)
    assert abs(s @ t1) < 1e-12
    assert np.allclose(s, np.array([-0.3, -0.1, 1.0]) / np.linalg.norm([-0.3, -0.1, 1.0]), atol=1e-6)


def test_height_samples_interpolate_bilinearly():
    samples = HeightSamples([0.0, 1.0], [0.0, 1.0], [[0.0, 0.2], [0.4, 0.6]])
    assert samples.height(0.5, 0.5) == pytest.approx(0.3)
    assert samples.height(0.0, 1.0) == pytest.approx(0.2)


def test_height_samples_shape_checked():
    with pytest.raises(ConfigError):
        HeightSamples([0.0, 1.0], [0.0, 1.0, 2.0], [[0.0, 0.0], [0.0, 0.0]])


def test_terrain_parameters_validated():
    with pytest.raises(ConfigError):
        TerrainModel(FlatGround(), friction=0.0)
    with pytest.raises(ConfigError):
        TerrainModel(FlatGround(), force_cap=-1.0)
