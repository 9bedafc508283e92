import math

import numpy as np
import pytest

from imagedim.errors import ParameterError
from imagedim.geometry import (CantorSpec, DiscreteMeasure, PointCloud, ball_mass, cantor_set,
                               make_dyadic_grid, phase_schedule, point_mass, two_phase_cantor,
                               uniform_measure)
from imagedim.estimators import lower_upper_box


def test_dyadic_grid_level_one():
    g = make_dyadic_grid(1, 1)
    assert g.cells() == [[(0.0, 0.5)], [(0.5, 1.0)]]


def test_dyadic_grid_counts():
    assert make_dyadic_grid(3, 1).n_cells == 8
    assert make_dyadic_grid(3, 1).width == 1 / 8
    assert make_dyadic_grid(2, 2).n_cells == 16
    assert len(make_dyadic_grid(2, 2).cell_corners()) == 16


def test_dyadic_grid_rejects_bad_level():
    with pytest.raises(ParameterError):
        make_dyadic_grid(0, 1)


def test_cantor_two_thirds():
    E, mu = cantor_set(CantorSpec.homogeneous(2, 1 / 3, 10))
    assert len(E) == 1024
    assert E.meta["dim_H"] == pytest.approx(math.log(2) / math.log(3), abs=1e-5)
    assert mu.total_mass == pytest.approx(1.0)


def test_cantor_half_is_dyadic_grid():
    E, _ = cantor_set(CantorSpec.homogeneous(2, 0.5, 8))
    assert np.allclose(np.sort(E.points[:, 0]), np.arange(256) / 256)
    assert E.meta["dim_H"] == pytest.approx(1.0)


def test_cantor_three_fifths():
    E, _ = cantor_set(CantorSpec.homogeneous(3, 1 / 5, 8))
    assert E.meta["dim_H"] == pytest.approx(math.log(3) / math.log(5), abs=1e-5)


def test_cantor_rejects_overlap():
    with pytest.raises(ValueError):
        CantorSpec.homogeneous(3, 0.5, 4)


def test_phase_schedule_blocks_grow():
    s = phase_schedule(13, 3, first="A")
    assert s[0] == "A" and len(s) == 13
    assert s[:4] == ["A", "B", "B", "B"]


def test_two_phase_metadata():
    a = CantorSpec.homogeneous(2, 1 / 3, 1)
    b = CantorSpec.homogeneous(2, 0.5, 1)
    E, mu = two_phase_cantor(a, b, 3, depth=18)
    assert E.meta["dim_H"] == pytest.approx(math.log(2) / math.log(3), abs=1e-4)
    assert E.meta["dim_P"] == pytest.approx(1.0, abs=1e-9)
    assert mu.total_mass == pytest.approx(1.0)


def test_two_phase_envelopes_match_metadata():
    a = CantorSpec.homogeneous(2, 1 / 3, 1)
    b = CantorSpec.homogeneous(2, 0.5, 1)
    E, _ = two_phase_cantor(a, b, 3, depth=18, first="B")
    lo, hi = lower_upper_box(E)
    assert hi.value == pytest.approx(1.0, abs=0.08)
    assert lo.value < hi.value - 0.2


def test_two_phase_equal_specs_is_plain_cantor():
    a = CantorSpec.homogeneous(2, 1 / 3, 1)
    E, _ = two_phase_cantor(a, a, 3, depth=10)
    F, _ = cantor_set(CantorSpec.homogeneous(2, 1 / 3, 10))
    assert np.allclose(np.sort(E.points[:, 0]), np.sort(F.points[:, 0]))
    assert E.meta["dim_H"] == pytest.approx(E.meta["dim_P"])


def test_two_phase_shallow_flags_window():
    a = CantorSpec.homogeneous(2, 1 / 3, 1)
    b = CantorSpec.homogeneous(2, 0.5, 1)
    E, _ = two_phase_cantor(a, b, 3, depth=4)
    assert E.meta["window_sufficient"] is False
    lo, _ = lower_upper_box(E)
    assert "window insufficient" in str(lo.diagnostics)


def test_ball_mass_point():
    mu = point_mass([0.0], 2.5)
    assert ball_mass(mu, [0.0], 0.1) == 2.5
    assert ball_mass(mu, [0.2], 0.1) == 0.0


def test_ball_mass_uniform_grid():
    mu = uniform_measure(np.arange(1024)[:, None] / 1024)
    exact = np.sum(np.abs(np.arange(1024) / 1024 - 0.5) <= 0.25) / 1024
    assert ball_mass(mu, [0.5], 0.25) == pytest.approx(exact)
    assert exact == pytest.approx(0.5, abs=0.01)


def test_ball_mass_rejects_bad_radius():
    with pytest.raises(ParameterError):
        ball_mass(point_mass([0.0]), [0.0], 0.0)


def test_cloud_roundtrip():
    c = PointCloud(np.array([[0.1, 0.2], [0.3, 0.4]]), meta={"a": 1})
    back = PointCloud.from_json(c.to_json())
    assert np.array_equal(back.points, c.points) and back.meta == {"a": 1}
    assert np.array_equal(PointCloud.from_csv(c.to_csv()).points, c.points)


def test_measure_roundtrip_and_pushforward():
    mu = uniform_measure(np.linspace(0, 1, 5)[:, None])
    back = DiscreteMeasure.from_json(mu.to_json())
    assert np.allclose(back.masses, mu.masses)
    moved = mu.pushforward(np.zeros((5, 2)))
    assert moved.total_mass == pytest.approx(1.0)


def test_measure_rejects_negative_mass():
    with pytest.raises(ParameterError):
        DiscreteMeasure(PointCloud(np.zeros((2, 1))), np.array([1.0, -1.0]))
