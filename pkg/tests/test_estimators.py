import math

import numpy as np
import pytest

from imagedim.errors import ParameterError
from imagedim.estimators import (DimEstimate, box_counts, box_dimension, hausdorff_dim_cloud,
                                 lower_upper_box, ls_slope, measure_local_dims)
from imagedim.fields import FieldSpec, image_points, simulate
from imagedim.geometry import CantorSpec, PointCloud, cantor_set, point_mass, uniform_measure
from imagedim.sampling import Seed

LOG23 = math.log(2) / math.log(3)


def _interval(n=4096):
    return uniform_measure(PointCloud(np.arange(n)[:, None] / n, meta={"cell_side": 1 / n}))


def test_ls_slope_exact_line():
    slope, se, _, _ = ls_slope(np.arange(5.0), 2 * np.arange(5.0) + 1)
    assert slope == pytest.approx(2.0) and se == pytest.approx(0.0, abs=1e-12)


def test_counts_unit_grid():
    cloud = PointCloud(np.arange(1024)[:, None] / 1024)
    eps = 2.0 ** -np.arange(1, 9)
    assert np.array_equal(box_counts(cloud, eps), 2 ** np.arange(1, 9))


def test_counts_single_point():
    assert np.all(box_counts(PointCloud(np.array([[0.3, 0.7]])), 2.0 ** -np.arange(1, 8)) == 1)


def test_counts_cantor_triadic():
    E, _ = cantor_set(CantorSpec.homogeneous(2, 1 / 3, 12))
    eps = 3.0 ** -np.arange(1, 10)
    assert np.array_equal(box_counts(E, eps), 2 ** np.arange(1, 10))


def test_box_full_square():
    pts = np.random.default_rng(0).uniform(size=(2**16, 2))
    assert box_dimension(PointCloud(pts)).value == pytest.approx(2.0, abs=0.05)


def test_box_cantor():
    E, _ = cantor_set(CantorSpec.homogeneous(2, 1 / 3, 12))
    assert box_dimension(E).value == pytest.approx(LOG23, abs=0.03)


def test_box_single_point_is_zero():
    assert box_dimension(PointCloud(np.array([[0.5]]))).value == 0.0


def test_box_estimate_carries_window():
    est = box_dimension(PointCloud(np.arange(4096)[:, None] / 4096))
    assert est.window[0] < est.window[1] and est.n_scales >= 4
    assert est.value == pytest.approx(1.0, abs=0.01)


def test_dimestimate_contract():
    with pytest.raises(ParameterError):
        DimEstimate(1.0, 0.1, (0.5, 0.1), 5)
    with pytest.raises(ParameterError):
        DimEstimate(1.0, 0.1, (0.1, 0.5), 3)


def test_lower_upper_cantor_close():
    E, _ = cantor_set(CantorSpec.homogeneous(2, 1 / 3, 12))
    lo, hi = lower_upper_box(E)
    assert lo.value <= hi.value
    assert lo.value == pytest.approx(LOG23, abs=0.1) and hi.value == pytest.approx(LOG23, abs=0.15)


def test_lower_upper_interval():
    lo, hi = lower_upper_box(PointCloud(np.arange(4096)[:, None] / 4096))
    assert lo.value == pytest.approx(1.0, abs=0.02) and hi.value == pytest.approx(1.0, abs=0.02)


def test_local_dims_point_mass():
    f = measure_local_dims(point_mass([0.2]), radii=2.0 ** -np.arange(2, 8))
    assert f.lower == 0.0 and f.upper == 0.0


def test_local_dims_uniform():
    f = measure_local_dims(_interval(), n_probe=200, seed=Seed(1))
    assert f.lower == pytest.approx(1.0, abs=0.08) and f.upper == pytest.approx(1.0, abs=0.08)


def test_local_dims_cantor():
    _, mu = cantor_set(CantorSpec.homogeneous(2, 1 / 3, 12))
    f = measure_local_dims(mu, n_probe=200, seed=Seed(2))
    assert f.lower == pytest.approx(LOG23, abs=0.08) and f.upper == pytest.approx(LOG23, abs=0.08)


def test_local_dims_need_four_radii():
    with pytest.raises(ParameterError):
        measure_local_dims(_interval(), radii=[0.1, 0.05, 0.02])


def test_hausdorff_interval_and_cantor():
    mu = _interval()
    assert hausdorff_dim_cloud(mu.support, mu, seed=Seed(3)).value == pytest.approx(1.0, abs=0.08)
    E, nu = cantor_set(CantorSpec.homogeneous(2, 1 / 3, 12))
    assert hausdorff_dim_cloud(E, nu, seed=Seed(3)).value == pytest.approx(LOG23, abs=0.08)


def test_fbm_image_box_unsaturated():
    # H = 0.8 keeps the plane unsaturated, so finite-scale bias is mild
    path = simulate(FieldSpec("fbm", H=0.8, d=2, grid_n=2**16), Seed(4))
    img = image_points(path, PointCloud(np.arange(2**16 + 1)[:, None] / 2**16))
    assert box_dimension(img).value == pytest.approx(1.25, abs=0.15)
