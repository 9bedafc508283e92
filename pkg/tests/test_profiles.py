import math

import numpy as np
import pytest
from scipy import integrate

from imagedim.errors import ParameterError
from imagedim.geometry import CantorSpec, PointCloud, cantor_set, point_mass, uniform_measure
from imagedim.profiles import (ProfileCurve, kernel_psi, potential_F, potential_curves, profile_curve,
                               profile_measure, profile_set)
from imagedim.sampling import Seed

LOG23 = math.log(2) / math.log(3)


def _interval(n=4096):
    return uniform_measure(PointCloud(np.arange(n)[:, None] / n, meta={"natural_measure_exact": True}))


def test_kernel_values():
    assert kernel_psi(1.0, 2.0) == 0.5
    assert kernel_psi(0.5, np.array([4.0, 0.0])) == 0.5
    assert kernel_psi(3.0, np.array([0.3, 0.4])) == 1.0
    with pytest.raises(ParameterError):
        kernel_psi(0.0, 1.0)


def test_potential_point_mass():
    mu = point_mass([0.3], 2.0)
    assert potential_F(mu, 1.5, [0.3], 0.01) == 2.0
    assert potential_F(mu, 1.0, [0.5], 0.1) == pytest.approx(1.0)


def test_potential_matches_quadrature():
    mu = _interval()
    r = 2.0**-6
    f = lambda y: min(1.0, (abs(0.5 - y) / r) ** -2)
    exact = integrate.quad(f, 0, 1, points=[0.5 - r, 0.5, 0.5 + r], limit=200)[0]
    assert potential_F(mu, 2.0, [0.5], r) == pytest.approx(exact, rel=0.01)


def test_curves_match_direct_sum():
    _, mu = cantor_set(CantorSpec.homogeneous(2, 1 / 3, 8))
    radii = 2.0 ** -np.arange(2, 7)
    F = potential_curves(mu, [0.4], [0.5, 2.0], radii)
    for i, s in enumerate([0.5, 2.0]):
        for j, r in enumerate(radii):
            assert F[i, j] == pytest.approx(potential_F(mu, s, [0.4], r), rel=1e-10)


def test_profile_point_mass_is_zero():
    lo, hi = profile_measure(point_mass([0.0]), 1.0, radii=2.0 ** -np.arange(2, 8))
    assert lo.value == 0.0 and hi.value == 0.0


def test_profile_uniform_below_one():
    for s in (0.25, 0.5):
        lo, hi = profile_measure(_interval(), s, n_probe=100, seed=Seed(1))
        assert lo.value == pytest.approx(s, abs=0.08)
        assert lo.value <= hi.value


def test_profile_cantor_plateau_and_small_s():
    E, mu = cantor_set(CantorSpec.homogeneous(2, 1 / 3, 12))
    assert profile_set(E, mu, 2.0, seed=Seed(2)).value == pytest.approx(LOG23, abs=0.08)
    assert profile_set(E, mu, 0.3, seed=Seed(2)).value == pytest.approx(0.3, abs=0.05)


def test_profile_set_label():
    E, mu = cantor_set(CantorSpec.homogeneous(2, 1 / 3, 8))
    assert profile_set(E, mu, 1.0, n_probe=20).diagnostics["label"] == "natural measure"


def test_curve_bound_and_csv():
    c = profile_curve(_interval(1024), np.geomspace(0.05, 2, 8), n_probe=50, seed=Seed(3))
    assert np.all(c.values <= c.s_grid + 0.05)
    lines = c.to_csv().strip().splitlines()
    assert lines[0] == "s,value,std_error" and len(lines) == 9


def test_curve_rejects_unsorted_grid():
    with pytest.raises(ParameterError):
        ProfileCurve(np.array([1.0, 0.5]), np.zeros(2), np.zeros(2), "set")


@pytest.mark.xfail(strict=True, reason="r log(1/r) correction at s = 1 pulls the estimate to ~0.8; see decisions ledger")
def test_profile_uniform_at_one():
    lo, _ = profile_measure(_interval(), 1.0, n_probe=200, seed=Seed(1))
    assert lo.value == pytest.approx(1.0, abs=0.08)
