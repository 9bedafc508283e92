import numpy as np
import pytest
from scipy import stats

from imagedim.errors import ParameterError
from imagedim.fields import (FieldSpec, SamplePath, hfsm_values, image_measure, image_points,
                             rhflm_values, sample_paths, simulate, simulate_fbm, simulate_hfsm,
                             simulate_lfsm, simulate_rhflm, simulate_rosenblatt, vectorize)
from imagedim.geometry import PointCloud, point_mass, uniform_measure
from imagedim.sampling import Seed, default_window


def test_bm_covariance():
    X = sample_paths(FieldSpec("fbm", H=0.5, grid_n=256), 10_000, Seed(1))[:, :, 0]
    assert np.mean(X[:, -1] * X[:, 128]) == pytest.approx(0.5, abs=0.02)


def test_fbm_variance_scaling():
    X = sample_paths(FieldSpec("fbm", H=0.7, grid_n=256), 10_000, Seed(2))[:, :, 0]
    for t, k in [(0.25, 64), (0.5, 128), (1.0, 256)]:
        assert np.var(X[:, k]) == pytest.approx(t**1.4, rel=0.05)


@pytest.mark.parametrize("law,kw", [("fbm", {"H": 0.6}), ("lfsm", {"H": 0.8, "alpha": 1.5}),
                                    ("hfsm", {"H": 0.7, "alpha": 1.5, "lepage_K": 500}),
                                    ("rhflm", {"H": 0.6}), ("rosenblatt", {"kappa": 0.35})])
def test_paths_start_at_zero(law, kw):
    p = simulate(FieldSpec(law, grid_n=256, **kw), Seed(3))
    assert np.all(p.values[0] == 0.0)
    assert p.values.shape == (257, 1)


def test_lfsm_gaussian_limit():
    X = sample_paths(FieldSpec("lfsm", H=0.75, alpha=2.0, grid_n=256), 4000, Seed(4))[:, -1, 0]
    z = X / X.std()
    assert stats.kstest(z, "norm").pvalue > 0.01


def test_lfsm_rejects_unbounded_region():
    with pytest.raises(ParameterError, match="unbounded"):
        FieldSpec("lfsm", H=0.5, alpha=1.5)
    with pytest.raises(ParameterError):
        simulate_lfsm(1.5, 0.5, 256, Seed(0))


def test_hfsm_self_similar_quantile():
    H = 0.7
    vals = np.array([hfsm_values(1.5, H, [0.5, 1.0], Seed(s), K=1000)[0] for s in range(10_000)])
    q_half, q_one = np.quantile(np.abs(vals), 0.9, axis=0)
    assert q_half == pytest.approx(2**-H * q_one, rel=0.07)


def test_hfsm_modulus_shrinks_with_n():
    inc = []
    for n in (256, 1024, 4096):
        v, _ = hfsm_values(1.5, 0.7, np.arange(n + 1) / n, Seed(5), K=2000)
        inc.append(np.max(np.abs(np.diff(v))))
    assert inc[0] > inc[1] > inc[2]


def test_rhflm_kurtosis_stable():
    t = np.array([0.0, 1.0])
    win = default_window(256)
    ks = []
    for b in range(10):
        x = np.array([rhflm_values(0.6, t, Seed(1000 * b + i), win)[0][-1] for i in range(200)])
        ks.append(stats.kurtosis(x))
    assert np.all(np.isfinite(ks))
    assert np.ptp(ks) < 3.0


def test_rhflm_local_fbm_scaling():
    H = 0.6
    X = sample_paths(FieldSpec("rhflm", H=H, grid_n=256), 300, Seed(6))[:, :, 0]
    lags = np.array([1, 2, 4, 8, 16])
    v = [np.var(X[:, lag:] - X[:, :-lag]) for lag in lags]
    slope = np.polyfit(np.log(lags), np.log(v), 1)[0]
    assert slope == pytest.approx(2 * H, abs=0.1)


def test_rosenblatt_unit_variance_and_scaling():
    kappa = 0.35
    X = sample_paths(FieldSpec("rosenblatt", kappa=kappa, grid_n=256), 10_000, Seed(7))[:, :, 0]
    assert np.var(X[:, -1]) == pytest.approx(1.0, abs=0.03)
    ks = np.array([16, 32, 64, 128, 256])
    slope = np.polyfit(np.log(ks / 256), np.log(np.var(X[:, ks], axis=0)), 1)[0]
    assert slope == pytest.approx(4 * kappa, abs=0.05)


def test_rosenblatt_rejects_bad_kappa():
    with pytest.raises(ParameterError):
        simulate_rosenblatt(0.2, 256, Seed(0))


def test_simulate_is_deterministic():
    spec = FieldSpec("lfsm", H=0.8, alpha=1.5, d=2, grid_n=256)
    assert np.array_equal(simulate(spec, Seed(9)).values, simulate(spec, Seed(9)).values)


def test_vectorize_identity_and_shared_seed():
    p = simulate_fbm(0.5, 256, Seed(1))
    assert vectorize([p]) is p
    with pytest.raises(ParameterError, match="seed"):
        vectorize([p, simulate_fbm(0.5, 256, Seed(1))])


def test_vectorize_components_independent():
    X = sample_paths(FieldSpec("fbm", H=0.5, d=3, grid_n=256), 4000, Seed(8))[:, -1, :]
    c = np.corrcoef(X.T)
    assert np.all(np.abs(c[np.triu_indices(3, 1)]) < 3 / np.sqrt(4000))


def test_path_csv_roundtrip():
    p = simulate(FieldSpec("fbm", H=0.5, d=2, grid_n=256), Seed(3))
    back = SamplePath.from_csv(p.to_csv())
    assert np.array_equal(back.values, p.values) and back.spec == p.spec


def test_image_of_origin_and_size():
    p = simulate(FieldSpec("fbm", H=0.5, d=2, grid_n=256), Seed(3))
    img = image_points(p, PointCloud(np.array([[0.0]])))
    assert np.array_equal(img.points, [[0.0, 0.0]])
    E = PointCloud(np.linspace(0, 1, 17)[:, None])
    assert len(image_points(p, E)) == 17


def test_image_measure_pushforward():
    p = simulate(FieldSpec("fbm", H=0.5, d=2, grid_n=256), Seed(3))
    m = image_measure(p, point_mass([0.0], 3.0))
    assert np.array_equal(m.points, [[0.0, 0.0]]) and m.total_mass == 3.0
    mu = uniform_measure(np.arange(257)[:, None] / 256)
    assert image_measure(p, mu).total_mass == pytest.approx(1.0, abs=1e-12)


def test_image_rejects_off_grid_without_snap():
    p = simulate_fbm(0.5, 256, Seed(1))
    with pytest.raises(ParameterError):
        image_measure(p, point_mass([0.3001]))


@pytest.mark.parametrize("bad", [dict(law="bogus", H=0.5), dict(law="fbm", H=1.2),
                                 dict(law="fbm", H=0.5, grid_n=100), dict(law="hfsm", H=0.5)])
def test_field_spec_validation(bad):
    with pytest.raises(ParameterError):
        FieldSpec(**bad)


def test_rhflm_and_hfsm_simulators_record_truncation():
    h = simulate_hfsm(1.5, 0.7, 256, Seed(1), K=500)
    r = simulate_rhflm(0.6, 256, Seed(1))
    assert h.meta and r.meta


@pytest.mark.xfail(strict=True, reason="5% local-exponent quantile of the occupation measure sits near 0.87; "
                                      "see decisions ledger")
def test_occupation_measure_dimension():
    from imagedim.estimators import measure_local_dims
    n = 2**17
    path = simulate(FieldSpec("fbm", H=0.5, grid_n=n), Seed(12))
    mx = image_measure(path, uniform_measure(np.arange(n + 1)[:, None] / n))
    assert measure_local_dims(mx, seed=Seed(12)).lower == pytest.approx(1.0, abs=0.10)
