"""Box-counting and local-scaling dimension estimators for clouds and measures."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import ParameterError
from .geometry import DiscreteMeasure, PointCloud
from .sampling import _as_seed

__all__ = [
    "DimEstimate",
    "LocalExponentField",
    "box_counts",
    "dyadic_scales",
    "default_box_window",
    "box_dimension",
    "lower_upper_box",
    "measure_local_dims",
    "hausdorff_dim_cloud",
    "ball_masses",
    "default_radii",
    "envelope_slope",
    "ls_slope",
]


@dataclass(frozen=True)
class DimEstimate:
    value: float
    std_error: float
    window: tuple  # (scale_min, scale_max)
    n_scales: int
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.window[0] < self.window[1]:
            raise ParameterError("window must satisfy scale_min < scale_max")
        if self.n_scales < 4:
            raise ParameterError("an estimate needs at least 4 scales")

    def as_dict(self) -> dict:
        d = asdict(self)
        d["window"] = list(self.window)
        return d

    def to_json(self, **extra) -> str:
        return json.dumps({**self.as_dict(), **extra}, sort_keys=True, default=float)


def ls_slope(x, y) -> tuple[float, float, float, float]:
    """Least-squares slope, its standard error, intercept and residual RMS."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    n = len(x)
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = float(ym - slope * xm)
    resid = y - (intercept + slope * x)
    rss = float(np.sum(resid**2))
    se = math.sqrt(rss / (n - 2) / sxx) if n > 2 else float("nan")
    return slope, se, intercept, math.sqrt(rss / n)


# --------------------------------------------------------------------------
# box counting


def dyadic_scales(k_lo: int, k_hi: int) -> np.ndarray:
    return 2.0 ** -np.arange(k_lo, k_hi + 1)


def _count_cells(points: np.ndarray, eps: float) -> int:
    idx = np.floor(points / eps + 1e-9).astype(np.int64)
    if idx.shape[1] == 1:
        return int(np.unique(idx[:, 0]).size)
    idx -= idx.min(axis=0)
    span = idx.max(axis=0) + 1
    if np.prod(span.astype(float)) < 2**62:
        key = np.ravel_multi_index(idx.T, span)
        return int(np.unique(key).size)
    return int(np.unique(idx, axis=0).shape[0])


def box_counts(cloud: PointCloud, scales) -> np.ndarray:
    """Number of cells of the mesh εZ^n that meet the cloud, for each ε.

    Cells are half-open [kε, (k+1)ε); a point within 1e-9 cell widths below a
    boundary is counted in the cell that starts there.
    """
    if len(cloud) == 0:
        raise ParameterError("cannot box-count an empty cloud")
    scales = np.asarray(scales, dtype=float)
    if scales.size < 2:
        raise ParameterError("need at least two scales")
    if np.any(scales <= 0):
        raise ParameterError("scales must be positive")
    pts = cloud.points
    return np.array([_count_cells(pts, e) for e in scales], dtype=np.int64)


def _diameter(points: np.ndarray) -> float:
    return float(np.linalg.norm(points.max(axis=0) - points.min(axis=0)))


def default_box_window(cloud: PointCloud, coarse_drop: int | None = None, fine_drop: int = 2,
                       saturation: float = 0.25, k_max: int = 40) -> tuple[np.ndarray, dict]:
    """Dyadic scales between the diameter and the resolution floor.

    The floor is the construction's cell side when the cloud records one, else
    the first scale at which the count reaches ``saturation`` times the number
    of distinct points. The ``fine_drop`` finest octaves above the
    floor and the ``coarse_drop`` octaves just below the diameter are dropped.
    By default one coarse octave goes for explicit constructions (their top
    scale is the unit cell) and four for everything else, where the global shape
    of the cloud bends the count curve over the first few octaves.
    """
    if coarse_drop is None:
        coarse_drop = 1 if "construction" in cloud.meta else 4
    pts = cloud.points
    diam = _diameter(pts)
    if diam == 0:
        return dyadic_scales(0, 5), {"diameter": 0.0, "floor_k": None, "degenerate": True}
    n_distinct = _count_cells(pts, 1e-12 * diam)
    k_top = math.floor(math.log2(1 / diam))
    side = cloud.meta.get("cell_side")
    if side:
        # explicit constructions resolve down to their last cell
        k_floor = math.floor(math.log2(1 / side))
    else:
        k_floor = k_top
        while k_floor < k_max:
            k_floor += 1
            if _count_cells(pts, 2.0**-k_floor) >= saturation * n_distinct:
                break
    k_lo, k_hi = k_top + coarse_drop, k_floor - fine_drop
    info = {"diameter": diam, "floor_k": k_floor, "coarse_k": k_top, "n_distinct": n_distinct,
            "coarse_drop": coarse_drop, "fine_drop": fine_drop}
    if k_hi - k_lo + 1 < 4:
        info["window_insufficient"] = True
        k_hi = max(k_hi, k_top + 4)
        k_lo = min(k_lo, k_hi - 3)
    return dyadic_scales(k_lo, k_hi), info


def _resolve_window(cloud, window):
    if window is None:
        return default_box_window(cloud)
    scales = np.asarray(window, dtype=float)
    if scales.size == 2 and scales[0] < scales[1]:
        # (scale_min, scale_max): all dyadic scales inside
        lo = math.ceil(math.log2(1 / scales[1]) - 1e-9)
        hi = math.floor(math.log2(1 / scales[0]) + 1e-9)
        scales = dyadic_scales(lo, hi)
    return np.sort(scales)[::-1], {}


def box_dimension(cloud: PointCloud, window=None, depth: int | None = None) -> DimEstimate:
    """Least-squares slope of log N(ε) against log(1/ε) over the window."""
    scales, info = _resolve_window(cloud, window)
    if scales.size < 4:
        raise ParameterError("window must contain at least 4 scales")
    counts = box_counts(cloud, scales)
    x, y = np.log(1 / scales), np.log(counts)
    slope, se, intercept, rms = ls_slope(x, y)
    diag = {**info, "residual_rms": rms, "log_inv_eps": x.tolist(), "log_counts": y.tolist(),
            "depth": depth if depth is not None else cloud.meta.get("depth")}
    floor = info.get("floor_k")
    if floor is not None and -math.log2(scales.min()) >= floor - 1:
        diag["warning"] = "window touches the resolution floor"
    if counts.max() == 1:
        slope, se = 0.0, 0.0
    return DimEstimate(max(slope, 0.0), se, (float(scales.min()), float(scales.max())), int(scales.size), diag)


def lower_upper_box(cloud: PointCloud, window=None, width: int = 4) -> tuple[DimEstimate, DimEstimate]:
    """Lower and upper box exponents from sliding local slopes.

    Local slopes are least-squares fits over ``width`` consecutive scales; the
    lower (upper) estimate is the minimum (maximum) over the window, i.e. the
    lower (upper) envelope of the local-slope curve.
    """
    scales, info = _resolve_window(cloud, window)
    if scales.size < 4:
        raise ParameterError("window must contain at least 4 scales")
    width = max(4, min(width, scales.size))
    counts = box_counts(cloud, scales)
    x, y = np.log(1 / scales), np.log(counts)
    fits = []
    for i in range(scales.size - width + 1):
        s, se, _, _ = ls_slope(x[i:i + width], y[i:i + width])
        fits.append((s, se, i))
    slopes = np.array([f[0] for f in fits])
    i_lo, i_hi = int(np.argmin(slopes)), int(np.argmax(slopes))

    def est(k, tag):
        s, se, i = fits[k]
        sub = scales[i:i + width]
        diag = {**info, "envelope": tag, "local_slopes": slopes.tolist(), "sub_width": width,
                "depth": cloud.meta.get("depth")}
        if cloud.meta.get("window_sufficient") is False:
            diag["warning"] = "window insufficient"
        return DimEstimate(max(s, 0.0), se, (float(sub.min()), float(sub.max())), width, diag)

    return est(i_lo, "lower"), est(i_hi, "upper")


# --------------------------------------------------------------------------
# local dimensions of measures


def _nn_spacing(points: np.ndarray) -> float:
    if len(points) < 2:
        return 0.0
    tree = cKDTree(points)
    sample = points[:: max(1, len(points) // 2000)]
    d, _ = tree.query(sample, k=2)
    pos = d[:, 1][d[:, 1] > 0]
    return float(np.median(pos)) if pos.size else 0.0


def default_radii(mu: DiscreteMeasure, min_octaves: int = 3) -> np.ndarray:
    """Dyadic radii from diam/64 (or up to diam/4 if needed) down to 4x the atom spacing."""
    pts = mu.points
    diam = _diameter(pts)
    if diam == 0:
        return dyadic_scales(1, 6)
    k_lo = math.ceil(math.log2(4 / diam))
    spacing = _nn_spacing(pts)
    k_hi = math.floor(math.log2(1 / (4 * spacing))) if spacing > 0 else k_lo + 8
    # keep probes near the edge of the support out of the coarse radii when there is room
    k_lo = max(k_lo, min(math.ceil(math.log2(64 / diam)), k_hi - 4))
    if k_hi - k_lo < min_octaves:
        raise ParameterError("radii would span fewer than 3 octaves above the resolution floor")
    return dyadic_scales(k_lo, k_hi)


def ball_masses(mu: DiscreteMeasure, centers: np.ndarray, radii) -> np.ndarray:
    """μ(B̄(x, r)) for every center (rows) and radius (columns)."""
    pts = mu.points
    radii = np.asarray(radii, dtype=float)
    centers = np.atleast_2d(centers)
    m = mu.masses
    out = np.empty((len(centers), len(radii)))
    uniform = np.all(m == m[0])
    if uniform:
        tree = cKDTree(pts)
        for j, r in enumerate(radii):
            out[:, j] = tree.query_ball_point(centers, r * (1 + 1e-12), return_length=True) * m[0]
        return out
    for i, c in enumerate(centers):
        dist = np.sqrt(np.sum((pts - c) ** 2, axis=1))
        order = np.argsort(dist)
        cm = np.cumsum(m[order])
        k = np.searchsorted(dist[order], radii * (1 + 1e-12), side="right")
        out[i] = np.where(k > 0, cm[np.maximum(k - 1, 0)], 0.0)
    return out


def _hull_values(x: np.ndarray, y: np.ndarray, upper: bool) -> np.ndarray:
    """Concave majorant (upper=True) or convex minorant of points sorted by x."""
    sign = 1.0 if upper else -1.0
    hull: list[int] = []
    for i in range(len(x)):
        while len(hull) >= 2:
            i0, i1 = hull[-2], hull[-1]
            cross = (x[i1] - x[i0]) * (y[i] - y[i0]) - (y[i1] - y[i0]) * (x[i] - x[i0])
            if sign * cross >= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    return np.interp(x, x[hull], y[hull])


def envelope_slope(log_r: np.ndarray, log_v: np.ndarray, upper: bool) -> tuple[float, float]:
    """Least-squares slope of the upper (or lower) envelope of a log-log curve."""
    order = np.argsort(log_r)
    x, y = log_r[order], log_v[order]
    env = _hull_values(x, y, upper)
    slope, se, _, _ = ls_slope(x, env)
    return slope, se


@dataclass(frozen=True)
class LocalExponentField:
    points: np.ndarray
    exponents: np.ndarray
    radii: np.ndarray
    quantile_levels: tuple = (0.05, 0.5, 0.95)
    diagnostics: dict = field(default_factory=dict)

    @property
    def quantiles(self) -> np.ndarray:
        return np.quantile(self.exponents, self.quantile_levels)

    @property
    def lower(self) -> float:
        return float(self.quantiles[0])

    @property
    def upper(self) -> float:
        return float(self.quantiles[-1])


def _draw_probes(mu: DiscreteMeasure, n_probe: int, seed) -> np.ndarray:
    rng = _as_seed(seed).rng()
    p = mu.masses / mu.masses.sum()
    return rng.choice(len(p), size=n_probe, replace=True, p=p)


def measure_local_dims(mu: DiscreteMeasure, radii=None, n_probe: int = 200, seed=0,
                       quantiles: tuple = (0.05, 0.95)) -> LocalExponentField:
    """Per-probe local exponents of r ↦ μ(B(x, r)).

    Each exponent is the slope of the upper envelope of log μ(B(x_i, r)) against
    log r. The lower (upper) quantile stands in for the μ-essential infimum
    (supremum), i.e. dim_H μ (dim*_H μ).
    """
    radii = default_radii(mu) if radii is None else np.sort(np.asarray(radii, dtype=float))
    if len(radii) < 4:
        raise ParameterError("need at least 4 radii")
    idx = _draw_probes(mu, n_probe, seed)
    centers = mu.points[idx]
    masses = ball_masses(mu, centers, radii)
    keep = masses[:, 0] > 0
    log_r = np.log(radii)
    expo = np.array([envelope_slope(log_r, np.log(row), upper=True)[0] for row in masses[keep]])
    levels = (quantiles[0], 0.5, quantiles[1])
    diag = {"discarded_probes": int((~keep).sum()), "n_probe": n_probe, "quantile_levels": list(levels),
            "radii": [float(radii.min()), float(radii.max())], "octaves": float(np.log2(radii.max() / radii.min())),
            "depth": mu.meta.get("depth")}
    return LocalExponentField(centers[keep], expo, radii, levels, diag)


def _quantile_se(values: np.ndarray, q: float, seed: int = 0, n_boot: int = 200) -> float:
    rng = np.random.default_rng(seed)
    boots = [np.quantile(rng.choice(values, values.size), q) for _ in range(n_boot)]
    return float(np.std(boots))


def hausdorff_dim_cloud(cloud: PointCloud, mu: DiscreteMeasure, radii=None, n_probe: int = 200,
                        seed=0) -> DimEstimate:
    """Lower local-dimension quantile of the natural measure, as a set estimate."""
    if len(cloud) != len(mu.support):
        raise ParameterError("measure must live on the cloud")
    field_ = measure_local_dims(mu, radii, n_probe, seed)
    q = field_.quantile_levels[0]
    value = max(field_.lower, 0.0)
    diag = {**field_.diagnostics, "upper_quantile": field_.upper, "median": float(field_.quantiles[1]),
            "sup_over_measures": "natural measure only"}
    return DimEstimate(value, _quantile_se(field_.exponents, q), (float(field_.radii.min()), float(field_.radii.max())),
                       len(field_.radii), diag)
