"""Packing dimension profiles of discrete measures and finite sets.

The profile of μ at level s is read off the potential
F_s(x, r) = ∫ min{1, (‖x − y‖/r)^(−s)} dμ(y): per probe x, the decay exponent of
F_s(x, r) as r → 0 is estimated from the lower envelope of the log-log curve.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .estimators import DimEstimate, _draw_probes, _quantile_se, default_radii, envelope_slope
from .geometry import DiscreteMeasure, PointCloud

__all__ = [
    "ProfileCurve",
    "kernel_psi",
    "potential_F",
    "potential_curves",
    "profile_measure",
    "profile_set",
    "profile_curve",
    "default_s_grid",
]


def kernel_psi(s: float, x) -> np.ndarray | float:
    """min{1, ‖x‖^(−s)}; ``x`` is a point (last axis = coordinates) or a scalar norm."""
    if s <= 0:
        raise ParameterError("s must be positive")
    x = np.asarray(x, dtype=float)
    norm = np.abs(x) if x.ndim == 0 else np.linalg.norm(x, axis=-1)
    with np.errstate(divide="ignore"):
        out = np.where(norm <= 1.0, 1.0, np.maximum(norm, 1.0) ** (-s))
    return float(out) if out.ndim == 0 else out


def potential_F(mu: DiscreteMeasure, s: float, x, r: float) -> float:
    """Σ_i m_i ψ_s((x − y_i)/r), summed directly."""
    if r <= 0:
        raise ParameterError("r must be positive")
    x = np.asarray(x, dtype=float).reshape(1, -1)
    dist = np.linalg.norm(mu.points - x, axis=1)
    psi = np.where(dist <= r, 1.0, (np.maximum(dist, r) / r) ** (-s))
    return math.fsum(mu.masses * psi)


def potential_curves(mu: DiscreteMeasure, x, s_values, radii) -> np.ndarray:
    """F_s(x, r) for all s (rows) and radii (columns) from one sort of distances.

    Uses F_s(x, r) = μ(B̄(x, r)) + r^s Σ_{‖x−y‖>r} m ‖x − y‖^(−s).
    """
    x = np.asarray(x, dtype=float).reshape(1, -1)
    dist = np.linalg.norm(mu.points - x, axis=1)
    order = np.argsort(dist)
    d, m = dist[order], mu.masses[order]
    radii = np.asarray(radii, dtype=float)
    k = np.searchsorted(d, radii * (1 + 1e-12), side="right")  # atoms inside the closed ball
    inside = np.concatenate([[0.0], np.cumsum(m)])[k]
    out = np.empty((len(s_values), len(radii)))
    with np.errstate(divide="ignore"):
        for i, s in enumerate(s_values):
            w = np.where(d > 0, m * d ** (-float(s)), 0.0)
            tail = np.concatenate([np.cumsum(w[::-1])[::-1], [0.0]])
            out[i] = inside + radii ** s * tail[k]
    return out


def default_s_grid(ambient_dim: int = 1, n: int = 32) -> np.ndarray:
    return np.geomspace(0.05, ambient_dim + 1, n)


def _exponents(mu, centers, s_values, radii):
    log_r = np.log(radii)
    expo = np.empty((len(centers), len(s_values)))
    flat = np.zeros_like(expo, dtype=bool)
    for p, c in enumerate(centers):
        F = potential_curves(mu, c, s_values, radii)
        for i in range(len(s_values)):
            logF = np.log(F[i])
            if np.ptp(logF) < 1e-12:
                expo[p, i], flat[p, i] = 0.0, True
            else:
                expo[p, i] = envelope_slope(log_r, logF, upper=False)[0]
    return expo, flat


def _setup(mu, radii, n_probe, seed):
    radii = default_radii(mu) if radii is None else np.sort(np.asarray(radii, dtype=float))
    if len(radii) < 4:
        raise ParameterError("need at least 4 radii")
    centers = mu.points[_draw_probes(mu, n_probe, seed)]
    return radii, centers


def _estimate(values, q, radii, diag, se_seed=0):
    value = float(np.quantile(values, q))
    return DimEstimate(max(value, 0.0), _quantile_se(values, q, se_seed),
                       (float(radii.min()), float(radii.max())), len(radii), diag)


def profile_measure(mu: DiscreteMeasure, s: float, radii=None, n_probe: int = 200, seed=0,
                    quantiles: tuple = (0.05, 0.95)) -> tuple[DimEstimate, DimEstimate]:
    """(Dim_s μ, Dim*_s μ) as low and high quantiles of per-probe exponents."""
    if s <= 0:
        raise ParameterError("s must be positive")
    radii, centers = _setup(mu, radii, n_probe, seed)
    expo, flat = _exponents(mu, centers, [s], radii)
    diag = {"s": s, "n_probe": n_probe, "degenerate_probes": int(flat.sum()),
            "quantile_levels": list(quantiles), "depth": mu.meta.get("depth")}
    return (_estimate(expo[:, 0], quantiles[0], radii, {**diag, "kind": "measure-lower"}),
            _estimate(expo[:, 0], quantiles[1], radii, {**diag, "kind": "measure-upper"}))


def _set_label(cloud: PointCloud, mu: DiscreteMeasure) -> str:
    meta = {**cloud.meta, **mu.meta}
    if meta.get("natural_measure_exact", False):
        return "natural measure"
    return "profile lower bound"


def profile_set(cloud: PointCloud, mu: DiscreteMeasure, s: float, radii=None, n_probe: int = 200,
                seed=0) -> DimEstimate:
    """Dim_s E from the natural measure; a lower bound unless E is homogeneous."""
    lower, _ = profile_measure(mu, s, radii, n_probe, seed)
    return DimEstimate(lower.value, lower.std_error, lower.window, lower.n_scales,
                       {**lower.diagnostics, "kind": "set", "label": _set_label(cloud, mu)})


@dataclass(frozen=True)
class ProfileCurve:
    s_grid: np.ndarray
    values: np.ndarray
    std_errors: np.ndarray
    kind: str
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.any(np.diff(self.s_grid) <= 0) or np.any(self.s_grid <= 0):
            raise ParameterError("s_grid must be positive and strictly increasing")
        if self.kind not in ("measure-lower", "measure-upper", "set"):
            raise ParameterError(f"unknown profile kind {self.kind!r}")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["s", "value", "std_error"])
        for row in zip(self.s_grid, self.values, self.std_errors):
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


def profile_curve(target, s_grid=None, radii=None, n_probe: int = 200, seed=0,
                  kind: str = "set") -> ProfileCurve:
    """Profile estimates on ``s_grid`` with probes and radii shared across s.

    ``target`` is a DiscreteMeasure or a (PointCloud, DiscreteMeasure) pair.
    """
    if isinstance(target, tuple):
        cloud, mu = target
    else:
        cloud, mu = None, target
    N = mu.support.ambient_dim
    s_grid = default_s_grid(N) if s_grid is None else np.asarray(s_grid, dtype=float)
    radii, centers = _setup(mu, radii, n_probe, seed)
    expo, flat = _exponents(mu, centers, s_grid, radii)
    q = 0.95 if kind == "measure-upper" else 0.05
    values = np.maximum(np.quantile(expo, q, axis=0), 0.0)
    ses = np.array([_quantile_se(expo[:, i], q) for i in range(len(s_grid))])
    diag = {"n_probe": n_probe, "radii": [float(radii.min()), float(radii.max())],
            "degenerate_probes": int(flat.sum()), "quantile_level": q}
    if cloud is not None:
        diag["label"] = _set_label(cloud, mu)
    return ProfileCurve(s_grid, values, ses, kind, diag)
