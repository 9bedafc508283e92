"""Monte Carlo probes of the maximal-tail condition (C1) and small-ball condition (C2).

Verdicts are one-sided: a probe can refute a bound but only ever supports it.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ParameterError
from .fields import FieldSpec, sample_paths
from .sampling import _as_seed

__all__ = [
    "ProbeReport",
    "probe_c1",
    "probe_c2",
    "fourier_c2_criterion",
    "phi_kernel",
    "phi_hat",
    "sup_increments",
    "tail_slope",
    "H0",
    "U0",
    "MIN_EXCEEDANCES",
    "MIN_LAG_STEPS",
]

H0 = 0.25  # largest h probed in (C1)
U0 = 1.0  # smallest u probed in (C1)
MIN_EXCEEDANCES = 50  # tail probabilities resting on fewer samples are not fitted
MIN_REPS = 1000


@dataclass
class ProbeReport:
    condition: str
    parameter: float
    fitted_exponent: float | None
    fitted_constant: float
    violations: int
    total_probes: int
    grid: dict
    verdict: str
    seeds: dict
    curves: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= self.violations <= self.total_probes:
            raise ParameterError("violation count must lie in [0, total probes]")
        if self.verdict not in ("consistent", "violated"):
            raise ParameterError(f"unknown verdict {self.verdict!r}")
        if (self.violations > 0) != (self.verdict == "violated"):
            raise ParameterError("verdict must be 'violated' exactly when some bound fails")

    def as_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, default=_jsonable)

    def tail_csv(self, key=None) -> str:
        """Two-column (u, empirical_tail) rows; one block per curve."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["curve", "u", "empirical_tail"])
        for name, curve in sorted(self.curves.items()):
            if key is not None and name != key:
                continue
            for u, p in zip(curve["x"], curve["y"]):
                w.writerow([name, repr(float(u)), repr(float(p))])
        return buf.getvalue()


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, np.generic):
        return x.item()
    raise TypeError(type(x))


def _check_reps(reps: int) -> None:
    if reps < MIN_REPS:
        raise ParameterError(f"reps={reps} is below the floor of {MIN_REPS}")


# --------------------------------------------------------------------------
# (C1): maximal tails


def sup_increments(paths: np.ndarray, w: int) -> np.ndarray:
    """Grid-sup of ‖X(s) − X(t0)‖ over |s − t0| ≤ w steps at disjoint anchors.

    ``paths`` has shape (reps, n+1, d); anchors sit at w, 3w, 5w, ... so the
    windows [t0 − w, t0 + w] do not overlap. Returns (reps, n_anchors).
    """
    n = paths.shape[1] - 1
    anchors = np.arange(w, n - w + 1, 2 * w)
    if anchors.size == 0:
        raise ParameterError("window is wider than the grid")
    out = np.empty((paths.shape[0], anchors.size))
    for k, a in enumerate(anchors):
        seg = paths[:, a - w:a + w + 1, :] - paths[:, a:a + 1, :]
        out[:, k] = np.sqrt(np.max(np.sum(seg**2, axis=2), axis=1))
    return out


def tail_slope(samples: np.ndarray, lo: int = MIN_EXCEEDANCES, decades: float = 1.0,
               points: int = 12) -> float:
    """Log-log slope of the empirical tail over exceedance counts lo … lo·10^decades.

    Works on order statistics: the k-th largest value u_k has tail k/N. Returns
    the decay exponent (positive for decaying tails).
    """
    M = np.sort(np.asarray(samples, dtype=float).ravel())[::-1]
    hi = min(int(lo * 10**decades), M.size)
    if hi <= lo or M[hi - 1] <= 0:
        return float("nan")
    ks = np.unique(np.round(np.geomspace(lo, hi, points)).astype(int))
    us, ps = M[ks - 1], ks / M.size
    if np.ptp(np.log(us)) == 0:
        return float("inf")
    return float(-np.polyfit(np.log(us), np.log(ps), 1)[0])


def _default_h_grid(n: int) -> np.ndarray:
    hs = [2.0**-k for k in range(3, 7) if 2.0**-k * n >= 2]
    if not hs:
        raise ParameterError("grid too coarse for the default h grid")
    return np.array(hs)


def probe_c1(spec: FieldSpec, H1: float, h_grid=None, u_grid=None, reps: int = 10_000, seed=0,
             paths: np.ndarray | None = None) -> ProbeReport:
    """Empirical check of P{sup_{|s−t|≤h} ‖X(s)−X(t)‖ ≥ h^H₁ u} ≤ K u^(−β).

    For every h the scaled grid-sups from disjoint windows are pooled. β̂ is the
    tail slope (top decade above the exceedance floor) and K̂ the smallest
    constant that makes K̂ u^(−β̂) dominate the tail at the largest h. Any other
    (h, u) cell exceeding the bound by more than 3 binomial standard errors is a
    violation.
    """
    _check_reps(reps)
    seed = _as_seed(seed)
    n = spec.grid_n
    h_grid = _default_h_grid(n) if h_grid is None else np.sort(np.asarray(h_grid, dtype=float))[::-1]
    if np.any(h_grid <= 0) or np.any(h_grid > H0):
        raise ParameterError(f"h grid must lie in (0, {H0}]")
    if paths is None:
        paths = sample_paths(spec, reps, seed)
    scaled = {}
    for h in h_grid:
        w = int(round(h * n))
        if w < 1 or abs(w - h * n) > 1e-9:
            raise ParameterError(f"h={h} is not a multiple of the grid step 1/{n}")
        scaled[float(h)] = (sup_increments(paths, w) / h**H1).ravel()
    top = max(float(np.max(v)) for v in scaled.values())
    if u_grid is None:
        u_grid = np.geomspace(U0, max(top, 2 * U0), 32)
    u_grid = np.asarray(u_grid, dtype=float)
    if np.any(u_grid < U0):
        raise ParameterError(f"u grid must lie in [{U0}, inf)")

    betas = {h: tail_slope(v) for h, v in scaled.items()}
    h_ref = float(h_grid[0])
    beta = betas[h_ref]
    ref = scaled[h_ref]
    tails = {h: np.array([np.mean(v >= u) for u in u_grid]) for h, v in scaled.items()}
    floor_ref = MIN_EXCEEDANCES / ref.size
    usable = tails[h_ref] >= floor_ref
    if not np.any(usable):
        raise ParameterError("no u above the estimation floor at the reference h")
    b_eff = beta if math.isfinite(beta) else 50.0
    K = float(np.max(tails[h_ref][usable] * u_grid[usable] ** b_eff))

    violations, total, cells = 0, 0, []
    for h, v in scaled.items():
        if h == h_ref:
            continue
        N = v.size
        for u, p in zip(u_grid, tails[h]):
            if p * N < MIN_EXCEEDANCES:
                continue
            bound = min(1.0, K * u ** (-b_eff))
            sigma = math.sqrt(max(bound * (1 - bound), 1.0 / N) / N)
            total += 1
            if p - bound > 3 * sigma:
                violations += 1
                cells.append([h, float(u), float(p), bound])
    verdict = "violated" if violations else "consistent"
    curves = {f"h={h:g}": {"x": u_grid.tolist(), "y": tails[h].tolist()} for h in tails}
    diag = {"beta_per_h": {f"{h:g}": b for h, b in betas.items()}, "h0": H0, "u0": U0,
            "reference_h": h_ref, "min_exceedances": MIN_EXCEEDANCES, "violating_cells": cells[:20],
            "law": spec.law, "H": spec.H, "alpha": spec.alpha, "grid_n": n, "reps": reps}
    return ProbeReport("C1", H1, beta, K, violations, max(total, violations),
                       {"h": h_grid.tolist(), "u": u_grid.tolist()}, verdict, seed.as_dict(), curves, diag)


# --------------------------------------------------------------------------
# (C2): small balls


MIN_LAG_STEPS = 8  # shorter lags carry the simulators' cell-scale bias


def _lag_pairs(n: int, pair_count: int, rng) -> list[tuple[int, int]]:
    """Pairs (i, j) on the grid with lags spread geometrically over [8/n, 1]."""
    lags = np.unique(np.round(np.geomspace(min(MIN_LAG_STEPS, n), n, pair_count)).astype(int))
    pairs = []
    for lag in lags[::-1]:
        i = int(rng.integers(0, n - lag + 1))
        pairs.append((i, i + int(lag)))
    return pairs


def _pair_samples(spec, pairs, paths, H2):
    n = spec.grid_n
    out = []
    for i, j in pairs:
        delta = (j - i) / n
        out.append((paths[:, j, :] - paths[:, i, :]) / delta**H2)
    return out  # list of (reps, d)


def _small_ball_verdict(values, sigmas, r_grid, d, reps, label):
    """Fit K̂ at the reference pair (first) and count 3σ exceedances elsewhere.

    K̂ is the smallest constant with ref(r) ≤ K̂ r^d over the usable r < 1; the
    bound checked everywhere is min{1, K̂ r^d} ≤ max{1, K̂} min{1, r^d}.
    """
    ref = values[0]
    usable = (ref * reps >= MIN_EXCEEDANCES) & (r_grid < 1)
    if not np.any(usable):
        usable = (ref > 0) & (r_grid < 1)
    K = float(np.max(ref[usable] / r_grid[usable] ** d)) if np.any(usable) else 0.0
    env = np.minimum(1.0, K * r_grid**d)
    violations, total, cells = 0, 0, []
    for k in range(1, len(values)):
        for m, r in enumerate(r_grid):
            if values[k][m] * reps < MIN_EXCEEDANCES:
                continue
            bound = env[m]
            total += 1
            if values[k][m] - bound > 3 * sigmas[k][m]:
                violations += 1
                cells.append([k, float(r), float(values[k][m]), bound])
    return K, violations, max(total, violations), cells


def probe_c2(spec: FieldSpec, H2: float, r_grid=None, pair_count: int = 8, reps: int = 4000, seed=0,
             paths: np.ndarray | None = None) -> ProbeReport:
    """Empirical check of P{‖X(s)−X(t)‖ ≤ |s−t|^H₂ r} ≤ K min{1, r^d} for |s−t| ≤ 1."""
    _check_reps(reps)
    seed = _as_seed(seed)
    r_grid = np.geomspace(0.05, 4.0, 16) if r_grid is None else np.asarray(r_grid, dtype=float)
    if paths is None:
        paths = sample_paths(spec, reps, seed)
    pairs = _lag_pairs(spec.grid_n, pair_count, seed.rng(99))
    samples = _pair_samples(spec, pairs, paths, H2)
    d = paths.shape[2]
    values, sigmas = [], []
    for z in samples:
        norm = np.linalg.norm(z, axis=1)
        p = np.array([np.mean(norm <= r) for r in r_grid])
        values.append(p)
        sigmas.append(np.sqrt(np.maximum(p * (1 - p), 1.0 / reps) / reps))
    K, viol, total, cells = _small_ball_verdict(values, sigmas, r_grid, d, reps, "C2")
    slope = _small_ball_slope(values[0], r_grid, reps)
    lags = [(j - i) / spec.grid_n for i, j in pairs]
    curves = {f"lag={lag:g}": {"x": r_grid.tolist(), "y": v.tolist()} for lag, v in zip(lags, values)}
    diag = {"pairs": [list(p) for p in pairs], "lags": lags, "reference_lag": lags[0],
            "small_ball_slope": slope, "violating_cells": cells[:20], "law": spec.law, "H": spec.H, "reps": reps}
    return ProbeReport("C2", H2, None, K, viol, total, {"r": r_grid.tolist(), "lags": lags},
                       "violated" if viol else "consistent", seed.as_dict(), curves, diag)


def _small_ball_slope(p, r_grid, reps):
    keep = (p * reps >= MIN_EXCEEDANCES) & (r_grid <= 0.5)
    if keep.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(r_grid[keep]), np.log(p[keep]), 1)[0])


# --------------------------------------------------------------------------
# Fourier form of (C2)


def phi_kernel(x, r: float) -> np.ndarray | float:
    """φ_r(x) = ∏_j (1 − cos(2 r x_j)) / (2π r x_j²), with the limit r/π at x_j = 0."""
    if r <= 0:
        raise ParameterError("r must be positive")
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    small = np.abs(r * x) < 1e-4
    xs = np.where(small, 1.0, x)
    # 1 − cos(2rx) = 2 sin²(rx) avoids cancellation
    val = np.where(small, (r / math.pi) * (1 - (r * x) ** 2 / 3), 2 * np.sin(r * xs) ** 2 / (2 * math.pi * r * xs**2))
    out = np.prod(val, axis=-1) if not scalar else val[0]
    return float(out) if np.ndim(out) == 0 else out


def phi_hat(z, r: float) -> np.ndarray | float:
    """φ̂_r(z) = ∏_j (1 − |z_j| / (2r))^+."""
    if r <= 0:
        raise ParameterError("r must be positive")
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    val = np.clip(1 - np.abs(np.atleast_1d(z)) / (2 * r), 0.0, None)
    out = val[0] if scalar else np.prod(val, axis=-1)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class QuadSpec:
    nodes_per_period: int = 8
    min_nodes: int = 256
    max_nodes: int = 20_000
    noise_level: float = 3.0  # cf truncation at noise_level / sqrt(reps)
    max_half_width: float = 400.0


def _cf_half_width(z: np.ndarray, quad: QuadSpec) -> float:
    """Half-width L beyond which |ĉ(x)| stays below the MC noise level."""
    reps = z.shape[0]
    noise = quad.noise_level / math.sqrt(reps)
    scale = max(float(np.median(np.abs(z))), 1e-12)
    xs = np.geomspace(0.01 / scale, quad.max_half_width, 400)
    cf = np.array([np.mean(np.cos(x * z)) for x in xs])
    above = np.nonzero(np.abs(cf) > noise)[0]
    L = xs[above[-1]] if above.size else xs[0]
    return float(min(2 * L, quad.max_half_width))


def _fourier_lhs_1d(z: np.ndarray, r_grid: np.ndarray, quad: QuadSpec) -> tuple[np.ndarray, float]:
    """∫ φ_r(x) ĉ(x) dx on [−L, L] by Gauss-Legendre, ĉ the empirical cf."""
    L = _cf_half_width(z, quad)
    periods = L * max(r_grid.max(), 1.0) / math.pi
    n_nodes = int(min(quad.max_nodes, max(quad.min_nodes, quad.nodes_per_period * periods)))
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    x, w = L * x, L * w
    cf = np.empty(n_nodes)
    for s in range(0, n_nodes, 256):
        cf[s:s + 256] = np.cos(np.outer(x[s:s + 256], z)).mean(axis=1)
    out = np.array([np.sum(w * phi_kernel(x[:, None], r) * cf) for r in r_grid])
    return out, L


def _fourier_lhs_2d(z: np.ndarray, r_grid: np.ndarray, quad: QuadSpec) -> tuple[np.ndarray, float]:
    L = max(_cf_half_width(z[:, 0], quad), _cf_half_width(z[:, 1], quad))
    periods = L * max(r_grid.max(), 1.0) / math.pi
    m = int(min(400, max(64, quad.nodes_per_period * periods)))
    x, w = np.polynomial.legendre.leggauss(m)
    x, w = L * x, L * w
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    W = np.outer(w, w).ravel()
    pts = np.stack([X1.ravel(), X2.ravel()], axis=1)
    cf = np.empty(len(pts))
    for s in range(0, len(pts), 512):
        cf[s:s + 512] = np.cos(pts[s:s + 512] @ z.T).mean(axis=1)
    out = np.array([np.sum(W * phi_kernel(pts, r) * cf) for r in r_grid])
    return out, L


def fourier_c2_criterion(spec: FieldSpec, H2: float, r_grid=None, pairs: int = 6, mc_reps: int = 4000,
                         quad_spec: QuadSpec | None = None, seed=0,
                         paths: np.ndarray | None = None) -> ProbeReport:
    """Left side of the Fourier small-ball criterion against K min{1, r^d}.

    For every probed lag the empirical characteristic function of the scaled
    increment is integrated against φ_r. The direct mean of φ̂_r(Z) (equal to
    the same integral) supplies the Monte Carlo error and a quadrature check; the
    indicator sandwich P(‖Z‖≤r) ≤ 2^d·LHS and LHS ≤ P(‖Z‖ ≤ 2√d·r) is recorded.
    """
    _check_reps(mc_reps)
    seed = _as_seed(seed)
    quad = quad_spec or QuadSpec()
    r_grid = np.geomspace(0.05, 4.0, 12) if r_grid is None else np.asarray(r_grid, dtype=float)
    if paths is None:
        paths = sample_paths(spec, mc_reps, seed)
    d = paths.shape[2]
    if d > 2:
        raise ParameterError("Fourier quadrature is implemented for d <= 2")
    pair_list = _lag_pairs(spec.grid_n, pairs, seed.rng(99))
    samples = _pair_samples(spec, pair_list, paths, H2)
    values, sigmas, direct, quad_err, sandwich_ok, widths = [], [], [], [], True, []
    for z in samples:
        lhs, L = (_fourier_lhs_1d(z[:, 0], r_grid, quad) if d == 1 else _fourier_lhs_2d(z, r_grid, quad))
        ph = np.stack([phi_hat(z, r) for r in r_grid], axis=1)  # (reps, len(r))
        dm = ph.mean(axis=0)
        values.append(lhs)
        direct.append(dm)
        widths.append(L)
        sigmas.append(ph.std(axis=0) / math.sqrt(mc_reps) + np.abs(lhs - dm))
        quad_err.append(float(np.max(np.abs(lhs - dm))))
        norm = np.linalg.norm(z, axis=1)
        lower = np.array([np.mean(norm <= r) for r in r_grid])
        upper = np.array([np.mean(norm <= 2 * math.sqrt(d) * r) for r in r_grid])
        sandwich_ok &= bool(np.all(lower <= 2**d * dm + 1e-12) and np.all(dm <= upper + 1e-12))
    K, viol, total, cells = _small_ball_verdict(values, sigmas, r_grid, d, mc_reps, "C2-fourier")
    lags = [(j - i) / spec.grid_n for i, j in pair_list]
    curves = {f"lag={lag:g}": {"x": r_grid.tolist(), "y": v.tolist()} for lag, v in zip(lags, values)}
    diag = {"lags": lags, "reference_lag": lags[0], "quadrature_max_abs_error": max(quad_err),
            "cf_half_widths": widths, "sandwich_factors": {"lower": 2**d, "radius": 2 * math.sqrt(d)},
            "sandwich_holds": sandwich_ok, "direct_means": [x.tolist() for x in direct],
            "violating_cells": cells[:20], "law": spec.law, "H": spec.H, "reps": mc_reps}
    return ProbeReport("C2-fourier", H2, None, K, viol, total, {"r": r_grid.tolist(), "lags": lags},
                       "violated" if viol else "consistent", seed.as_dict(), curves, diag)
