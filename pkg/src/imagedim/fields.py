"""Sample paths of self-similar processes on the grid {k/n : k = 0..n} of [0, 1].

Five laws are available: fractional Brownian motion, linear and harmonizable
fractional stable motion, real harmonizable fractional Lévy motion and the
Rosenblatt process. ``simulate`` builds a d-dimensional path from independent
components; ``image_points`` and ``image_measure`` push sets and measures
through a path.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, special
from scipy.signal import fftconvolve

from .errors import ParameterError, SimulationError
from .geometry import DiscreteMeasure, PointCloud
from .sampling import Seed, _as_seed, default_window, lepage_terms, poisson_cloud, sas_from_rng

__all__ = [
    "LAWS",
    "FieldSpec",
    "SamplePath",
    "simulate",
    "simulate_fbm",
    "simulate_lfsm",
    "simulate_hfsm",
    "simulate_rhflm",
    "simulate_rosenblatt",
    "hfsm_values",
    "vectorize",
    "sample_paths",
    "image_points",
    "image_measure",
]

LAWS = ("fbm", "lfsm", "hfsm", "rhflm", "rosenblatt")


@dataclass(frozen=True)
class FieldSpec:
    law: str
    H: float | None = None
    alpha: float | None = None
    kappa: float | None = None
    d: int = 1
    grid_n: int = 1024
    # truncation knobs; None means the law's default
    burn_in: float | None = None
    lepage_K: int | None = None
    window: tuple | None = None
    scale: float = 1.0

    def __post_init__(self):
        if self.law not in LAWS:
            raise ParameterError(f"unknown law {self.law!r}; expected one of {LAWS}")
        if self.law == "rosenblatt":
            if self.kappa is None:
                raise ParameterError("rosenblatt needs kappa")
            if not 0.25 < self.kappa < 0.5:
                raise ParameterError(f"kappa must lie in (1/4, 1/2), got {self.kappa}")
            if self.H is None:
                object.__setattr__(self, "H", 2 * self.kappa)
            elif abs(self.H - 2 * self.kappa) > 1e-12:
                raise ParameterError("rosenblatt requires H = 2*kappa")
        if self.H is None or not 0 < self.H < 1:
            raise ParameterError(f"H must lie in (0, 1), got {self.H}")
        if self.law in ("lfsm", "hfsm"):
            if self.alpha is None or not 0 < self.alpha <= 2:
                raise ParameterError(f"{self.law} needs alpha in (0, 2]")
        if self.law == "lfsm":
            _check_lfsm(self.alpha, self.H)
        if self.d < 1:
            raise ParameterError("d must be >= 1")
        if self.grid_n < 2 or self.grid_n & (self.grid_n - 1):
            raise ParameterError("grid_n must be a power of two")
        if self.scale <= 0:
            raise ParameterError("scale must be positive")

    def as_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


@dataclass(frozen=True)
class SamplePath:
    times: np.ndarray
    values: np.ndarray  # (n+1, d)
    spec: FieldSpec
    seeds: tuple  # one Seed per component
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[0] != len(self.times):
            raise SimulationError("values and times disagree in length")
        if not np.all(np.isfinite(v)):
            raise SimulationError("path contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def d(self) -> int:
        return self.values.shape[1]

    @property
    def n(self) -> int:
        return len(self.times) - 1

    def __getitem__(self, k):
        return self.values[k]

    def component(self, j: int) -> "SamplePath":
        return SamplePath(self.times, self.values[:, j:j + 1], _with_d(self.spec, 1),
                          (self.seeds[j],), dict(self.meta))

    def header(self) -> dict:
        return {
            "spec": self.spec.as_dict(),
            "seeds": [s.as_dict() for s in self.seeds],
            "meta": self.meta,
        }

    def to_csv(self) -> str:
        """JSON metadata on a leading ``#`` line, then ``t, x1..xd`` rows."""
        buf = io.StringIO()
        buf.write("# " + json.dumps(self.header(), sort_keys=True) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t"] + [f"x{j + 1}" for j in range(self.d)])
        for t, row in zip(self.times, self.values):
            writer.writerow([repr(float(t))] + [repr(float(x)) for x in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SamplePath":
        first, rest = text.split("\n", 1)
        header = json.loads(first[2:])
        rows = list(csv.reader(io.StringIO(rest)))[1:]
        data = np.array([[float(c) for c in r] for r in rows])
        spec_d = dict(header["spec"])
        if "window" in spec_d:
            spec_d["window"] = tuple(spec_d["window"])
        seeds = tuple(Seed(**s) for s in header["seeds"])
        return cls(data[:, 0], data[:, 1:], FieldSpec(**spec_d), seeds, header["meta"])


def _with_d(spec: FieldSpec, d: int) -> FieldSpec:
    return FieldSpec(**{**spec.as_dict(), "d": d})


def _check_n(n: int, lo: int = 2**8, hi: int = 2**22) -> None:
    if n & (n - 1) or not lo <= n <= hi:
        raise ParameterError(f"n must be a power of two in [{lo}, {hi}], got {n}")


def _times(n: int) -> np.ndarray:
    return np.arange(n + 1) / n


# --------------------------------------------------------------------------
# fractional Brownian motion


def _fgn_eigs(H: float, m: int) -> np.ndarray:
    k = np.arange(m + 1, dtype=float)
    r = 0.5 * ((k + 1) ** (2 * H) - 2 * k ** (2 * H) + np.abs(k - 1) ** (2 * H))
    row = np.concatenate([r, r[-2:0:-1]])
    return np.fft.fft(row).real


def fgn(H: float, n: int, rng: np.random.Generator, size: int = 1) -> np.ndarray:
    """Unit-step fractional Gaussian noise via circulant embedding, shape (size, n)."""
    m = n
    for _ in range(3):
        eig = _fgn_eigs(H, m)
        if eig.min() >= -1e-10 * eig.max():
            break
        m *= 2
    else:
        raise SimulationError("circulant embedding is not non-negative definite")
    M = 2 * m
    scale = np.sqrt(np.clip(eig, 0, None) / M)
    z = rng.standard_normal((size, M)) + 1j * rng.standard_normal((size, M))
    return np.fft.fft(scale * z, axis=1)[:, :n].real


def fbm_paths(H: float, n: int, rng: np.random.Generator, size: int = 1) -> np.ndarray:
    """``size`` fBm paths on the grid k/n with Var X(1) = 1, shape (size, n+1)."""
    inc = fgn(H, n, rng, size) * n ** (-H)
    out = np.zeros((size, n + 1))
    np.cumsum(inc, axis=1, out=out[:, 1:])
    return out


def simulate_fbm(H: float, n: int, seed, scale: float = 1.0) -> SamplePath:
    """Exact-in-law fractional Brownian motion, Cov = ½(s^2H + t^2H − |t−s|^2H)."""
    _check_n(n)
    spec = FieldSpec("fbm", H=H, grid_n=n, scale=scale)
    seed = _as_seed(seed)
    x = scale * fbm_paths(H, n, seed.rng(), 1)[0]
    return SamplePath(_times(n), x, spec, (seed,), {"method": "circulant embedding"})


# --------------------------------------------------------------------------
# linear fractional stable motion


def _check_lfsm(alpha: float, H: float) -> None:
    if not 1 < alpha <= 2:
        raise ParameterError(f"lfsm needs 1 < alpha <= 2, got alpha={alpha}")
    if alpha * H <= 1:
        raise ParameterError(
            f"alpha*H = {alpha * H:.4g} <= 1: the linear fractional stable motion is "
            "a.s. unbounded on every interval (Maejima), so it cannot be sampled on a grid")


def _geometric_cells(inner: float, outer: float, growth: float = 1.05) -> np.ndarray:
    """Edges inner = e_0 < e_1 < ... < e_k = outer with e_{i+1} ≈ growth * e_i."""
    if outer <= inner:
        return np.array([inner])
    k = max(1, math.ceil(math.log(outer / inner) / math.log(growth)))
    return inner * (outer / inner) ** (np.arange(k + 1) / k)


def _power_cell_avg(t, lo, hi, p):
    """Average of (t − s)_+^p over s in [lo, hi] (vectorised, p > −1)."""
    q = p + 1
    return (np.clip(t - lo, 0, None) ** q - np.clip(t - hi, 0, None) ** q) / (q * (hi - lo))


@dataclass(frozen=True)
class _LfsmPlan:
    n: int
    alpha: float
    gamma: float
    fine_hist: int  # fine cells before 0, in units of 1/n
    kernel: np.ndarray  # fine convolution kernel K[m]
    coarse: np.ndarray  # (n+1, n_coarse) kernel differences
    coarse_w: np.ndarray
    norm: float
    burn_in: float


_LFSM_CACHE: dict = {}


def _lfsm_plan(alpha: float, H: float, n: int, burn_in: float) -> _LfsmPlan:
    key = (alpha, H, n, burn_in)
    if key in _LFSM_CACHE:
        return _LFSM_CACHE[key]
    gamma = H - 1.0 / alpha
    delta = 1.0 / n
    fine_hist = n  # fine cells cover [-1, 1]
    m = np.arange(fine_hist + n + 1, dtype=float)
    kernel = delta**gamma * (m ** (gamma + 1) - np.clip(m - 1, 0, None) ** (gamma + 1)) / (gamma + 1)
    kernel[0] = 0.0
    edges = -_geometric_cells(1.0, burn_in)[::-1]
    lo, hi = edges[:-1], edges[1:]
    t = _times(n)[:, None]
    coarse = _power_cell_avg(t, lo, hi, gamma) - _power_cell_avg(0.0, lo, hi, gamma)
    coarse_w = hi - lo
    # scale of X(1): sum |kernel diff|^alpha * cell width
    j = np.arange(fine_hist + n)
    at_zero = np.where(fine_hist - j >= 0, kernel[np.clip(fine_hist - j, 0, None)], 0.0)
    k_one = kernel[fine_hist + n - j] - at_zero
    s_alpha = np.sum(np.abs(k_one) ** alpha) * delta + np.sum(np.abs(coarse[-1]) ** alpha * coarse_w)
    plan = _LfsmPlan(n, alpha, gamma, fine_hist, kernel, coarse, coarse_w, s_alpha ** (-1 / alpha), burn_in)
    if len(_LFSM_CACHE) > 16:
        _LFSM_CACHE.clear()
    _LFSM_CACHE[key] = plan
    return plan


def lfsm_paths(alpha: float, H: float, n: int, rng: np.random.Generator, size: int = 1,
               burn_in: float = 1024.0) -> tuple[np.ndarray, _LfsmPlan]:
    """(size, n+1) LFSM paths with X(1) ~ SαS(1), kernel constants a=1, b=0."""
    plan = _lfsm_plan(alpha, H, n, burn_in)
    n_fine = plan.fine_hist + n
    out = np.empty((size, n + 1))
    for start in range(0, size, 256):
        b = min(256, size - start)
        fine = sas_from_rng(rng, alpha, (b, n_fine), (1.0 / n) ** (1 / alpha))
        coarse = sas_from_rng(rng, alpha, (b, len(plan.coarse_w)), plan.coarse_w ** (1 / alpha))
        conv = fftconvolve(fine, plan.kernel[None, :], axes=1)
        x = conv[:, plan.fine_hist: plan.fine_hist + n + 1] - conv[:, [plan.fine_hist]]
        x += coarse @ plan.coarse.T
        out[start:start + b] = plan.norm * x
    out[:, 0] = 0.0
    return out, plan


def simulate_lfsm(alpha: float, H: float, n: int, seed, burn_in: float | None = None,
                  scale: float = 1.0) -> SamplePath:
    """Linear fractional stable motion by discretizing the moving-average integral.

    Fine cells of width 1/n cover [-1, 1]; the history back to ``-burn_in`` uses
    geometrically growing cells. Cell masses are exact SαS draws and the kernel is
    cell-averaged, so X(1) is exactly SαS with unit scale.
    """
    _check_n(n)
    burn_in = 1024.0 if burn_in is None else float(burn_in)
    spec = FieldSpec("lfsm", H=H, alpha=alpha, grid_n=n, burn_in=burn_in, scale=scale)
    seed = _as_seed(seed)
    x, plan = lfsm_paths(alpha, H, n, seed.rng(), 1, burn_in)
    meta = {"burn_in": burn_in, "kernel": "a=1, b=0", "normalization": plan.norm,
            "history_cells": int(len(plan.coarse_w)), "marginal_scale_at_1": 1.0}
    return SamplePath(_times(n), scale * x[0], spec, (seed,), meta)


# --------------------------------------------------------------------------
# harmonizable fractional stable motion


def _c_alpha(alpha: float) -> float:
    if alpha == 1:
        return 2 / math.pi
    return (1 - alpha) / (math.gamma(2 - alpha) * math.cos(math.pi * alpha / 2))


def _hfsm_scale(alpha: float, H: float) -> float:
    """Scale of Re ∑ Γ^{-1/α} G f(V)/p(V)^{1/α} at t=1 (before normalization)."""
    expo = alpha * H + 1

    def g(x):
        return (2 * (1 - math.cos(x))) ** (alpha / 2) * x ** (-expo)

    pieces = [integrate.quad(g, 0, 1, limit=200)[0]]
    # oscillatory tail: integrate period by period, then bound the remainder
    a = 1.0
    for _ in range(400):
        pieces.append(integrate.quad(g, a, a + 2 * math.pi, limit=100)[0])
        a += 2 * math.pi
    tail = 2 ** alpha * a ** (-alpha * H) / (alpha * H) * 0.5
    total = 2 * (math.fsum(pieces) + tail)
    e_abs = 2 ** (alpha / 2) * math.gamma((alpha + 1) / 2) / math.sqrt(math.pi)
    return (total * e_abs / _c_alpha(alpha)) ** (1 / alpha)


def _proposal_exponent(alpha: float, H: float) -> float:
    # keeps E|term|^2 finite at both ends of the spectrum
    return min(1.0, min(H, 1 - H) / max(2 / alpha - 1, 1e-9))


def hfsm_values(alpha: float, H: float, times, seed, K: int = 10_000) -> tuple[np.ndarray, dict]:
    """Truncated LePage series of the harmonizable stable motion at ``times``.

    Frequencies come from the symmetric proposal p(λ) ∝ |λ|^(a−1) on |λ| < 1 and
    |λ|^(−a−1) beyond; terms are reweighted by p^(−1/α).
    """
    if not 0 < alpha < 2:
        raise ParameterError("hfsm needs 0 < alpha < 2")
    if not 0 < H < 1:
        raise ParameterError("H must lie in (0, 1)")
    seed = _as_seed(seed)
    terms = lepage_terms(alpha, K, seed)
    rng = seed.rng(1)
    a = _proposal_exponent(alpha, H)
    u = rng.uniform(size=K)
    inner = rng.uniform(size=K) < 0.5
    mag = np.where(inner, u ** (1 / a), u ** (-1 / a))
    lam = mag * rng.choice([-1.0, 1.0], size=K)
    dens = 0.25 * a * np.where(inner, mag ** (a - 1), mag ** (-a - 1))
    radial = np.hypot(terms.marks[:, 0], terms.marks[:, 1])
    coef = (terms.weights(alpha) * radial * np.exp(1j * terms.phases)
            * np.abs(lam) ** (-(H + 1 / alpha)) * dens ** (-1 / alpha))
    norm = 1.0 / _hfsm_scale_cached(alpha, H)
    t = np.asarray(times, dtype=float)
    out = np.empty(len(t))
    for s in range(0, len(t), 64):
        ph = np.exp(1j * np.outer(t[s:s + 64], lam)) - 1.0
        out[s:s + 64] = (ph @ coef).real
    meta = {"lepage_K": K, "proposal_exponent": a, "normalization": norm,
            "frequency_law": "two-sided power proposal with importance reweighting"}
    return norm * out, meta


_HFSM_SCALES: dict = {}


def _hfsm_scale_cached(alpha, H):
    key = (alpha, H)
    if key not in _HFSM_SCALES:
        _HFSM_SCALES[key] = _hfsm_scale(alpha, H)
    return _HFSM_SCALES[key]


def simulate_hfsm(alpha: float, H: float, n: int, seed, K: int | None = None,
                  scale: float = 1.0) -> SamplePath:
    _check_n(n)
    K = 10_000 if K is None else int(K)
    spec = FieldSpec("hfsm", H=H, alpha=alpha, grid_n=n, lepage_K=K, scale=scale)
    seed = _as_seed(seed)
    x, meta = hfsm_values(alpha, H, _times(n), seed, K)
    return SamplePath(_times(n), scale * x, spec, (seed,), meta)


# --------------------------------------------------------------------------
# real harmonizable fractional Lévy motion


@lru_cache(maxsize=64)
def _rhflm_var(H: float, eps: float, R: float) -> float:
    """Var X(1) for the window [eps, R] with unit-modulus marks."""

    def g(x):
        return 2 * (1 - math.cos(x)) * x ** (-2 * H - 1)

    edges = np.concatenate([[eps], np.arange(math.ceil(eps / (2 * math.pi)) + 1, 10**6) * 2 * math.pi])
    edges = edges[edges < R]
    edges = np.append(edges, R)
    total = math.fsum(integrate.quad(g, lo, hi, limit=100)[0] for lo, hi in zip(edges[:-1], edges[1:]))
    return 2 * 2 * total  # both signs of xi, E|2 Re(g z)|^2 = 2|g|^2


def rhflm_values(H: float, times, seed, window: tuple[float, float]) -> tuple[np.ndarray, dict]:
    eps, R = window
    cloud = poisson_cloud(eps, R, seed)
    xi = cloud.xi[:, 0]
    coef = cloud.z * np.abs(xi) ** (-(H + 0.5))
    norm = 1.0 / math.sqrt(_rhflm_var(H, eps, R))
    t = np.asarray(times, dtype=float)
    out = np.empty(len(t))
    for s in range(0, len(t), 64):
        ph = np.exp(-1j * np.outer(t[s:s + 64], xi)) - 1.0
        out[s:s + 64] = 2 * (ph @ coef).real
    meta = {"window": [eps, R], "poisson_points": len(cloud), "mark_law": cloud.mark_law,
            "compensator": "omitted (marks have zero mean)", "normalization": norm}
    return norm * out, meta


def simulate_rhflm(H: float, n: int, seed, window: tuple | None = None,
                   scale: float = 1.0) -> SamplePath:
    """Real harmonizable fractional Lévy motion (no Gaussian part), unit Var X(1)."""
    _check_n(n)
    window = default_window(n) if window is None else tuple(window)
    spec = FieldSpec("rhflm", H=H, grid_n=n, window=window, scale=scale)
    seed = _as_seed(seed)
    x, meta = rhflm_values(H, _times(n), seed, window)
    return SamplePath(_times(n), scale * x, spec, (seed,), meta)


# --------------------------------------------------------------------------
# Rosenblatt process


_GL_X, _GL_W = np.polynomial.legendre.leggauss(4)
_GL_X = 0.5 * (_GL_X + 1)
_GL_W = 0.5 * _GL_W


@dataclass(frozen=True)
class _RosenblattPlan:
    n: int
    kappa: float
    kernels: np.ndarray  # (G, L) fine kernels
    coarse: np.ndarray  # (G, n, n_coarse)
    coarse_w: np.ndarray
    norm: float
    burn_in: float


_ROS_CACHE: dict = {}


def rosenblatt_norm(kappa: float) -> float:
    """c with Var[c ∫∫' A_1 dB dB] = 1 for the continuum kernel."""
    beta = special.beta(kappa, 1 - 2 * kappa)
    return math.sqrt(kappa * (4 * kappa - 1)) / beta


def _rosenblatt_raw_var(kernels: np.ndarray, coarse: np.ndarray, coarse_w: np.ndarray, n: int,
                        diagonal: str = "renormalized") -> float:
    """Exact Var of Y(1) for the discrete scheme (before scaling).

    With A the cell Gram matrix, Var = 2 ∑ A² when diagonal cells enter through
    ξ_i² − E ξ_i², and 2 (∑ A² − ∑ diag(A)²) when they are dropped. The fine-fine block
    is summed diagonal by diagonal with prefix sums, so memory stays O(n).
    """
    delta = 1.0 / n
    G, L = kernels.shape
    off = n
    ke = np.zeros((G, off + L))
    ke[:, off:] = kernels
    total = 0.0
    diag_sq = 0.0
    for shift in range(L):
        # A(j, j - shift) for j = shift..L-1, offsets a = n - j
        prod = ke[:, : off + L - shift] * ke[:, shift:]
        csum = np.concatenate([np.zeros((G, 1)), np.cumsum(prod, axis=1)], axis=1)
        a = n - np.arange(shift, L)
        lo_idx = a + off
        window = csum[:, lo_idx + n] - csum[:, lo_idx]
        vals = delta**2 * (_GL_W @ window)
        s = float(np.dot(vals, vals))
        total += s if shift == 0 else 2 * s
        if shift == 0:
            diag_sq += s
    # fine-coarse block
    nc = len(coarse_w)
    if nc:
        cross = np.zeros((nc, L))
        for g in range(G):
            v = coarse[g].T[:, ::-1]  # (nc, n), reversed in l
            conv = fftconvolve(v, ke[g][None, :], axes=1)
            cross += _GL_W[g] * conv[:, off: off + L][:, ::-1]
        cross *= delta * math.sqrt(delta) * np.sqrt(coarse_w)[:, None]
        total += 2 * float(np.sum(cross**2))
        phi = np.concatenate([math.sqrt(w * delta) * coarse[g] for g, w in enumerate(_GL_W)], axis=0)
        phi = phi * np.sqrt(coarse_w)[None, :]
        acc = phi.T @ phi
        total += float(np.sum(acc**2))
        diag_sq += float(np.sum(np.diag(acc) ** 2))
    return 2 * (total - diag_sq) if diagonal == "excluded" else 2 * total


def _rosenblatt_plan(kappa: float, n: int, burn_in: float, diagonal: str = "renormalized") -> _RosenblattPlan:
    if diagonal not in ("renormalized", "excluded"):
        raise ParameterError(f"unknown diagonal treatment {diagonal!r}")
    key = (kappa, n, burn_in, diagonal)
    if key in _ROS_CACHE:
        return _ROS_CACHE[key]
    delta = 1.0 / n
    L = 2 * n  # fine u-cells cover [-1, 1]
    m = np.arange(L, dtype=float)
    kernels = np.stack([
        delta ** (kappa - 1) * ((m + x) ** kappa - np.clip(m + x - 1, 0, None) ** kappa) / kappa
        for x in _GL_X])
    edges = -_geometric_cells(1.0, burn_in)[::-1]
    lo, hi = edges[:-1], edges[1:]
    s = (np.arange(n)[None, :] + _GL_X[:, None]) * delta  # (G, n)
    coarse = _power_cell_avg(s[..., None], lo, hi, kappa - 1)
    norm = 1.0 / math.sqrt(_rosenblatt_raw_var(kernels, coarse, hi - lo, n, diagonal))
    plan = _RosenblattPlan(n, kappa, kernels, coarse, hi - lo, norm, burn_in)
    if len(_ROS_CACHE) > 8:
        _ROS_CACHE.clear()
    _ROS_CACHE[key] = plan
    return plan


def rosenblatt_paths(kappa: float, n: int, rng: np.random.Generator, size: int = 1,
                     burn_in: float = 4096.0, diagonal: str = "renormalized") -> tuple[np.ndarray, _RosenblattPlan]:
    """(size, n+1) Rosenblatt paths from a discretized double Wiener integral.

    With A_k(i, j) = ∑_{s-nodes < t_k} w F(s, i) F(s, j), where F is the
    cell-averaged kernel (s − u)_+^(κ−1), the chaos sum is
    ∑_s w [(∑_i F ξ_i)^2 − ∑_i F^2 D_i]; both inner sums are convolutions on the
    fine cells. D_i = E ξ_i² ("renormalized") makes Y(t) the conditional
    expectation of the continuum integral given the cell increments;
    D_i = ξ_i² ("excluded") drops the diagonal cells altogether.
    """
    plan = _rosenblatt_plan(kappa, n, burn_in, diagonal)
    L = plan.kernels.shape[1]
    delta = 1.0 / n
    out = np.zeros((size, n + 1))
    k2 = plan.kernels**2
    c2 = plan.coarse**2
    if diagonal == "renormalized":
        ones = np.full((1, L), delta)
        mean_sq = [fftconvolve(ones, k2[g][None, :], axes=1)[:, n:2 * n] + plan.coarse_w @ c2[g].T
                   for g in range(len(_GL_W))]
    for start in range(0, size, 128):
        b = min(128, size - start)
        xi = rng.standard_normal((b, L)) * math.sqrt(delta)
        xc = rng.standard_normal((b, len(plan.coarse_w))) * np.sqrt(plan.coarse_w)
        integrand = np.zeros((b, n))
        for g in range(len(_GL_W)):
            z = fftconvolve(xi, plan.kernels[g][None, :], axes=1)[:, n:2 * n]
            z += xc @ plan.coarse[g].T
            if diagonal == "renormalized":
                dg = mean_sq[g]
            else:
                dg = fftconvolve(xi**2, k2[g][None, :], axes=1)[:, n:2 * n] + xc**2 @ c2[g].T
            integrand += _GL_W[g] * (z * z - dg)
        np.cumsum(integrand * delta, axis=1, out=out[start:start + b, 1:])
    return plan.norm * out, plan


def simulate_rosenblatt(kappa: float, n: int, seed, burn_in: float | None = None,
                        scale: float = 1.0) -> SamplePath:
    """Rosenblatt process (Hermite order 2), H = 2κ, normalized so Var Y(1) = 1."""
    if not 0.25 < kappa < 0.5:
        raise ParameterError(f"kappa must lie in (1/4, 1/2), got {kappa}")
    _check_n(n, hi=2**12)
    burn_in = 4096.0 if burn_in is None else float(burn_in)
    spec = FieldSpec("rosenblatt", kappa=kappa, grid_n=n, burn_in=burn_in, scale=scale)
    seed = _as_seed(seed)
    x, plan = rosenblatt_paths(kappa, n, seed.rng(), 1, burn_in)
    meta = {"burn_in": burn_in, "normalization": plan.norm, "quadrature": "4-point Gauss-Legendre per cell",
            "diagonal": "renormalized cells (conditional expectation given cell increments)",
            "hermite_order": 2}
    return SamplePath(_times(n), scale * x[0], spec, (seed,), meta)


# --------------------------------------------------------------------------
# assembly


def _simulate_component(spec: FieldSpec, seed: Seed) -> SamplePath:
    n = spec.grid_n
    if spec.law == "fbm":
        return simulate_fbm(spec.H, n, seed, spec.scale)
    if spec.law == "lfsm":
        return simulate_lfsm(spec.alpha, spec.H, n, seed, spec.burn_in, spec.scale)
    if spec.law == "hfsm":
        return simulate_hfsm(spec.alpha, spec.H, n, seed, spec.lepage_K, spec.scale)
    if spec.law == "rhflm":
        return simulate_rhflm(spec.H, n, seed, spec.window, spec.scale)
    return simulate_rosenblatt(spec.kappa, n, seed, spec.burn_in, spec.scale)


def simulate(spec: FieldSpec, seed) -> SamplePath:
    """d-dimensional path with independent components drawn from child seeds."""
    seed = _as_seed(seed)
    parts = [_simulate_component(_with_d(spec, 1), seed.child(j)) for j in range(spec.d)]
    return vectorize(parts)


def vectorize(components: list[SamplePath]) -> SamplePath:
    if not components:
        raise ParameterError("need at least one component path")
    first = components[0]
    seeds = []
    for c in components:
        if c.d != 1:
            raise ParameterError("components must be one-dimensional")
        if len(c.times) != len(first.times) or not np.array_equal(c.times, first.times):
            raise ParameterError("component paths live on different grids")
        if _with_d(c.spec, 1) != _with_d(first.spec, 1):
            raise ParameterError("component specs differ")
        seeds.append(c.seeds[0])
    if len(set(seeds)) != len(seeds):
        raise ParameterError("components share a seed; they would not be independent")
    if len(components) == 1:
        return first
    values = np.hstack([c.values for c in components])
    return SamplePath(first.times, values, _with_d(first.spec, len(components)), tuple(seeds),
                      dict(first.meta))


def _component_batch(spec: FieldSpec, reps: int, seed: Seed) -> np.ndarray:
    n, rng = spec.grid_n, seed.rng()
    if spec.law == "fbm":
        return fbm_paths(spec.H, n, rng, reps)
    if spec.law == "lfsm":
        return lfsm_paths(spec.alpha, spec.H, n, rng, reps, spec.burn_in or 1024.0)[0]
    if spec.law == "rosenblatt":
        return rosenblatt_paths(spec.kappa, n, rng, reps, spec.burn_in or 4096.0)[0]
    t = _times(n)
    out = np.empty((reps, n + 1))
    for i in range(reps):
        if spec.law == "hfsm":
            out[i] = hfsm_values(spec.alpha, spec.H, t, seed.child(i), spec.lepage_K or 10_000)[0]
        else:
            out[i] = rhflm_values(spec.H, t, seed.child(i), spec.window or default_window(n))[0]
    return out


def sample_paths(spec: FieldSpec, reps: int, seed) -> np.ndarray:
    """Monte Carlo batch of shape (reps, n+1, d); component j uses child seed j."""
    if reps < 1:
        raise ParameterError("reps must be >= 1")
    _check_n(spec.grid_n, hi=2**12 if spec.law == "rosenblatt" else 2**22)
    seed = _as_seed(seed)
    comps = [spec.scale * _component_batch(spec, reps, seed.child(j)) for j in range(spec.d)]
    return np.stack(comps, axis=-1)


def _grid_index(path: SamplePath, t: np.ndarray, snap: bool) -> np.ndarray:
    t = np.asarray(t, dtype=float).reshape(-1)
    if np.any(t < -1e-12) or np.any(t > 1 + 1e-12):
        raise ParameterError("parameter points must lie in [0, 1]")
    n = path.n
    idx = np.rint(t * n).astype(np.int64)
    if not snap and np.any(np.abs(idx - t * n) > 1e-6):
        raise ParameterError("support is not on the path grid (pass snap=True to round)")
    return np.clip(idx, 0, n)


def _one_dim(cloud) -> np.ndarray:
    pts = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=float)
    pts = np.asarray(pts)
    if pts.ndim == 2:
        if pts.shape[1] != 1:
            raise ParameterError("simulated paths have a one-dimensional parameter")
        pts = pts[:, 0]
    return pts


def image_points(path: SamplePath, E, snap: bool = True) -> PointCloud:
    """{X(t) : t ∈ E} with duplicates kept; E is snapped to the grid by default."""
    t = _one_dim(E)
    idx = _grid_index(path, t, snap)
    meta = {"image_of": len(t), "grid_n": path.n, "law": path.spec.law, "H": path.spec.H, "d": path.d}
    if isinstance(E, PointCloud):
        meta["set"] = E.meta
    return PointCloud(path.values[idx], meta=meta)


def image_measure(path: SamplePath, mu: DiscreteMeasure, snap: bool = False) -> DiscreteMeasure:
    """Pushforward μ∘X⁻¹: every atom moves to X(t), masses unchanged."""
    t = _one_dim(mu.support)
    idx = _grid_index(path, t, snap)
    meta = {"pushforward_of": mu.meta, "grid_n": path.n, "law": path.spec.law, "H": path.spec.H,
            "d": path.d}
    return mu.pushforward(path.values[idx], meta)
