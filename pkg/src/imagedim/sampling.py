"""Heavy-tailed and Poissonian randomness primitives.

Every draw is a pure function of a :class:`Seed`; there is no module-level
generator state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

__all__ = [
    "Seed",
    "StableParams",
    "LePageTerms",
    "PoissonCloud",
    "sample_sas",
    "lepage_terms",
    "poisson_cloud",
    "default_window",
]


@dataclass(frozen=True)
class Seed:
    """A (seed, stream) pair; distinct pairs give independent generators."""

    seed: int
    stream: int = 0

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ParameterError("seed must be an unsigned 64-bit integer")
        if self.stream < 0:
            raise ParameterError("stream index must be non-negative")

    def rng(self, *keys: int) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream, *keys))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, key: int) -> "Seed":
        """Derived seed for sub-task ``key`` (replica, component, ...)."""
        mixed = np.random.SeedSequence(self.seed, spawn_key=(self.stream, key)).generate_state(1, np.uint64)[0]
        return Seed(int(mixed), 0)

    def as_dict(self) -> dict:
        return {"seed": self.seed, "stream": self.stream}


def _as_seed(seed) -> Seed:
    if isinstance(seed, Seed):
        return seed
    return Seed(int(seed))


@dataclass(frozen=True)
class StableParams:
    alpha: float
    scale: float = 1.0
    symmetric: bool = True

    def __post_init__(self):
        if not 0 < self.alpha <= 2:
            raise ParameterError(f"alpha must lie in (0, 2], got {self.alpha}")
        if self.scale <= 0:
            raise ParameterError("scale must be positive")
        if not self.symmetric:
            raise ParameterError("only symmetric stable laws are supported")


def _cms(alpha: float, v: np.ndarray, w: np.ndarray) -> np.ndarray:
    # Chambers-Mallows-Stuck, symmetric case
    if alpha == 1.0:
        return np.tan(v)
    return (np.sin(alpha * v) / np.cos(v) ** (1.0 / alpha)
            * (np.cos((1.0 - alpha) * v) / w) ** ((1.0 - alpha) / alpha))


def sas_from_rng(rng: np.random.Generator, alpha: float, size, scale: float = 1.0) -> np.ndarray:
    """Draw SαS variates from an existing generator (used inside simulators)."""
    v = rng.uniform(-np.pi / 2, np.pi / 2, size)
    w = rng.standard_exponential(size)
    return scale * _cms(alpha, v, w)


def sample_sas(params: StableParams, n: int, seed) -> np.ndarray:
    """``n`` i.i.d. symmetric α-stable variates with scale ``params.scale``.

    alpha=2 gives N(0, 2σ²) and alpha=1 the Cauchy law with scale σ.
    """
    if n < 1:
        raise ParameterError("n must be >= 1")
    return sas_from_rng(_as_seed(seed).rng(), params.alpha, n, params.scale)


@dataclass(frozen=True)
class LePageTerms:
    arrivals: np.ndarray  # Gamma_1 < ... < Gamma_K
    phases: np.ndarray  # uniform on [0, 2pi)
    marks: np.ndarray  # (K, 2) standard Gaussian pairs

    def weights(self, alpha: float) -> np.ndarray:
        return self.arrivals ** (-1.0 / alpha)


def lepage_terms(alpha: float, K: int, seed) -> LePageTerms:
    if not 0 < alpha < 2:
        raise ParameterError("alpha must lie in (0, 2) for a LePage series")
    if K < 100:
        raise ParameterError(f"truncation K={K} is below the floor of 100")
    rng = _as_seed(seed).rng()
    arrivals = np.cumsum(rng.standard_exponential(K))
    phases = rng.uniform(0.0, 2 * np.pi, K)
    marks = rng.standard_normal((K, 2))
    return LePageTerms(arrivals, phases, marks)


@dataclass(frozen=True)
class PoissonCloud:
    xi: np.ndarray  # (k, N) frequencies
    z: np.ndarray  # (k,) complex marks
    eps: float
    R: float
    mark_law: str = "unit-modulus, uniform phase"

    def __len__(self) -> int:
        return len(self.z)


def default_window(n_grid: int) -> tuple[float, float]:
    return 2 * np.pi / n_grid, np.pi * n_grid


def _ball_volume(N: int) -> float:
    return math.pi ** (N / 2) / math.gamma(N / 2 + 1)


def poisson_cloud(eps: float, R: float, seed, ambient_dim: int = 1, intensity: float = 1.0,
                  rho: float = 1.0) -> PoissonCloud:
    """Poisson points with mean measure ``intensity * dξ * ν(dz)`` on ε ≤ ‖ξ‖ ≤ R.

    ν is rotationally invariant with radial part a point mass at ``rho``.
    """
    if not 0 < eps < R:
        raise ParameterError(f"need 0 < eps < R, got eps={eps}, R={R}")
    N = ambient_dim
    vol = _ball_volume(N) * (R**N - eps**N)
    rng = _as_seed(seed).rng()
    k = rng.poisson(intensity * vol)
    radius = (eps**N + rng.uniform(size=k) * (R**N - eps**N)) ** (1.0 / N)
    if N == 1:
        direction = rng.choice([-1.0, 1.0], size=(k, 1))
    else:
        g = rng.standard_normal((k, N))
        direction = g / np.linalg.norm(g, axis=1, keepdims=True)
    theta = rng.uniform(0.0, 2 * np.pi, k)
    return PoissonCloud(direction * radius[:, None], rho * np.exp(1j * theta), eps, R)
