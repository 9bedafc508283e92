"""Test sets with known dimensions, their natural measures, and discrete measures.

Sets are finite clouds at a fixed construction depth; the depth is carried in
``meta`` so every downstream estimate can report it.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConstructionError, ParameterError

__all__ = [
    "Grid",
    "CantorSpec",
    "PointCloud",
    "DiscreteMeasure",
    "make_dyadic_grid",
    "cantor_set",
    "two_phase_cantor",
    "ball_mass",
    "uniform_measure",
    "point_mass",
]


@dataclass(frozen=True)
class Grid:
    level: int
    ambient_dim: int
    origin: tuple = ()
    extent: float = 1.0

    def __post_init__(self):
        if self.level < 1:
            raise ParameterError("grid level must be >= 1")
        if self.extent <= 0:
            raise ParameterError("grid extent must be positive")
        if not self.origin:
            object.__setattr__(self, "origin", (0.0,) * self.ambient_dim)

    @property
    def n_cells(self) -> int:
        return 2 ** (self.level * self.ambient_dim)

    @property
    def width(self) -> float:
        return self.extent / 2**self.level

    def cell_corners(self) -> np.ndarray:
        """Lower-left corners in lexicographic order (last axis fastest)."""
        ticks = np.arange(2**self.level) * self.width
        mesh = np.meshgrid(*([ticks] * self.ambient_dim), indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        return pts + np.asarray(self.origin, dtype=float)

    def cell_centers(self) -> np.ndarray:
        return self.cell_corners() + 0.5 * self.width

    def cells(self) -> list[list[tuple[float, float]]]:
        """Per-cell list of per-axis closed intervals; small grids only."""
        w = self.width
        return [[(c, c + w) for c in corner] for corner in self.cell_corners()]


def make_dyadic_grid(level: int, ambient_dim: int) -> Grid:
    if not 1 <= level <= 24:
        raise ParameterError(f"level must lie in [1, 24], got {level}")
    if ambient_dim < 1:
        raise ParameterError("ambient_dim must be >= 1")
    if level * ambient_dim > 26:
        raise ParameterError("grid too large to enumerate (2^(level*N) > 2^26 cells)")
    return Grid(level=level, ambient_dim=ambient_dim)


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray
    weights: np.ndarray | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2:
            raise ParameterError("points must be a (n, dim) array")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != (pts.shape[0],):
                raise ParameterError("weights must match the number of points")
            if np.any(w < 0):
                raise ParameterError("weights must be non-negative")
            w.setflags(write=False)
            object.__setattr__(self, "weights", w)

    @property
    def ambient_dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"x{i + 1}" for i in range(self.ambient_dim)] + ["weight"])
        w = self.weights if self.weights is not None else np.ones(len(self))
        for p, wi in zip(self.points, w):
            writer.writerow([repr(float(c)) for c in p] + [repr(float(wi))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, meta: dict | None = None) -> "PointCloud":
        rows = list(csv.reader(io.StringIO(text)))
        data = np.array([[float(c) for c in r] for r in rows[1:]], dtype=float)
        data = data.reshape(len(rows) - 1, len(rows[0]))
        return cls(data[:, :-1], data[:, -1], meta=dict(meta or {}))

    def to_json(self) -> str:
        return json.dumps(
            {
                "kind": "PointCloud",
                "meta": self.meta,
                "points": self.points.tolist(),
                "weights": None if self.weights is None else self.weights.tolist(),
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "PointCloud":
        d = json.loads(text)
        return cls(np.array(d["points"], dtype=float).reshape(len(d["points"]), -1),
                   None if d["weights"] is None else np.array(d["weights"]), meta=d["meta"])


@dataclass(frozen=True)
class DiscreteMeasure:
    support: PointCloud
    masses: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.masses, dtype=float)
        if m.shape != (len(self.support),):
            raise ParameterError("masses must match the support size")
        if len(m) == 0 or np.any(m <= 0) or not np.all(np.isfinite(m)):
            raise ParameterError("masses must be finite and strictly positive")
        m.setflags(write=False)
        object.__setattr__(self, "masses", m)

    @property
    def total_mass(self) -> float:
        return float(math.fsum(self.masses))

    @property
    def points(self) -> np.ndarray:
        return self.support.points

    @property
    def meta(self) -> dict:
        return self.support.meta

    def pushforward(self, points: np.ndarray, meta: dict | None = None) -> "DiscreteMeasure":
        """Same masses relocated to ``points`` (one row per atom)."""
        return DiscreteMeasure(PointCloud(points, meta=dict(meta or {})), self.masses)

    def to_csv(self) -> str:
        return PointCloud(self.points, self.masses).to_csv()

    def to_json(self) -> str:
        return json.dumps(
            {
                "kind": "DiscreteMeasure",
                "meta": self.meta,
                "total_mass": self.total_mass,
                "points": self.points.tolist(),
                "masses": self.masses.tolist(),
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "DiscreteMeasure":
        d = json.loads(text)
        pts = np.array(d["points"], dtype=float).reshape(len(d["points"]), -1)
        return cls(PointCloud(pts, meta=d["meta"]), np.array(d["masses"], dtype=float))


def uniform_measure(points, total_mass: float = 1.0, meta: dict | None = None) -> DiscreteMeasure:
    cloud = points if isinstance(points, PointCloud) else PointCloud(points, meta=dict(meta or {}))
    n = len(cloud)
    return DiscreteMeasure(cloud, np.full(n, total_mass / n))


def point_mass(x, mass: float = 1.0) -> DiscreteMeasure:
    return DiscreteMeasure(PointCloud(np.atleast_2d(np.asarray(x, dtype=float))), np.array([mass]))


@dataclass(frozen=True)
class CantorSpec:
    """Generalized Cantor construction in [0,1]^N.

    At level k every cell is replaced, along each axis, by ``branches[k]`` equally
    spaced subintervals of relative length ``ratios[k]``; the first child is flush
    with the left edge and the last with the right edge.
    """

    branches: tuple
    ratios: tuple
    depth: int
    ambient_dim: int = 1

    def __post_init__(self):
        b = tuple(int(m) for m in np.broadcast_to(self.branches, (self.depth,)))
        r = tuple(float(x) for x in np.broadcast_to(self.ratios, (self.depth,)))
        object.__setattr__(self, "branches", b)
        object.__setattr__(self, "ratios", r)
        if self.depth < 1:
            raise ParameterError("depth must be >= 1")
        if self.ambient_dim < 1:
            raise ParameterError("ambient_dim must be >= 1")
        for m, ratio in zip(b, r):
            if m < 2:
                raise ParameterError("branches per level must be >= 2")
            if not 0 < ratio < 1:
                raise ParameterError("ratios must lie in (0, 1)")
            if m * ratio > 1 + 1e-12:
                raise ConstructionError(f"overlapping children: m*r = {m * ratio:.6g} > 1")

    @classmethod
    def homogeneous(cls, m: int, r: float, depth: int, ambient_dim: int = 1) -> "CantorSpec":
        return cls((m,) * depth, (r,) * depth, depth, ambient_dim)

    @property
    def is_homogeneous(self) -> bool:
        return len(set(self.branches)) == 1 and len(set(self.ratios)) == 1

    @property
    def similarity_dim(self) -> float | None:
        if not self.is_homogeneous:
            return None
        return self.ambient_dim * math.log(self.branches[0]) / math.log(1 / self.ratios[0])


def _build_cantor(branches: Sequence[int], ratios: Sequence[float], ambient_dim: int):
    left = np.zeros(1)
    length = 1.0
    for m, r in zip(branches, ratios):
        step = length * (1 - r) / (m - 1)
        left = (left[:, None] + step * np.arange(m)[None, :]).ravel()
        length *= r
    if ambient_dim == 1:
        pts = left[:, None]
    else:
        mesh = np.meshgrid(*([left] * ambient_dim), indexing="ij")
        pts = np.stack([g.ravel() for g in mesh], axis=1)
    return pts, length


def _cloud_and_measure(pts: np.ndarray, meta: dict):
    cloud = PointCloud(pts, meta=meta)
    return cloud, DiscreteMeasure(cloud, np.full(len(pts), 1.0 / len(pts)))


def cantor_set(spec: CantorSpec):
    """Level-``depth`` approximation of a generalized Cantor set and its natural measure.

    Each surviving cell is represented by its lower corner and carries mass
    ``1 / #cells``.
    """
    n_cells = 1
    for m in spec.branches:
        n_cells *= m ** spec.ambient_dim
    if n_cells > 2**24:
        raise ParameterError(f"construction would hold {n_cells} points (limit 2^24)")
    pts, cell = _build_cantor(spec.branches, spec.ratios, spec.ambient_dim)
    meta = {
        "construction": "cantor",
        "branches": list(spec.branches) if not spec.is_homogeneous else spec.branches[0],
        "ratios": list(spec.ratios) if not spec.is_homogeneous else spec.ratios[0],
        "depth": spec.depth,
        "ambient_dim": spec.ambient_dim,
        "cell_side": cell,
        "dim_H": spec.similarity_dim,
        "dim_P": spec.similarity_dim,
        "natural_measure_exact": spec.is_homogeneous,
    }
    return _cloud_and_measure(pts, meta)


def phase_schedule(depth: int, block_growth: int, first: str = "A") -> list[str]:
    """Phase label per level: blocks of lengths 1, g, g^2, ... alternating A/B."""
    if block_growth < 2:
        raise ParameterError("block_growth must be >= 2")
    other = {"A": "B", "B": "A"}
    labels: list[str] = []
    block, phase = 1, first
    while len(labels) < depth:
        labels.extend([phase] * block)
        block *= block_growth
        phase = other[phase]
    return labels[:depth]


def two_phase_cantor(spec_a: CantorSpec, spec_b: CantorSpec, block_growth: int,
                     depth: int | None = None, first: str = "A"):
    """Cantor set alternating two homogeneous rules in geometrically growing blocks.

    Its lower and upper box exponents separate toward min/max of the two phase
    dimensions, so it has dim_H < dim_P whenever the phases differ. With
    ``spec_a == spec_b`` this reduces to ``cantor_set(spec_a)``.
    """
    if not (spec_a.is_homogeneous and spec_b.is_homogeneous):
        raise ParameterError("two_phase_cantor needs homogeneous phase specs")
    if spec_a.ambient_dim != spec_b.ambient_dim:
        raise ParameterError("phase specs must share ambient_dim")
    depth = depth if depth is not None else max(spec_a.depth, spec_b.depth)
    labels = phase_schedule(depth, block_growth, first)
    rule = {"A": (spec_a.branches[0], spec_a.ratios[0]), "B": (spec_b.branches[0], spec_b.ratios[0])}
    branches = [rule[p][0] for p in labels]
    ratios = [rule[p][1] for p in labels]
    spec = CantorSpec(tuple(branches), tuple(ratios), depth, spec_a.ambient_dim)
    if spec.is_homogeneous:
        cloud, mu = cantor_set(spec)
        return cloud, mu
    n_cells = math.prod(m ** spec.ambient_dim for m in branches)
    if n_cells > 2**24:
        raise ParameterError(f"construction would hold {n_cells} points (limit 2^24)")
    pts, cell = _build_cantor(branches, ratios, spec.ambient_dim)
    da, db = spec_a.similarity_dim, spec_b.similarity_dim
    # phases must each span a few octaves for envelope slopes to resolve them
    octaves = [0.0, 0.0]
    for p, r in zip(labels, ratios):
        octaves[p == "B"] += math.log2(1 / r)
    meta = {
        "construction": "two_phase_cantor",
        "phase_a": {"m": spec_a.branches[0], "r": spec_a.ratios[0], "dim": da},
        "phase_b": {"m": spec_b.branches[0], "r": spec_b.ratios[0], "dim": db},
        "block_growth": block_growth,
        "first_phase": first,
        "schedule": "".join(labels),
        "depth": depth,
        "ambient_dim": spec.ambient_dim,
        "cell_side": cell,
        "dim_H": min(da, db),
        "dim_P": max(da, db),
        "natural_measure_exact": False,
        "window_sufficient": _phase_blocks_resolved(labels, ratios),
    }
    return _cloud_and_measure(pts, meta)


def _phase_blocks_resolved(labels, ratios, min_octaves: float = 4.0) -> bool:
    """True when both phases own at least one block spanning ``min_octaves``."""
    best = {"A": 0.0, "B": 0.0}
    run, cur = 0.0, None
    for p, r in zip(labels, ratios):
        if p != cur:
            run, cur = 0.0, p
        run += math.log2(1 / r)
        best[p] = max(best[p], run)
    return min(best.values()) >= min_octaves


def ball_mass(mu: DiscreteMeasure, x, r: float) -> float:
    """Mass of the closed Euclidean ball B(x, r)."""
    if r <= 0:
        raise ParameterError("radius must be positive")
    x = np.asarray(x, dtype=float).reshape(1, -1)
    d2 = np.sum((mu.points - x) ** 2, axis=1)
    inside = d2 <= r * r * (1 + 1e-12)
    return float(math.fsum(mu.masses[inside]))
