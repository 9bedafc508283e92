"""Orchestration: build E and μ, simulate, estimate, predict, verify, persist.

Reports are JSON with sorted keys and carry no timestamps, so a case rerun with
the same configuration and seed reproduces its files byte for byte.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import __version__
from .config import EstimatorSpec, ExperimentConfig, MeasureSpec, ProbeSpec, SetSpec
from .errors import ParameterError
from .estimators import (box_counts, box_dimension, hausdorff_dim_cloud, lower_upper_box,
                         measure_local_dims)
from .fields import FieldSpec, image_measure, image_points, simulate
from .geometry import (CantorSpec, DiscreteMeasure, PointCloud, cantor_set, point_mass,
                       two_phase_cantor, uniform_measure)
from .probes import fourier_c2_criterion, probe_c1, probe_c2
from .profiles import profile_curve, profile_set
from .sampling import Seed

__all__ = [
    "PredictionInput",
    "VerificationCase",
    "build_set",
    "predict",
    "default_tolerance",
    "run_experiment",
    "run_probe",
    "verify_theorem",
    "emit_plot_data",
    "SUITE",
    "suite_case",
]


# --------------------------------------------------------------------------
# sets and measures


def build_set(spec: SetSpec, grid_n: int) -> tuple[PointCloud, DiscreteMeasure]:
    """E and its natural measure; the interval is the path grid itself."""
    if spec.kind == "empty":
        raise ParameterError("E is empty; nothing to image")
    if spec.kind == "interval":
        t = (np.arange(grid_n + 1) / grid_n)[:, None]
        meta = {"construction": "interval", "dim_H": 1.0, "dim_P": 1.0, "depth": int(math.log2(grid_n)),
                "natural_measure_exact": True}
        return PointCloud(t, meta=meta), uniform_measure(t, meta=meta)
    if spec.kind == "point":
        mu = point_mass([spec.point])
        meta = {"construction": "point", "dim_H": 0.0, "dim_P": 0.0, "depth": 0, "natural_measure_exact": True}
        return PointCloud(np.array([[spec.point]]), meta=meta), DiscreteMeasure(mu.support, mu.masses)
    a = CantorSpec.homogeneous(spec.m, spec.r, spec.depth)
    if spec.kind == "cantor":
        return cantor_set(a)
    b = CantorSpec.homogeneous(spec.m_b, spec.r_b, 1)
    return two_phase_cantor(CantorSpec.homogeneous(spec.m, spec.r, 1), b, spec.growth,
                            depth=spec.depth, first=spec.first)


# --------------------------------------------------------------------------
# predictions


@dataclass(frozen=True)
class PredictionInput:
    tag: str
    H: float
    d: int
    N: int = 1
    dim_H: float | None = None
    dim_P: float | None = None
    profile: float | None = None  # measured Dim_{Hd} E (or of μ) when no closed form applies
    kappa: float | None = None


def _profile_value(c: PredictionInput, s: float) -> tuple[float, str]:
    if c.dim_H is not None and c.dim_P is not None and abs(c.dim_H - c.dim_P) < 1e-12:
        return min(s, c.dim_P), "Dim_s E = min{s, dim_P E} (dim_H E = dim_P E)"
    if c.dim_P is not None and s >= c.N:
        return c.dim_P, "Dim_s E = dim_P E for s >= N"
    if c.profile is not None:
        return c.profile, "measured profile Dim_s E"
    raise ParameterError("prediction needs dim_H = dim_P, s >= N, or a measured profile value")


def predict(c: PredictionInput) -> tuple[float, str]:
    """Closed-form dimension of the image (set or measure) and its provenance."""
    if not 0 < c.H < 1:
        raise ParameterError("H must lie in (0, 1)")
    if c.tag in ("BG60", "Hdim-measure"):
        if c.dim_H is None:
            raise ParameterError("Hausdorff prediction needs dim_H")
        return min(c.d, c.dim_H / c.H), f"{c.tag}: min{{d, dim_H / H}}"
    if c.tag == "rosenblatt":
        H = 2 * c.kappa if c.kappa is not None else c.H
        prof, why = _profile_value(c, H * c.d)
        return prof / H, f"rosenblatt: Dim_(2 kappa d) E / (2 kappa); {why}"
    if c.tag == "corollary46":
        if c.N <= c.H * c.d:
            if c.dim_P is None:
                raise ParameterError("corollary46 with N <= Hd needs dim_P")
            return c.dim_P / c.H, "corollary46: N <= Hd gives dim_P E / H"
        if c.dim_H is None or c.dim_P is None or abs(c.dim_H - c.dim_P) > 1e-12:
            raise ParameterError("corollary46 needs N <= Hd or dim_H E = dim_P E")
        return min(c.d, c.dim_P / c.H), "corollary46: dim_H E = dim_P E gives min{d, dim_P E / H}"
    if c.tag in ("setResult", "Pdim-measure", "stable"):
        prof, why = _profile_value(c, c.H * c.d)
        return prof / c.H, f"{c.tag}: Dim_(Hd) E / H; {why}"
    raise ParameterError(f"unknown tag {c.tag!r}")


def default_tolerance(cfg: ExperimentConfig, predicted: float) -> float:
    if cfg.tolerance > 0:
        return cfg.tolerance
    if cfg.field.law in ("lfsm", "hfsm") or cfg.set.kind in ("cantor", "two_phase"):
        return 0.20
    if cfg.field.d == 1 and abs(predicted - 1.0) < 1e-12:
        return 0.10
    return 0.15


def _prediction_input(cfg: ExperimentConfig, E: PointCloud, profile: float | None = None) -> PredictionInput:
    f = cfg.field
    H = 2 * f.kappa if f.law == "rosenblatt" else f.H
    return PredictionInput(cfg.tag, H, f.d, 1, E.meta.get("dim_H"), E.meta.get("dim_P"), profile,
                           f.kappa if f.law == "rosenblatt" else None)


# --------------------------------------------------------------------------
# experiments


def _radii(est: EstimatorSpec):
    if est.radii_min > 0 and est.radii_max > est.radii_min:
        lo = math.ceil(math.log2(1 / est.radii_max))
        hi = math.floor(math.log2(1 / est.radii_min))
        return 2.0 ** -np.arange(lo, hi + 1)
    return None


def _replica_estimates(cfg: ExperimentConfig, E, mu, seed: Seed) -> dict:
    est = cfg.estimators
    path = simulate(cfg.field, seed)
    image = image_points(path, E)
    out = {"seed": seed.seed}
    box = box_dimension(image)
    lo, hi = lower_upper_box(image)
    out["box"] = box.value
    out["box_se"] = box.std_error
    out["lower_box"] = lo.value
    out["upper_box"] = hi.value
    out["box_window"] = list(box.window)
    out["counts"] = {"log_inv_eps": box.diagnostics["log_inv_eps"], "log_counts": box.diagnostics["log_counts"]}
    if est.estimate in ("hausdorff", "measure_lower", "measure_upper"):
        mx = image_measure(path, mu, snap=True)
        fld = measure_local_dims(mx, _radii(est), est.n_probe, seed.child(1),
                                 (est.quantile_low, est.quantile_high))
        out["measure_lower"] = fld.lower
        out["measure_upper"] = fld.upper
        out["measure_median"] = float(fld.quantiles[1])
        out["hausdorff"] = fld.lower
    return out


def _estimate_key(est: EstimatorSpec) -> str:
    return {"box": "box", "upper_box": "upper_box", "hausdorff": "hausdorff",
            "measure_lower": "measure_lower", "measure_upper": "measure_upper"}[est.estimate]


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1, default=_jsonable) + "\n"


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, np.generic):
        return x.item()
    raise TypeError(type(x))


def _case_dir(cfg: ExperimentConfig, out: str | None) -> str:
    path = os.path.join(out or cfg.out, cfg.case_id)
    os.makedirs(path, exist_ok=True)
    return path


def _profile_report(cfg: ExperimentConfig, E, mu) -> dict:
    est = cfg.estimators
    s_grid = np.geomspace(0.05, E.ambient_dim + 1, est.s_points)
    curve = profile_curve((E, mu), s_grid, _radii(est), est.n_probe, Seed(cfg.seed))
    s = est.profile_s or cfg.field.H * cfg.field.d
    single = profile_set(E, mu, s, _radii(est), est.n_probe, Seed(cfg.seed))
    return {"s": s, "estimate": single.value, "std_error": single.std_error,
            "label": single.diagnostics["label"],
            "curve": {"s": curve.s_grid.tolist(), "value": curve.values.tolist(),
                      "std_error": curve.std_errors.tolist()}}


def run_experiment(config: ExperimentConfig, out: str | None = None, budget: float | None = None,
                   write: bool = True) -> dict:
    """Simulate, image, estimate and (optionally) persist one case.

    Returns the report dictionary; with ``write`` the case directory receives
    config.ini, report.json and counts.csv (plus profile.csv for profile runs).
    """
    cfg = config
    if cfg.replication < 1:
        raise ParameterError("replication must be >= 1")
    try:
        E, mu = build_set(cfg.set, cfg.field.grid_n)
    except ParameterError as exc:
        raise ParameterError(f"[{cfg.case_id}] {exc}") from None
    if cfg.measure.kind == "point":
        mu = point_mass([float(E.points[0, 0])])
    master = Seed(cfg.seed)
    start = time.monotonic()
    report = {"case": cfg.case_id, "tag": cfg.tag, "code_version": __version__, "config": cfg.as_dict(),
              "set_meta": {k: v for k, v in E.meta.items() if k != "schedule"}, "seed": master.as_dict()}
    complete = True
    if cfg.estimators.estimate == "profile":
        report["profile"] = _profile_report(cfg, E, mu)
        estimate = report["profile"]["estimate"]
        se = report["profile"]["std_error"]
        replicas = []
    else:
        replicas = []
        for i in range(cfg.replication):
            if budget is not None and time.monotonic() - start > budget:
                complete = False
                break
            try:
                replicas.append(_replica_estimates(cfg, E, mu, master.child(i)))
            except ParameterError as exc:
                raise ParameterError(f"[{cfg.case_id}] replica {i}: {exc}") from None
        key = _estimate_key(cfg.estimators)
        vals = np.array([r[key] for r in replicas]) if replicas else np.array([np.nan])
        estimate = float(np.mean(vals))
        se = float(np.std(vals, ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else float("nan")
        report["replicas"] = replicas
        report["estimator"] = key
    report["estimate"] = estimate
    report["std_error"] = se
    report["complete"] = complete
    report["replicas_done"] = len(replicas)
    if write:
        d = _case_dir(cfg, out)
        with open(os.path.join(d, "config.ini"), "w", encoding="utf-8") as fh:
            fh.write(cfg.to_ini())
        with open(os.path.join(d, "report.json"), "w", encoding="utf-8") as fh:
            fh.write(_dump(report))
        emit_plot_data(report, d)
    return report


def run_probe(config: ExperimentConfig, out: str | None = None, write: bool = True):
    p: ProbeSpec = config.probe
    seed = Seed(config.seed)
    if p.condition == "C1":
        rep = probe_c1(config.field, p.parameter, reps=p.reps, seed=seed)
    elif p.condition == "C2":
        rep = probe_c2(config.field, p.parameter, pair_count=p.pairs, reps=p.reps, seed=seed)
    else:
        rep = fourier_c2_criterion(config.field, p.parameter, pairs=p.pairs, mc_reps=p.reps, seed=seed)
    if write:
        d = _case_dir(config, out)
        with open(os.path.join(d, "probe.json"), "w", encoding="utf-8") as fh:
            fh.write(rep.to_json() + "\n")
        emit_plot_data({"probe": rep.as_dict()}, d)
    return rep


# --------------------------------------------------------------------------
# plot data


def _two_col(path: str, header: tuple[str, str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for a, b in rows:
            w.writerow([repr(float(a)), repr(float(b))])


def emit_plot_data(report: dict, directory: str) -> list[str]:
    """Two-column text files for every curve found in a report."""
    os.makedirs(directory, exist_ok=True)
    written = []
    for i, rep in enumerate(report.get("replicas", [])):
        c = rep.get("counts")
        if c:
            p = os.path.join(directory, f"counts_{i}.csv")
            _two_col(p, ("log_inv_eps", "log_count"), zip(c["log_inv_eps"], c["log_counts"]))
            written.append(p)
    prof = report.get("profile")
    if prof:
        p = os.path.join(directory, "profile.csv")
        _two_col(p, ("s", "Dim_s"), zip(prof["curve"]["s"], prof["curve"]["value"]))
        written.append(p)
    probe = report.get("probe")
    if probe:
        for name, curve in sorted(probe["curves"].items()):
            pts = [(math.log(x), math.log(y)) for x, y in zip(curve["x"], curve["y"]) if x > 0 and y > 0]
            safe = name.replace("=", "_")
            p = os.path.join(directory, f"tail_{safe}.csv")
            _two_col(p, ("log_x", "log_tail"), pts)
            written.append(p)
    return written


# --------------------------------------------------------------------------
# verification suite


@dataclass(frozen=True)
class VerificationCase:
    case_id: str
    tag: str
    predicted: float
    provenance: str
    estimate: float
    std_error: float
    tolerance: float
    passed: bool
    complete: bool = True
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        ok = bool(abs(self.estimate - self.predicted) <= self.tolerance)
        if ok != self.passed:
            raise ParameterError("pass flag must equal |estimate - predicted| <= tolerance")

    def as_dict(self) -> dict:
        return asdict(self)

    def line(self) -> str:
        flag = "PASS" if self.passed and self.complete else "FAIL"
        extra = "" if self.complete else " (incomplete)"
        return (f"{flag} {self.case_id} [{self.tag}] estimate={self.estimate:.3f} "
                f"predicted={self.predicted:.3f} tol={self.tolerance:.2f}{extra}")


def _cfg(case_id, tag, field_spec, set_spec=SetSpec(), estimate="box", replication=8, tolerance=0.0,
         **est):
    return ExperimentConfig(case_id=case_id, field=field_spec, set=set_spec,
                            estimators=EstimatorSpec(estimate=estimate, **est), tag=tag,
                            replication=replication, seed=20240601, tolerance=tolerance)


_CANTOR = SetSpec(kind="cantor", m=2, r=1 / 3, depth=12)
_TWO_PHASE = SetSpec(kind="two_phase", m=2, r=1 / 3, m_b=2, r_b=0.5, growth=3, depth=18, first="B")

SUITE: dict[str, ExperimentConfig] = {c.case_id: c for c in [
    _cfg("bg60-bm-plane", "BG60", FieldSpec("fbm", H=0.5, d=2, grid_n=2**17)),
    _cfg("bg60-fbm08-plane", "BG60", FieldSpec("fbm", H=0.8, d=2, grid_n=2**17)),
    _cfg("bg60-cantor-plane", "BG60", FieldSpec("fbm", H=0.5, d=2, grid_n=2**20), _CANTOR),
    _cfg("setresult-cantor-line", "setResult", FieldSpec("fbm", H=0.5, d=1, grid_n=2**20), _CANTOR,
         "upper_box", tolerance=0.10),
    _cfg("cor46-cantor-plane", "corollary46", FieldSpec("fbm", H=0.5, d=2, grid_n=2**20), _CANTOR, "upper_box"),
    _cfg("cor46-twophase-plane", "corollary46", FieldSpec("fbm", H=0.6, d=2, grid_n=2**22), _TWO_PHASE,
         "upper_box", replication=4),
    _cfg("stable-lfsm-line", "stable", FieldSpec("lfsm", H=0.8, alpha=1.5, d=1, grid_n=2**14),
         tolerance=0.10),
    _cfg("stable-lfsm-plane", "stable", FieldSpec("lfsm", H=0.8, alpha=1.5, d=2, grid_n=2**14)),
    _cfg("rosenblatt-line", "rosenblatt", FieldSpec("rosenblatt", kappa=0.35, d=1, grid_n=2**11)),
    _cfg("hdim-measure-bm-line", "Hdim-measure", FieldSpec("fbm", H=0.5, d=1, grid_n=2**17),
         estimate="measure_lower", replication=4),
    _cfg("pdim-measure-cantor-line", "Pdim-measure", FieldSpec("fbm", H=0.5, d=1, grid_n=2**20), _CANTOR,
         "measure_upper", replication=4),
]}


def suite_case(case_id: str) -> ExperimentConfig:
    if case_id not in SUITE:
        raise ParameterError(f"unknown case {case_id!r}; known: {', '.join(sorted(SUITE))}")
    return SUITE[case_id]


def verify_theorem(case, budget: float | None = None, seed: int | None = None, out: str | None = None,
                   write: bool = False) -> VerificationCase:
    """Run a suite case (id or config) and compare with its closed-form prediction."""
    cfg = suite_case(case) if isinstance(case, str) else case
    if seed is not None:
        cfg = cfg.with_seed(seed)
    E, _ = build_set(cfg.set, cfg.field.grid_n)  # rejects empty E before any simulation
    predicted, provenance = predict(_prediction_input(cfg, E))
    report = run_experiment(cfg, out=out, budget=budget, write=write)
    tol = default_tolerance(cfg, predicted)
    est = report["estimate"]
    passed = bool(math.isfinite(est) and abs(est - predicted) <= tol)
    details = {"replicas_done": report["replicas_done"], "estimator": report.get("estimator"),
               "seed": cfg.seed, "set_depth": E.meta.get("depth"),
               "digest": hashlib.sha256(_dump(report).encode()).hexdigest()}
    if report.get("replicas"):
        for key in ("box", "lower_box", "upper_box", "hausdorff", "measure_lower", "measure_upper"):
            if key in report["replicas"][0]:
                details[f"mean_{key}"] = float(np.mean([r[key] for r in report["replicas"]]))
    return VerificationCase(cfg.case_id, cfg.tag, predicted, provenance, est if math.isfinite(est) else float("nan"),
                            report["std_error"], tol, passed, report["complete"], details)
