"""Experiment configuration: sectioned key-value files parsed strictly.

Unknown sections or keys are errors, so a typo never silently falls back to a
default.
"""
from __future__ import annotations

import configparser
import io
from dataclasses import asdict, dataclass, field, fields, replace

from .errors import ParameterError
from .fields import LAWS, FieldSpec

__all__ = [
    "ConfigError",
    "SetSpec",
    "MeasureSpec",
    "EstimatorSpec",
    "ProbeSpec",
    "ExperimentConfig",
    "load_config",
    "parse_config",
    "TAGS",
]

TAGS = ("BG60", "Hdim-measure", "Pdim-measure", "setResult", "corollary46", "stable", "rosenblatt")


class ConfigError(ParameterError):
    """Malformed or inconsistent configuration."""


@dataclass(frozen=True)
class SetSpec:
    kind: str = "interval"  # interval | cantor | two_phase | point | empty
    m: int = 2
    r: float = 1 / 3
    depth: int = 12
    m_b: int = 2
    r_b: float = 0.5
    growth: int = 3
    first: str = "B"
    point: float = 0.0

    def __post_init__(self):
        if self.kind not in ("interval", "cantor", "two_phase", "point", "empty"):
            raise ConfigError(f"unknown set kind {self.kind!r}")
        if self.first not in ("A", "B"):
            raise ConfigError("first must be 'A' or 'B'")


@dataclass(frozen=True)
class MeasureSpec:
    kind: str = "natural"  # natural | point

    def __post_init__(self):
        if self.kind not in ("natural", "point"):
            raise ConfigError(f"unknown measure kind {self.kind!r}")


@dataclass(frozen=True)
class EstimatorSpec:
    estimate: str = "box"  # box | upper_box | hausdorff | measure_lower | measure_upper | profile
    n_probe: int = 200
    quantile_low: float = 0.05
    quantile_high: float = 0.95
    radii_min: float = 0.0  # 0 = default radii
    radii_max: float = 0.0
    profile_s: float = 0.0  # 0 = H·d
    s_points: int = 32

    def __post_init__(self):
        if self.estimate not in ("box", "upper_box", "hausdorff", "measure_lower", "measure_upper", "profile"):
            raise ConfigError(f"unknown estimate {self.estimate!r}")
        if not 0 < self.quantile_low < self.quantile_high < 1:
            raise ConfigError("need 0 < quantile_low < quantile_high < 1")
        if self.n_probe < 10:
            raise ConfigError("n_probe must be >= 10")


@dataclass(frozen=True)
class ProbeSpec:
    condition: str = "C1"  # C1 | C2 | C2-fourier
    parameter: float = 0.5
    reps: int = 10_000
    pairs: int = 8

    def __post_init__(self):
        if self.condition not in ("C1", "C2", "C2-fourier"):
            raise ConfigError(f"unknown condition {self.condition!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    case_id: str
    field: FieldSpec
    set: SetSpec = SetSpec()
    measure: MeasureSpec = MeasureSpec()
    estimators: EstimatorSpec = EstimatorSpec()
    probe: ProbeSpec = ProbeSpec()
    tag: str = "BG60"
    replication: int = 4
    seed: int = 0
    out: str = "runs"
    tolerance: float = 0.0  # 0 = class default

    def __post_init__(self):
        if not self.case_id or any(c in self.case_id for c in "/\\ "):
            raise ConfigError("case id must be a non-empty token without spaces or slashes")
        if self.replication < 1:
            raise ParameterError("replication must be >= 1")
        if self.tag not in TAGS:
            raise ConfigError(f"unknown theorem tag {self.tag!r}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return replace(self, seed=int(seed))

    def as_dict(self) -> dict:
        return asdict(self)

    def to_ini(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        cp["case"] = {"id": self.case_id, "tag": self.tag, "replication": str(self.replication),
                      "seed": str(self.seed), "out": self.out, "tolerance": repr(self.tolerance)}
        cp["field"] = {k: _fmt(v) for k, v in self.field.as_dict().items() if v is not None}
        for name in ("set", "measure", "estimators", "probe"):
            cp[name] = {k: _fmt(v) for k, v in asdict(getattr(self, name)).items()}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, (list, tuple)):
        return ",".join(repr(float(x)) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


_CASE_KEYS = {"id": str, "tag": str, "replication": int, "seed": int, "out": str, "tolerance": float}
_FIELD_KEYS = {"law": str, "H": float, "alpha": float, "kappa": float, "d": int, "grid_n": int,
               "burn_in": float, "lepage_K": int, "window": "pair", "scale": float}


def _convert(section: str, key: str, raw: str, kind):
    try:
        if kind == "pair":
            lo, hi = (float(x) for x in raw.split(","))
            return (lo, hi)
        if kind is int:
            return int(raw, 0)
        if kind is float:
            return float(raw)
        return raw.strip()
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from None


def _section(cp, name: str, keys: dict) -> dict:
    if not cp.has_section(name):
        return {}
    out = {}
    for key, raw in cp.items(name):
        if key not in keys:
            raise ConfigError(f"unknown key {key!r} in section [{name}]")
        out[key] = _convert(name, key, raw, keys[key])
    return out


def _keys_of(cls) -> dict:
    return {f.name: {"int": int, "float": float, "str": str}[f.type] for f in fields(cls)}


def parse_config(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None, strict=True)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    known = {"case", "field", "set", "measure", "estimators", "probe"}
    for sec in cp.sections():
        if sec not in known:
            raise ConfigError(f"unknown section [{sec}]")
    case = _section(cp, "case", _CASE_KEYS)
    if "id" not in case:
        raise ConfigError("[case] id is required")
    fld = _section(cp, "field", _FIELD_KEYS)
    if "law" not in fld:
        raise ConfigError("[field] law is required")
    if fld["law"] not in LAWS:
        raise ConfigError(f"unknown law {fld['law']!r}")
    try:
        field_spec = FieldSpec(**fld)
        parts = {name: cls(**_section(cp, name, _keys_of(cls)))
                 for name, cls in (("set", SetSpec), ("measure", MeasureSpec),
                                   ("estimators", EstimatorSpec), ("probe", ProbeSpec))}
        return ExperimentConfig(case_id=case.pop("id"), field=field_spec, **parts, **case)
    except ConfigError:
        raise
    except (ParameterError, TypeError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
