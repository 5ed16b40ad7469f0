"""Run configuration: a YAML key-tree plus flag overrides (flags win)."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace

import yaml

from .errors import ConfigError

__all__ = ["RunConfig", "SystemConfig", "WindowConfig", "SeriesConfig",
           "QuadratureConfig", "FieldlineConfig", "TopologyConfig", "load_config"]


@dataclass(frozen=True)
class SystemConfig:
    potential: str = "morse"      # morse | harmonic
    D: float = 3.0
    a: float = 1.0 / math.sqrt(6.0)
    x0: float = 0.0
    omega: float = 1.0
    M: float = 1.0
    hbar: float = 1.0


@dataclass(frozen=True)
class WindowConfig:
    x_min: float = -3.0
    x_max: float = 6.0
    n_x: int = 201
    p_min: float = -3.0
    p_max: float = 3.0
    n_p: int = 201


@dataclass(frozen=True)
class SeriesConfig:
    l_max: int = 25
    rtol: float = 1e-12


@dataclass(frozen=True)
class QuadratureConfig:
    nodes_per_panel: int = 24
    tail_tol: float = 1e-12


@dataclass(frozen=True)
class FieldlineConfig:
    seed_policy: str = "both"     # boundary | axis | both
    rtol: float = 1e-8
    atol: float = 1e-10
    max_step: float = 0.05
    max_steps: int = 20000
    n_boundary: int = 16
    n_axis: int = 9


@dataclass(frozen=True)
class TopologyConfig:
    coarse_n: int = 96
    winding_samples: int = 128


@dataclass(frozen=True)
class RunConfig:
    system: SystemConfig = field(default_factory=SystemConfig)
    n: int = 1
    window: WindowConfig = field(default_factory=WindowConfig)
    series: SeriesConfig = field(default_factory=SeriesConfig)
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    fieldlines: FieldlineConfig = field(default_factory=FieldlineConfig)
    topology: TopologyConfig = field(default_factory=TopologyConfig)
    out_dir: str = "out"

    def validate(self) -> None:
        s, w = self.system, self.window
        if s.potential not in ("morse", "harmonic"):
            raise ConfigError(f"unknown potential {s.potential!r}")
        if s.M <= 0 or s.hbar <= 0:
            raise ConfigError("M and hbar must be positive")
        if s.potential == "morse" and (s.D <= 0 or s.a <= 0):
            raise ConfigError("Morse requires D > 0 and a > 0")
        if s.potential == "harmonic" and s.omega <= 0:
            raise ConfigError("harmonic requires omega > 0")
        if self.n < 0:
            raise ConfigError("state index n must be >= 0")
        if not (w.x_max > w.x_min and w.p_max > w.p_min):
            raise ConfigError("window must have positive extent")
        if w.n_x < 2 or w.n_p < 2:
            raise ConfigError("window resolution must be >= 2 per axis")
        if self.series.l_max < 1 or self.series.rtol < 0:
            raise ConfigError("series: l_max >= 1 and rtol >= 0 required")
        if self.quadrature.nodes_per_panel < 2 or self.quadrature.tail_tol <= 0:
            raise ConfigError("quadrature: nodes_per_panel >= 2 and tail_tol > 0 required")
        if self.fieldlines.seed_policy not in ("boundary", "axis", "both"):
            raise ConfigError(f"unknown seed policy {self.fieldlines.seed_policy!r}")
        if self.fieldlines.rtol <= 0 or self.fieldlines.atol <= 0:
            raise ConfigError("fieldline tolerances must be positive")
        if self.topology.coarse_n < 64:
            raise ConfigError("topology.coarse_n must be >= 64")
        if self.topology.winding_samples < 64:
            raise ConfigError("topology.winding_samples must be >= 64")

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def sha256(self) -> str:
        d = self.to_dict()
        d.pop("out_dir", None)  # where results land does not affect them
        blob = json.dumps(d, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _build(section_cls, data: dict, name: str):
    fields = {f for f in section_cls.__dataclass_fields__}
    unknown = set(data) - fields
    if unknown:
        raise ConfigError(f"unknown keys in {name!r}: {sorted(unknown)}")
    try:
        return section_cls(**data)
    except TypeError as exc:
        raise ConfigError(f"bad section {name!r}: {exc}") from exc


def load_config(path: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Load YAML config (or defaults) and apply flag overrides."""
    data: dict = {}
    if path is not None:
        try:
            with open(path) as fh:
                data = yaml.safe_load(fh) or {}
        except OSError as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"malformed YAML in {path!r}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config root must be a mapping")

    cfg = RunConfig(
        system=_build(SystemConfig, data.get("system", {}), "system"),
        n=int(data.get("state", {}).get("n", 1)) if isinstance(data.get("state", {}), dict)
          else _bad_state(),
        window=_build(WindowConfig, data.get("window", {}), "window"),
        series=_build(SeriesConfig, data.get("series", {}), "series"),
        quadrature=_build(QuadratureConfig, data.get("quadrature", {}), "quadrature"),
        fieldlines=_build(FieldlineConfig, data.get("fieldlines", {}), "fieldlines"),
        topology=_build(TopologyConfig, data.get("topology", {}), "topology"),
        out_dir=str(data.get("output", {}).get("directory", "out")),
    )

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key == "n":
            cfg = replace(cfg, n=int(value))
        elif key == "out_dir":
            cfg = replace(cfg, out_dir=str(value))
        elif key == "l_max":
            cfg = replace(cfg, series=replace(cfg.series, l_max=int(value)))
        elif key == "seed_policy":
            cfg = replace(cfg, fieldlines=replace(cfg.fieldlines, seed_policy=str(value)))
        elif key == "window":
            cfg = replace(cfg, window=_parse_window(value))
        else:
            raise ConfigError(f"unknown override {key!r}")
    cfg.validate()
    return cfg


def _bad_state():
    raise ConfigError("section 'state' must be a mapping with key 'n'")


def _parse_window(text: str) -> WindowConfig:
    """Parse 'X0:X1:NX,P0:P1:NP'."""
    try:
        xs, ps = text.split(",")
        x0, x1, nx = xs.split(":")
        p0, p1, np_ = ps.split(":")
        return WindowConfig(x_min=float(x0), x_max=float(x1), n_x=int(nx),
                            p_min=float(p0), p_max=float(p1), n_p=int(np_))
    except ValueError as exc:
        raise ConfigError(f"bad window spec {text!r}; expected X0:X1:NX,P0:P1:NP") from exc
