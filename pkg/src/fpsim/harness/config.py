"""Experiment configuration: flat dotted-key YAML files."""

from __future__ import annotations

import dataclasses
import hashlib
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional

import yaml

from fpsim.errors import ConfigError, FpsimError
from fpsim.geometry.base import GridKind, Region, TrainingGrid
from fpsim.geometry.grids import generate_hex_grid, generate_square_grid, grid_for_count
from fpsim.placement.planner import PlacementMethod
from fpsim.propagation.base import Anchor, Cost231Params, FloorPlan, RssModel
from fpsim.propagation.loader import (
    MODEL_NAMES,
    default_anchors,
    default_office_plan,
    get_model,
    load_anchors,
    load_floorplan,
)

BOTH_MEASUREMENTS = "measurements.both"


def _float(value: Any) -> float:
    if isinstance(value, bool):
        raise ValueError("expected a number, got a boolean")
    return float(value)


def _positive(value: Any) -> float:
    v = _float(value)
    if not v > 0:
        raise ValueError(f"must be positive, got {v}")
    return v


def _non_negative(value: Any) -> float:
    v = _float(value)
    if v < 0:
        raise ValueError(f"must be >= 0, got {v}")
    return v


def _int(value: Any) -> int:
    if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
        raise ValueError(f"expected an integer, got {value!r}")
    return int(value)


def _count(value: Any) -> int:
    v = _int(value)
    if v < 1:
        raise ValueError(f"must be >= 1, got {v}")
    return v


def _optional_count(value: Any) -> Optional[int]:
    return None if value in (None, "", "none") else _count(value)


def _bool(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("true", "yes", "1", "on"):
        return True
    if text in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected true/false, got {value!r}")


def _path(value: Any) -> Optional[str]:
    return None if value in (None, "", "none") else str(value)


def _model(value: Any) -> str:
    text = str(value).strip().lower()
    if text not in MODEL_NAMES:
        raise ValueError(f"expected one of {', '.join(MODEL_NAMES)}, got {value!r}")
    return text


def _grid_kind(value: Any) -> str:
    kind = GridKind.parse(str(value))
    if kind == GridKind.SURVEYED:
        raise ValueError("surveyed grids come from traces, not experiment configs")
    return kind.value


def _placement(value: Any) -> str:
    text = str(value).strip().lower()
    if text in ("none", "", "0"):
        return "none"
    method, sep, count = text.partition(":")
    if not sep:
        raise ValueError(f"expected 'none', 'voronoi:N' or 'random:N', got {value!r}")
    PlacementMethod.parse(method)
    _count(count)
    return f"{method}:{int(count)}"


def _values(value: Any) -> tuple[Any, ...]:
    if value is None:
        return ()
    if isinstance(value, (list, tuple)):
        items = list(value)
    else:
        items = [v.strip() for v in str(value).split(",") if v.strip()]
    if any(isinstance(v, (dict, list)) for v in items):
        raise ValueError("sweep values must be scalars")
    return tuple(items)


# dotted key -> (attribute, parser)
KEYS: dict[str, tuple[str, Callable[[Any], Any]]] = {
    "region.width": ("region_width", _positive),
    "region.height": ("region_height", _positive),
    "anchors.file": ("anchors_file", _path),
    "anchors.tx_power": ("tx_power", _float),
    "floorplan.file": ("floorplan_file", _path),
    "propagation.model": ("model", _model),
    "propagation.lc": ("lc", _float),
    "propagation.gamma": ("gamma", _float),
    "propagation.l_w": ("l_w", _float),
    "propagation.sigma": ("sigma", _non_negative),
    "propagation.alpha": ("alpha", _positive),
    "propagation.noise_floor": ("noise_floor", _non_negative),
    "propagation.quant_noise_var": ("quant_noise_var", _positive),
    "grid.kind": ("grid_kind", _grid_kind),
    "grid.spacing": ("grid_spacing", _positive),
    "grid.count": ("grid_count", _optional_count),
    "grid.seed": ("grid_seed", _int),
    "measurements.training": ("m_training", _count),
    "measurements.runtime": ("m_runtime", _count),
    "matcher.k": ("k", _count),
    "matcher.weighted": ("weighted", _bool),
    "run.trials": ("trials", _count),
    "run.seed": ("seed", _int),
    "targets.exclude_walls": ("exclude_walls", _bool),
    "targets.wall_margin": ("wall_margin", _non_negative),
    "placement.added": ("placement", _placement),
    "placement.seed": ("placement_seed", _int),
    "spatial.trials": ("spatial_trials", _count),
    "spatial.anchor_count": ("spatial_anchor_count", _optional_count),
    "sweep.name": ("sweep_name", _path),
    "sweep.values": ("sweep_values", _values),
}

SWEEPABLE = (
    "grid.kind",
    "grid.spacing",
    "grid.count",
    "measurements.training",
    "measurements.runtime",
    BOTH_MEASUREMENTS,
    "propagation.gamma",
    "propagation.l_w",
    "propagation.sigma",
    "propagation.alpha",
    "matcher.k",
    "matcher.weighted",
    "placement.added",
    "anchors.tx_power",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Every knob of a simulation run, with simulation-protocol defaults."""
    region_width: float = 30.0
    region_height: float = 18.0
    anchors_file: Optional[str] = None
    tx_power: float = 20.0
    floorplan_file: Optional[str] = None
    model: str = "cost231"
    lc: float = 53.73
    gamma: float = 1.64
    l_w: float = 4.51
    sigma: float = 2.0
    alpha: float = 2.0
    noise_floor: float = 0.0
    quant_noise_var: float = 1e-6
    grid_kind: str = "hexagonal"
    grid_spacing: float = 3.0
    grid_count: Optional[int] = None
    grid_seed: int = 0
    m_training: int = 1
    m_runtime: int = 1
    k: int = 3
    weighted: bool = False
    trials: int = 10_000
    seed: int = 0
    exclude_walls: bool = False
    wall_margin: float = 0.1
    placement: str = "none"
    placement_seed: int = 0
    spatial_trials: int = 20
    spatial_anchor_count: Optional[int] = None
    sweep_name: Optional[str] = None
    sweep_values: tuple[Any, ...] = ()
    base_dir: str = field(default=".", compare=False)

    # ------------------------------------------------------------------
    # Construction
    # ------------------------------------------------------------------

    @classmethod
    def from_mapping(cls, data: dict[str, Any], base_dir: str | Path = ".") -> ExperimentConfig:
        """Build a config from a flat ``{dotted.key: value}`` mapping."""
        values: dict[str, Any] = {}
        for key, raw in data.items():
            if isinstance(raw, dict):
                raise ConfigError("nested mappings are not allowed; use dotted keys", key=str(key))
            attr, parser = cls._lookup(str(key))
            values[attr] = cls._parse(str(key), parser, raw)
        config = cls(base_dir=str(base_dir), **values)
        config.validate()
        return config

    @staticmethod
    def _lookup(key: str) -> tuple[str, Callable[[Any], Any]]:
        if key not in KEYS:
            raise ConfigError("unknown configuration key", key=key)
        return KEYS[key]

    @staticmethod
    def _parse(key: str, parser: Callable[[Any], Any], raw: Any) -> Any:
        try:
            return parser(raw)
        except (ValueError, TypeError, FpsimError) as e:
            raise ConfigError(str(e), key=key) from None

    def with_value(self, key: str, value: Any) -> ExperimentConfig:
        """Copy with one dotted key overridden (``measurements.both`` sets m and m')."""
        if key == BOTH_MEASUREMENTS:
            m = self._parse(key, _count, value)
            return dataclasses.replace(self, m_training=m, m_runtime=m)
        attr, parser = self._lookup(key)
        return dataclasses.replace(self, **{attr: self._parse(key, parser, value)})

    def validate(self) -> None:
        for key, attr in (("anchors.file", self.anchors_file), ("floorplan.file", self.floorplan_file)):
            if attr is not None and not self.resolve(attr).exists():
                raise ConfigError(f"file not found: {attr}", key=key)
        if self.sweep_name is not None:
            if self.sweep_name not in SWEEPABLE:
                raise ConfigError(
                    f"'{self.sweep_name}' cannot be swept; valid: {', '.join(SWEEPABLE)}", key="sweep.name"
                )
            if not self.sweep_values:
                raise ConfigError("sweep values must be non-empty", key="sweep.values")
        elif self.sweep_values:
            raise ConfigError("sweep values given without sweep.name", key="sweep.values")
        for label, config in self.sweep():
            if config.grid_kind == GridKind.RANDOM.value and config.grid_count is None:
                where = "" if self.sweep_name is None else f" (sweep value {label})"
                raise ConfigError(f"random grids need grid.count{where}", key="grid.count")

    def to_mapping(self) -> dict[str, Any]:
        """Flat dotted-key mapping of every set value."""
        out: dict[str, Any] = {}
        for key, (attr, _) in KEYS.items():
            value = getattr(self, attr)
            if value is None or value == ():
                continue
            out[key] = list(value) if isinstance(value, tuple) else value
        return out

    def digest(self) -> str:
        """Short hash of every set value except ``run.seed``."""
        mapping = {k: v for k, v in self.to_mapping().items() if k != "run.seed"}
        text = yaml.safe_dump(mapping, default_flow_style=True, sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()[:12]

    # ------------------------------------------------------------------
    # Derived objects
    # ------------------------------------------------------------------

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else Path(self.base_dir) / p

    def sweep(self) -> list[tuple[str, ExperimentConfig]]:
        """``(label, config)`` per sweep value; a single ``default`` row without a sweep."""
        if self.sweep_name is None:
            return [("default", self)]
        return [(str(v), self.with_value(self.sweep_name, v)) for v in self.sweep_values]

    def region(self) -> Region:
        return Region.from_size(self.region_width, self.region_height)

    def base_anchors(self) -> list[Anchor]:
        if self.anchors_file:
            return load_anchors(self.resolve(self.anchors_file))
        return default_anchors(self.region(), self.tx_power)

    def floorplan(self) -> FloorPlan:
        if self.floorplan_file:
            return load_floorplan(self.resolve(self.floorplan_file))
        return default_office_plan(self.region())

    def placement_request(self) -> Optional[tuple[PlacementMethod, int]]:
        if self.placement == "none":
            return None
        method, _, count = self.placement.partition(":")
        return PlacementMethod.parse(method), int(count)

    def rss_model(self) -> RssModel:
        return get_model(
            self.model,
            cost231=Cost231Params(lc=self.lc, gamma=self.gamma, l_w=self.l_w, sigma=self.sigma),
            plan=self.floorplan(),
            alpha=self.alpha,
            noise_floor=self.noise_floor,
            quant_noise_var=self.quant_noise_var,
        )

    def grid(self) -> TrainingGrid:
        kind = GridKind.parse(self.grid_kind)
        region = self.region()
        if self.grid_count is not None:
            return grid_for_count(kind, region, self.grid_count, self.grid_seed)
        if kind == GridKind.SQUARE:
            return generate_square_grid(region, self.grid_spacing)
        if kind == GridKind.HEXAGONAL:
            return generate_hex_grid(region, self.grid_spacing)
        raise ConfigError(f"{kind.value} grids need grid.count", key="grid.count")


def load_config(path: str | Path | None, **overrides: Any) -> ExperimentConfig:
    """Read a YAML config file (or defaults when ``path`` is None).

    ``overrides`` are attribute-level replacements such as ``seed=7``;
    None values are ignored.
    """
    if path is None:
        config = ExperimentConfig()
    else:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            with open(path) as f:
                data = yaml.safe_load(f) or {}
        except (yaml.YAMLError, OSError) as e:
            raise ConfigError(f"cannot read {path}: {e}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path} must contain a mapping of dotted keys")
        config = ExperimentConfig.from_mapping(data, base_dir=path.parent)
    updates = {k: v for k, v in overrides.items() if v is not None}
    if updates:
        config = dataclasses.replace(config, **updates)
        config.validate()
    return config


def save_config(config: ExperimentConfig, path: str | Path) -> None:
    """Write the flat mapping atomically."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as f:
            yaml.safe_dump(config.to_mapping(), f, default_flow_style=False, sort_keys=False)
        os.replace(tmp_path, path)
    except BaseException:
        try:
            os.unlink(tmp_path)
        except OSError:
            pass
        raise
