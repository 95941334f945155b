#!/usr/bin/env python3
"""
Experiment Configuration
System constants, PDD schedule parameters and experiment settings, loaded
from a YAML file with optional `system`, `pdd` and `experiment` sections.
Every key is optional; omitted keys take the simulation defaults.

    system:
      N: 40
      Pt_dbm: 20
    pdd:
      c: 0.8
    experiment:
      schemes: [CoupledPdd, IndependentStar]
      realizations: 20
"""

import dataclasses
import logging
import math
import typing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import yaml

from .errors import ConfigError

logger = logging.getLogger(__name__)

ALL_SCHEMES: Tuple[str, ...] = (
    "CoupledPdd",
    "CoupledAo",
    "PsPscT",
    "PsPscR",
    "IndependentStar",
    "ConventionalRis",
)


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def dbm_to_watts(value_dbm: float) -> float:
    return 10.0 ** ((value_dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class SystemConfig:
    """Geometry, propagation and power constants of the simulated link"""

    M: int = 8
    N: int = 20
    K: int = 6
    Pt_dbm: float = 20.0
    noise_dbm: float = -110.0
    rician_db: float = 3.0
    path_loss_exponent: float = 2.2
    pl0_db: float = 30.0
    bs_distance_m: float = 50.0
    bs_angle_deg: float = 20.0
    user_radius_m: float = 3.0
    seed: int = 0

    def __post_init__(self):
        for name in ("M", "N", "K"):
            if getattr(self, name) < 1:
                raise ConfigError(f"system.{name} must be >= 1, got {getattr(self, name)}")
        if self.K % 2:
            raise ConfigError(f"system.K must be even (half the users per side), got {self.K}")
        for name in ("Pt_dbm", "noise_dbm", "path_loss_exponent", "pl0_db",
                     "bs_distance_m", "bs_angle_deg", "user_radius_m"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"system.{name} must be finite")
        if math.isnan(self.rician_db):
            raise ConfigError("system.rician_db must not be NaN")
        if self.bs_distance_m <= 0 or self.user_radius_m <= 0:
            raise ConfigError("system distances must be positive")

    @property
    def pt_watts(self) -> float:
        return dbm_to_watts(self.Pt_dbm)

    @property
    def noise_watts(self) -> float:
        return dbm_to_watts(self.noise_dbm)

    @property
    def kappa(self) -> float:
        if self.rician_db == math.inf:
            return math.inf
        # 10 ** (-inf) is 0.0, i.e. Rayleigh fading
        return db_to_linear(self.rician_db)


@dataclass(frozen=True)
class PddConfig:
    """Penalty/dual schedule and loop limits"""

    rho0: float = 1.0
    c: float = 0.8
    eta0: float = 1e-3
    threshold: float = 1e-6
    inner_tol: float = 1e-4
    inner_max_iter: int = 50
    outer_max_iter: int = 200
    guard_tol: float = 1e-9

    def __post_init__(self):
        if not self.rho0 > 0:
            raise ConfigError(f"pdd.rho0 must be > 0, got {self.rho0}")
        if not 0 < self.c < 1:
            raise ConfigError(f"pdd.c must lie in (0, 1), got {self.c}")
        if not (self.eta0 > 0 and self.threshold > 0 and self.inner_tol > 0):
            raise ConfigError("pdd tolerances must be positive")
        if self.inner_max_iter < 1 or self.outer_max_iter < 1:
            raise ConfigError("pdd iteration caps must be >= 1")
        if self.guard_tol < 0:
            raise ConfigError("pdd.guard_tol must be >= 0")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a convergence or sweep run needs"""

    system: SystemConfig = field(default_factory=SystemConfig)
    pdd: PddConfig = field(default_factory=PddConfig)
    schemes: Tuple[str, ...] = ALL_SCHEMES
    n_values: Tuple[int, ...] = (10, 20, 30, 40)
    k_values: Tuple[int, ...] = (6,)
    convergence_k_values: Tuple[int, ...] = (2, 4, 6)
    realizations: int = 20
    output: str = "results"
    workers: int = 1
    ao_levels: Tuple[int, int] = (11, 16)

    def __post_init__(self):
        if not self.schemes:
            raise ConfigError("experiment.schemes must not be empty")
        unknown = [s for s in self.schemes if s not in ALL_SCHEMES]
        if unknown:
            raise ConfigError(
                f"experiment.schemes: unknown scheme(s) {unknown}; expected any of {list(ALL_SCHEMES)}"
            )
        if not self.n_values:
            raise ConfigError("experiment.n_values must not be empty")
        if any(n < 1 for n in self.n_values):
            raise ConfigError("experiment.n_values must be >= 1")
        if not self.k_values or any(k < 2 or k % 2 for k in self.k_values):
            raise ConfigError("experiment.k_values must be non-empty, even and >= 2")
        if not self.convergence_k_values or any(k < 2 or k % 2 for k in self.convergence_k_values):
            raise ConfigError("experiment.convergence_k_values must be non-empty, even and >= 2")
        if self.realizations < 1:
            raise ConfigError(f"experiment.realizations must be >= 1, got {self.realizations}")
        if self.workers < 1:
            raise ConfigError(f"experiment.workers must be >= 1, got {self.workers}")
        if len(self.ao_levels) != 2 or min(self.ao_levels) < 2:
            raise ConfigError("experiment.ao_levels must be two integers >= 2")

    @property
    def seed(self) -> int:
        return self.system.seed

    @property
    def output_path(self) -> Path:
        return Path(self.output)

    def with_overrides(self, **overrides: Any) -> "ExperimentConfig":
        """Apply CLI overrides; None values are ignored, `seed`/`N`/`K` go to system"""
        system_updates = {}
        for key in ("seed", "N", "K", "M"):
            value = overrides.pop(key, None)
            if value is not None:
                system_updates[key] = value
        updates = {k: v for k, v in overrides.items() if v is not None}
        for key in ("schemes", "n_values", "k_values", "convergence_k_values"):
            if key in updates:
                updates[key] = tuple(updates[key])
        system = dataclasses.replace(self.system, **system_updates)
        return dataclasses.replace(self, system=system, **updates)


SECTIONS = {
    "system": SystemConfig,
    "pdd": PddConfig,
    "experiment": ExperimentConfig,
}

_NESTED = {"system", "pdd"}


def _key_lines(text: str) -> Dict[str, int]:
    """Map 'section' and 'section.key' to 1-based line numbers"""
    lines: Dict[str, int] = {}
    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return lines
    if not isinstance(root, yaml.MappingNode):
        return lines
    for section_node, body in root.value:
        section = str(section_node.value)
        lines[section] = section_node.start_mark.line + 1
        if isinstance(body, yaml.MappingNode):
            for key_node, _ in body.value:
                lines[f"{section}.{key_node.value}"] = key_node.start_mark.line + 1
    return lines


def _coerce_scalar(qualified: str, value: Any, target: type) -> Any:
    if target is float:
        if isinstance(value, bool):
            raise ValueError
        if isinstance(value, (int, float)):
            return float(value)
        if isinstance(value, str):
            return float(value)
        raise ValueError
    if target is int:
        if isinstance(value, bool):
            raise ValueError
        if isinstance(value, int):
            return value
        if isinstance(value, float) and value.is_integer():
            return int(value)
        if isinstance(value, str):
            return int(value)
        raise ValueError
    if target is str:
        if isinstance(value, (str, int, float)) and not isinstance(value, bool):
            return str(value)
        raise ValueError
    raise ValueError


def _coerce(qualified: str, value: Any, annotation: Any, path: str, line: Optional[int]) -> Any:
    type_name = getattr(annotation, "__name__", str(annotation))
    try:
        origin = getattr(annotation, "__origin__", None)
        if origin in (tuple, Tuple):
            args = annotation.__args__
            item_type = args[0]
            if not isinstance(value, (list, tuple)):
                value = [value]
            items = tuple(_coerce_scalar(qualified, v, item_type) for v in value)
            if len(args) == 2 and args[1] is not Ellipsis and len(items) != 2:
                raise ValueError
            return items
        return _coerce_scalar(qualified, value, annotation)
    except (TypeError, ValueError):
        raise ConfigError(
            f"{qualified}: expected {type_name}, got {value!r}", path=path, line=line
        )


def _build_section(
    section: str, body: Any, path: str, lines: Dict[str, int]
) -> Dict[str, Any]:
    if body is None:
        return {}
    if not isinstance(body, dict):
        raise ConfigError(
            f"section '{section}' must be a mapping", path=path, line=lines.get(section)
        )

    cls = SECTIONS[section]
    fields = {f.name: f for f in dataclasses.fields(cls) if f.name not in _NESTED}
    hints = typing.get_type_hints(cls)
    values = {}
    for key, value in body.items():
        key = str(key)
        qualified = f"{section}.{key}"
        if key not in fields:
            raise ConfigError(
                f"unknown key '{qualified}'; expected one of {sorted(fields)}",
                path=path,
                line=lines.get(qualified),
            )
        values[key] = _coerce(qualified, value, hints[key], path, lines.get(qualified))
    return values


def parse_config(text: str, path: str = "<string>") -> ExperimentConfig:
    """Parse configuration text; empty text yields all defaults"""
    try:
        document = yaml.safe_load(text) if text.strip() else None
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        problem = getattr(e, "problem", None) or str(e)
        raise ConfigError(f"YAML parse error: {problem}", path=path, line=line)

    if document is None:
        document = {}
    if not isinstance(document, dict):
        raise ConfigError("top level must be a mapping of sections", path=path, line=1)

    lines = _key_lines(text)
    for section in document:
        if section not in SECTIONS:
            raise ConfigError(
                f"unknown section '{section}'; expected one of {sorted(SECTIONS)}",
                path=path,
                line=lines.get(str(section)),
            )

    system_values = _build_section("system", document.get("system"), path, lines)
    pdd_values = _build_section("pdd", document.get("pdd"), path, lines)
    experiment_values = _build_section("experiment", document.get("experiment"), path, lines)

    try:
        system = SystemConfig(**system_values)
        pdd = PddConfig(**pdd_values)
        config = ExperimentConfig(system=system, pdd=pdd, **experiment_values)
    except ConfigError as e:
        raise ConfigError(str(e), path=path)

    logger.debug(f"Loaded configuration from {path}: {config}")
    return config


def load_config(path: Optional[Union[str, Path]] = None) -> ExperimentConfig:
    """Load an ExperimentConfig from a YAML file (None -> defaults)"""
    if path is None:
        return ExperimentConfig()
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read configuration: {e}", path=str(path))
    return parse_config(text, path=str(path))
