from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Callable, Dict, Iterable, Optional, Union

import numpy as np

from .._types import OutputFormat
from ..errors import UsageError
from ..game import GameDefinition, as_joint_action, registry
from ..schedules import DEFAULT_EXPONENTS, ScheduleExponents
from ..utils import parse_number, parse_number_list

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _parse_bool(text: str) -> bool:
    value = text.strip().lower()
    if value in _TRUE:
        return True
    if value in _FALSE:
        return False
    raise UsageError(f"not a boolean: {text!r}")


def _parse_int(text: str) -> int:
    value = parse_number(text)
    if not float(value).is_integer():
        raise UsageError(f"not an integer: {text!r}")
    return int(value)


def _parse_optional_int(text: str) -> Optional[int]:
    if text.strip().lower() in ("", "none", "auto", "default"):
        return None
    return _parse_int(text)


def _parse_mu0(text: str) -> Optional[np.ndarray]:
    if text.strip().lower() in ("", "random"):
        return None
    return np.asarray(parse_number_list(text), dtype=float)


def _parse_format(text: str) -> str:
    value = text.strip().lower()
    allowed = [f.value for f in OutputFormat]
    if value not in allowed:
        raise UsageError(f"format must be one of {allowed}, got {text!r}")
    return value


@dataclass(frozen=True)
class ExperimentConfig:
    """Replicated learner runs. Defaults reproduce the bilinear reference experiment."""

    game: str = "bilinear"
    a: float = DEFAULT_EXPONENTS.a
    b: float = DEFAULT_EXPONENTS.b
    c: float = DEFAULT_EXPONENTS.c
    # None draws mu(0) uniformly from the action box for every replication
    mu0: Optional[np.ndarray] = None
    max_iters: int = 5000
    replications: int = 20
    base_seed: int = 0
    regularized: bool = True
    thinning: Optional[int] = None
    out: str = "."
    format: str = OutputFormat.CSV.value
    allow_invalid_schedule: bool = False

    def __post_init__(self):
        self.game_definition()
        ScheduleExponents(self.a, self.b, self.c)
        if int(self.replications) < 1:
            raise UsageError("replications must be at least 1")
        if int(self.max_iters) < 1:
            raise UsageError("max_iters must be at least 1")
        if int(self.base_seed) < 0:
            raise UsageError("seed must be non-negative")
        if self.thinning is not None and int(self.thinning) < 1:
            raise UsageError("thinning must be a positive integer")
        fmt = self.format.value if isinstance(self.format, OutputFormat) else str(self.format)
        object.__setattr__(self, "format", _parse_format(fmt))
        if self.mu0 is not None:
            object.__setattr__(self, "mu0", as_joint_action(self.game_definition(), self.mu0))

    @property
    def exponents(self) -> ScheduleExponents:
        return ScheduleExponents(self.a, self.b, self.c)

    def game_definition(self) -> GameDefinition:
        return registry(self.game)

    @property
    def out_dir(self) -> Path:
        return Path(self.out)


CONFIG_KEYS: Dict[str, Callable[[str], object]] = {
    "game": lambda v: v.strip(),
    "a": parse_number,
    "b": parse_number,
    "c": parse_number,
    "mu0": _parse_mu0,
    "max_iters": _parse_int,
    "replications": _parse_int,
    "base_seed": _parse_int,
    "regularized": _parse_bool,
    "thinning": _parse_optional_int,
    "out": lambda v: v.strip(),
    "format": _parse_format,
    "allow_invalid_schedule": _parse_bool,
}

_ALIASES = {"seed": "base_seed", "iterations": "max_iters"}


def _split_assignment(text: str, where: str) -> tuple:
    if "=" not in text:
        raise UsageError(f"{where}: expected 'key = value', got {text.strip()!r}")
    key, value = text.split("=", 1)
    key = key.strip().lower().replace("-", "_")
    key = _ALIASES.get(key, key)
    if key == "exponents":
        return key, value
    if key not in CONFIG_KEYS:
        raise UsageError(f"{where}: unknown key {key!r}")
    return key, value


def _convert(key: str, value: str, where: str) -> Dict[str, object]:
    try:
        if key == "exponents":
            parts = parse_number_list(value)
            if len(parts) != 3:
                raise UsageError("exponents needs three values a, b, c")
            return dict(zip("abc", parts))
        return {key: CONFIG_KEYS[key](value)}
    except UsageError as exc:
        raise UsageError(f"{where}: {exc}") from exc


def parse_config_text(text: str, source: str = "config") -> Dict[str, object]:
    """Parses ``key = value`` lines; ``#`` starts a comment."""
    values: Dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}, line {lineno}"
        key, value = _split_assignment(line, where)
        values.update(_convert(key, value, where))
    return values


def apply_overrides(
    config: ExperimentConfig, overrides: Iterable[str]
) -> ExperimentConfig:
    """Applies ``key=value`` strings as given to ``--set``."""
    values: Dict[str, object] = {}
    for item in overrides:
        key, value = _split_assignment(item, "--set")
        values.update(_convert(key, value, "--set"))
    return replace(config, **values) if values else config


def load_config(
    path: Optional[Union[str, Path]] = None, overrides: Iterable[str] = ()
) -> ExperimentConfig:
    values: Dict[str, object] = {}
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
        values = parse_config_text(text, source=str(path))
    return apply_overrides(ExperimentConfig(**values), overrides)


def config_to_text(config: ExperimentConfig) -> str:
    lines = []
    for f in fields(config):
        value = getattr(config, f.name)
        if f.name == "mu0":
            value = "random" if value is None else ", ".join(repr(float(v)) for v in value.reshape(-1))
        elif value is None:
            value = "auto"
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"
