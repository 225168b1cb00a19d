"""Contains the run configuration and its loaders."""
from __future__ import annotations

import logging
import os
from collections.abc import Callable, Mapping
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Optional, Union, get_type_hints

logger = logging.getLogger(__name__)

TOKEN_VARIABLE = "GRAPHSOS_BACKEND_TOKEN"
OPTIMIZERS = ("adam", "sgd")


@dataclass(frozen=True)
class RunConfig:
    """Paths, backends and hyperparameters of one run."""

    input: Optional[str] = None
    output: Optional[str] = None
    sft_output: Optional[str] = None
    dpo_output: Optional[str] = None
    params: Optional[str] = None
    embeddings: Optional[str] = None
    backend: Optional[str] = None
    oracle: str = "builtin"
    endpoint: Optional[str] = None
    kind: Optional[str] = None
    n_max: int = 20
    k: int = 2
    h: int = 4
    d: int = 64
    positional_buckets: int = 0
    encoder_seed: int = 0
    m: int = 10
    tau: float = 0.5
    T: float = 5.0  # noqa: N815
    beta: float = 0.1
    lr: float = 0.05
    steps: int = 100
    baseline_decay: float = 0.9
    optimizer: str = "adam"
    exact_expectation: bool = False
    trials: int = 10
    seed: int = 0
    concurrency: int = 4
    temperature: float = 0.9
    max_tokens: int = 512
    count: int = 500
    timeout: float = 60.0

    def __post_init__(self) -> None:  # noqa: PLR0912
        """Check every hyperparameter against its domain."""
        for name in ("n_max", "k", "h", "d", "m", "steps", "trials", "concurrency", "max_tokens", "count"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1, got {getattr(self, name)}.")
        for name in ("tau", "T", "beta", "timeout"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}.")
        if self.lr < 0:
            raise ValueError(f"lr must not be negative, got {self.lr}.")
        if self.d % self.h:
            raise ValueError(f"d={self.d} is not divisible by h={self.h}.")
        if self.positional_buckets < 0:
            raise ValueError(f"positional_buckets must not be negative, got {self.positional_buckets}.")
        if not 0.0 <= self.baseline_decay < 1.0:
            raise ValueError(f"baseline_decay must lie in [0, 1), got {self.baseline_decay}.")
        if self.temperature < 0:
            raise ValueError(f"temperature must not be negative, got {self.temperature}.")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"optimizer must be one of {', '.join(OPTIMIZERS)}, got {self.optimizer!r}.")
        if self.seed < 0 or self.encoder_seed < 0:
            raise ValueError("Seeds must not be negative.")


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _convert(name: str, raw: str, hint: Any) -> Any:
    optional = getattr(hint, "__origin__", None) is Union and type(None) in hint.__args__
    if optional:
        if raw == "":
            return None
        hint = next(arg for arg in hint.__args__ if arg is not type(None))
    if hint is bool:
        if raw.lower() in _TRUE:
            return True
        if raw.lower() in _FALSE:
            return False
        raise ValueError(f"{name} needs a boolean, got {raw!r}.")
    try:
        return hint(raw)
    except ValueError:
        raise ValueError(f"{name} needs a value of type {hint.__name__}, got {raw!r}.") from None


def parse_config(text: str) -> dict[str, Any]:
    """Parse flat 'key = value' lines into typed values, ignoring blank lines and '#' comments."""
    hints = get_type_hints(RunConfig)
    known = {field.name for field in fields(RunConfig)}
    values: dict[str, Any] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, separator, raw = stripped.partition("=")
        key = key.strip()
        if not separator:
            raise ValueError(f"Line {number}: expected 'key = value', got {stripped!r}.")
        if key not in known:
            raise ValueError(f"Line {number}: unknown key {key!r}.")
        values[key] = _convert(key, raw.strip(), hints[key])
    return values


def load_config(path: Union[str, Path]) -> dict[str, Any]:
    """Load the values set in a configuration file."""
    values = parse_config(Path(path).read_text(encoding="utf-8"))
    logger.info(f"Loaded {len(values)} settings from {path}")
    return values


def create_config(file_values: Mapping[str, Any], flags: Mapping[str, Any]) -> RunConfig:
    """Create the configuration from file values and explicitly given flags, the flags taking precedence."""
    return RunConfig(**{**file_values, **flags})


def create_token_provider(environ: Mapping[str, str] = os.environ) -> Callable[[], Optional[str]]:
    """Create an object that provides the backend bearer token when called."""

    def provide_token() -> Optional[str]:
        return environ.get(TOKEN_VARIABLE) or None

    return provide_token
