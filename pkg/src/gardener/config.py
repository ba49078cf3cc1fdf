"""JSON configuration. CLI flags override file values; ``GARDENER_CONFIG`` names the default file."""
from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .blocks import DEFAULT_BLOCK_PATTERN
from .exceptions import InputError, UsageError
from .stats import DEFAULT_BINS

ENV_VAR = "GARDENER_CONFIG"


def parse_log_base(value) -> float | None:
    """``None``/``"e"`` -> natural log; ``"2"``/``2`` -> bits; any other base > 1 accepted."""
    if value is None or value == "e" or value == "ln":
        return None
    try:
        base = float(value)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"log base must be 'e' or a number > 1, got {value!r}") from exc
    if not base > 1 or not math.isfinite(base):
        raise UsageError(f"log base must be 'e' or a number > 1, got {value!r}")
    return None if base == math.e else base


@dataclass
class GardenerConfig:
    n_bins: int = DEFAULT_BINS
    block_pattern: str = DEFAULT_BLOCK_PATTERN
    index_base: int = 0
    binning: str = "per_block"
    log_base: float | None = None
    seed: int = 0
    directions: dict[str, str] = field(default_factory=dict)
    cost: dict[str, float] = field(default_factory=dict)

    def override(self, **kwargs) -> "GardenerConfig":
        """Return a copy with every non-None keyword applied."""
        changes = {k: v for k, v in kwargs.items() if v is not None}
        if "log_base" in changes:
            changes["log_base"] = parse_log_base(changes["log_base"])
        return replace(self, **changes)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["log_base"] = "e" if self.log_base is None else self.log_base
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GardenerConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise InputError(f"unknown config keys {sorted(unknown)}")
        d = dict(d)
        if "log_base" in d:
            d["log_base"] = parse_log_base(d["log_base"])
        return cls(**d)


def load_config(path=None) -> GardenerConfig:
    path = path or os.environ.get(ENV_VAR)
    if not path:
        return GardenerConfig()
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError(f"config {path} must hold a JSON object")
    return GardenerConfig.from_dict(data)
