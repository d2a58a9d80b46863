"""
Configuration for Restriction Lab.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

from restriction_lab.exceptions import ConfigurationError


DEFAULT_SEED = 0
DEFAULT_WORKERS = 1
DEFAULT_OUT_DIR = "out"
DEFAULT_FORMAT = "both"
DEFAULT_FD_STEP = 1e-4
DEFAULT_ALIAS_BOUND = 0.25
DEFAULT_CHUNK_SIZE = 2048

FORMATS = ("csv", "json", "both")


@dataclass
class LabConfig:
    """Configuration shared by every resource of RestrictionLab.

    Args:
        seed: Seed for every random corpus. Falls back to RESTRICTION_LAB_SEED.
        workers: Worker threads for sweeps. Falls back to RESTRICTION_LAB_WORKERS.
        out_dir: Directory for CSV/JSON artifacts. Falls back to RESTRICTION_LAB_OUT_DIR.
        format: Artifact format, one of csv, json, both.
        fd_step: Finite-difference step relative to the patch diameter.
        alias_bound: Upper bound for h · max|x| · 2π in extension sums.
        chunk_size: Evaluation points per reduction block.
        extra: Subcommand parameters read from a config file.

    Example:
        config = LabConfig(seed=7, workers=4)
        lab = RestrictionLab(config=config)
    """

    seed: int | None = field(default=None)
    workers: int | None = field(default=None)
    out_dir: str | None = field(default=None)
    format: str = field(default=DEFAULT_FORMAT)
    fd_step: float = field(default=DEFAULT_FD_STEP)
    alias_bound: float = field(default=DEFAULT_ALIAS_BOUND)
    chunk_size: int = field(default=DEFAULT_CHUNK_SIZE)
    extra: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        # Load from environment if not provided
        if self.seed is None:
            self.seed = _env_int("RESTRICTION_LAB_SEED", DEFAULT_SEED)
        if self.workers is None:
            self.workers = _env_int("RESTRICTION_LAB_WORKERS", DEFAULT_WORKERS)
        if self.out_dir is None:
            self.out_dir = os.getenv("RESTRICTION_LAB_OUT_DIR", DEFAULT_OUT_DIR)

        if self.workers < 1:
            raise ConfigurationError("workers must be at least 1", key="workers")
        if self.format not in FORMATS:
            raise ConfigurationError(
                f"Unknown format '{self.format}'",
                hint=f"Use one of {', '.join(FORMATS)}",
                key="format",
            )
        if not 0 < self.fd_step < 1:
            raise ConfigurationError("fd_step must lie in (0, 1)", key="fd_step")
        if self.alias_bound <= 0:
            raise ConfigurationError("alias_bound must be positive", key="alias_bound")
        if self.chunk_size < 1:
            raise ConfigurationError("chunk_size must be at least 1", key="chunk_size")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> LabConfig:
        """Create config from dictionary.

        Keys that are not config fields are kept in ``extra``.
        """
        known = {f.name for f in fields(cls)} - {"extra"}
        kwargs = {key: value for key, value in data.items() if key in known}
        extra = {key: value for key, value in data.items() if key not in known}
        return cls(**kwargs, extra=extra)

    @classmethod
    def from_file(cls, path: str | Path) -> LabConfig:
        """Create config from a key-value file (see docs/CONFIG.md)."""
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigurationError(f"Cannot read config file: {e.strerror}", key=str(path))
        return cls.from_dict(parse_key_value(text))

    def to_dict(self) -> dict[str, Any]:
        """Plain dictionary view, ``extra`` included."""
        return asdict(self)

    def config_hash(self) -> str:
        """sha256 of the canonical JSON form of the config."""
        payload = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


_INT_KEYS = {"seed", "workers", "chunk_size", "n", "k", "res", "resolution", "count"}
_FLOAT_KEYS = {"fd_step", "alias_bound", "pprime", "q", "eps", "box", "r0", "r1"}


def parse_key_value(text: str) -> dict[str, Any]:
    """Parse the plain-text ``key = value`` schema.

    Blank lines and ``#`` comments are ignored. ``[section]`` headers prefix
    the following keys with ``section.``. Values of known numeric keys are
    converted; comma separated values become lists.

    Raises:
        ConfigurationError: On a malformed line or an unparsable number,
            with the line number and key attached.
    """
    data: dict[str, Any] = {}
    section = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if not section:
                raise ConfigurationError("Empty section header", line=lineno)
            continue
        if "=" not in line:
            raise ConfigurationError(
                "Expected 'key = value'",
                hint="Comments start with '#'",
                line=lineno,
            )
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigurationError("Missing key", line=lineno)
        full_key = f"{section}.{key}" if section else key
        if full_key in data:
            raise ConfigurationError("Duplicate key", line=lineno, key=full_key)
        data[full_key] = _convert(key, value, lineno)
    return data


def _convert(key: str, value: str, lineno: int) -> Any:
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
    except ValueError:
        raise ConfigurationError(f"Cannot parse '{value}' as a number", line=lineno, key=key)
    if "," in value:
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


def _env_int(name: str, default: int) -> int:
    value = os.getenv(name)
    if value is None or value == "":
        return default
    try:
        return int(value)
    except ValueError:
        raise ConfigurationError(f"Environment variable {name} is not an integer", key=name)
