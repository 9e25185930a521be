"""
Run configuration.

Precedence, lowest first: the defaults below, a YAML config file (--config),
command-line flags. Keys in the config file use the field names below.
"""

import logging
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Tuple

from core.errors import ConfigError
from core.keywords import DEFAULT_DAMPING, DEFAULT_MAX_ITER, DEFAULT_TOL, DEFAULT_WINDOW
from services.storage import load_yaml

logger = logging.getLogger(__name__)

DEFAULT_SCHEMA = Path(__file__).resolve().parent.parent / "data" / "schema" / "pmc_default.yaml"

OUTPUT_FORMATS = ("csv", "markdown", "svg")
METHODS = ("all", "freq", "tfidf", "textrank", "fused")
TEXTRANK_SCOPES = ("document", "corpus")

PATH_FIELDS = ("manifest", "schema", "dictionary", "stopwords", "scorecards", "overrides")


@dataclass(frozen=True)
class RunConfig:
    manifest: Optional[Path] = None
    schema: Optional[Path] = DEFAULT_SCHEMA
    dictionary: Optional[Path] = None
    stopwords: Optional[Path] = None
    scorecards: Optional[Path] = None
    overrides: Optional[Path] = None
    window: int = DEFAULT_WINDOW
    damping: float = DEFAULT_DAMPING
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    top: int = 20
    k_clusters: int = 5
    out: Path = Path("out")
    formats: Tuple[str, ...] = OUTPUT_FORMATS
    method: str = "all"
    textrank_scope: str = "document"
    workers: Optional[int] = None
    log_level: str = "INFO"
    log_file: Optional[Path] = None

    def wants(self, fmt: str) -> bool:
        return fmt in self.formats


def parse_formats(value) -> Tuple[str, ...]:
    if isinstance(value, str):
        value = value.split(",")
    formats = tuple(dict.fromkeys(v.strip() for v in value if v.strip()))
    unknown = [f for f in formats if f not in OUTPUT_FORMATS]
    if unknown or not formats:
        raise ConfigError(f"--format must be a subset of {', '.join(OUTPUT_FORMATS)}, got {value!r}")
    return formats


def _coerce(name: str, value: Any) -> Any:
    if value is None:
        return None
    if name in PATH_FIELDS or name in ("out", "log_file"):
        return Path(value)
    if name == "formats":
        return parse_formats(value)
    if name in ("window", "max_iter", "top", "k_clusters", "workers"):
        return int(value)
    if name in ("damping", "tol"):
        return float(value)
    return value


def _apply(config: RunConfig, values: Dict[str, Any], source: str) -> RunConfig:
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(f"unknown settings in {source}: {', '.join(unknown)}")
    try:
        updates = {k: _coerce(k, v) for k, v in values.items() if v is not None}
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad value in {source}: {e}") from e
    return replace(config, **updates)


def build_config(flags: Dict[str, Any], config_file: Optional[Path] = None) -> RunConfig:
    config = RunConfig()
    if config_file is not None:
        raw = load_yaml(config_file) or {}
        if not isinstance(raw, dict):
            raise ConfigError(f"{config_file} must hold a mapping")
        config = _apply(config, {k.replace("-", "_"): v for k, v in raw.items()}, str(config_file))
    config = _apply(config, flags, "command line")
    return _check_ranges(config)


def _check_ranges(config: RunConfig) -> RunConfig:
    if config.window < 2:
        raise ConfigError("--window must be at least 2")
    if not 0 < config.damping < 1:
        raise ConfigError("--damping must lie in (0, 1)")
    if config.tol <= 0 or config.max_iter < 1:
        raise ConfigError("--tol must be positive and --max-iter at least 1")
    if config.top < 1 or config.k_clusters < 1:
        raise ConfigError("--top and --k-clusters must be positive")
    if config.method not in METHODS:
        raise ConfigError(f"--method must be one of {', '.join(METHODS)}")
    if config.textrank_scope not in TEXTRANK_SCOPES:
        raise ConfigError(f"--textrank-scope must be one of {', '.join(TEXTRANK_SCOPES)}")
    if config.workers is not None and config.workers < 1:
        raise ConfigError("--workers must be positive")
    return config


def validate_paths(config: RunConfig, required: Iterable[str] = ()) -> None:
    """Every path that is set must be an existing file; required ones must be set."""
    problems = []
    for name in required:
        if getattr(config, name) is None:
            problems.append(f"--{name} is required")
    for name in PATH_FIELDS:
        path = getattr(config, name)
        if path is not None and not Path(path).is_file():
            problems.append(f"{name} file not found: {path}")
    if problems:
        raise ConfigError("; ".join(problems))
    Path(config.out).mkdir(parents=True, exist_ok=True)
