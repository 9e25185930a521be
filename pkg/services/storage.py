#!/usr/bin/env python3
"""
Atomic file output and small readers shared by every stage
"""

import json
import logging
from pathlib import Path
from typing import Any, Union

import pandas as pd
import yaml

from core.errors import InputValidationError, ReportError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def atomic_write_text(path: PathLike, text: str) -> Path:
    """Write through a .tmp sibling, then swap it in."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    temp_file = path.with_name(f"{path.name}.tmp")
    try:
        with open(temp_file, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        temp_file.replace(path)
    except OSError as e:
        raise ReportError(f"cannot write {path}: {e}") from e
    logger.debug("Wrote %s (%d chars)", path, len(text))
    return path


def save_json(path: PathLike, payload: Any) -> Path:
    return atomic_write_text(path, json.dumps(payload, ensure_ascii=False, indent=2) + "\n")


def save_frame(path: PathLike, frame: pd.DataFrame) -> Path:
    return atomic_write_text(path, frame.to_csv(index=False, lineterminator="\n"))


def read_frame(path: PathLike, **kwargs) -> pd.DataFrame:
    try:
        return pd.read_csv(path, encoding="utf-8", **kwargs)
    except FileNotFoundError as e:
        raise InputValidationError(f"file not found: {path}") from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise InputValidationError(f"unreadable CSV {path}: {e}") from e


def load_yaml(path: PathLike) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return yaml.safe_load(f)
    except FileNotFoundError as e:
        raise InputValidationError(f"file not found: {path}") from e
    except yaml.YAMLError as e:
        raise InputValidationError(f"malformed YAML in {path}: {e}") from e


def read_term_lines(path: PathLike) -> list:
    """One term per line; blank lines and '#' comments are skipped."""
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError as e:
        raise InputValidationError(f"file not found: {path}") from e
    terms = []
    for line in raw.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            terms.append(line)
    return terms
