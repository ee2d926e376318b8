"""
Utility functions for twistcube.
"""

import logging
import os
from pathlib import Path
from typing import Dict, Optional, Union

from rich.console import Console
from rich.logging import RichHandler

from .errors import ConfigError

MEMORY_BUDGET_ENV = 'TWISTCUBE_MEM_BUDGET'
DEFAULT_MEMORY_BUDGET = 8 * 1024 ** 3


def memory_budget(override: Optional[int] = None) -> int:
    """Table memory budget in bytes: explicit override, then env var, then 8 GiB."""
    if override is not None:
        return override

    raw = os.environ.get(MEMORY_BUDGET_ENV)
    if raw is None or not raw.strip():
        return DEFAULT_MEMORY_BUDGET

    try:
        value = int(raw.strip())
    except ValueError:
        raise ConfigError(f"{MEMORY_BUDGET_ENV} must be an integer byte count, got '{raw}'")
    if value <= 0:
        raise ConfigError(f"{MEMORY_BUDGET_ENV} must be positive, got {value}")
    return value


def resolve_threads(threads: Optional[int]) -> int:
    """Worker count; None or 0 means one per CPU."""
    if not threads:
        return os.cpu_count() or 1
    if threads < 0:
        raise ValueError(f"Thread count must be positive (got {threads})")
    return threads


def parse_label(text: str) -> int:
    """
    Parse a vertex label.

    Accepts decimal ('11') or 0b-prefixed binary ('0b1011'). Underscores are
    allowed as digit separators, as in Python literals.
    """
    cleaned = text.strip().replace('_', '')
    if not cleaned:
        raise ValueError("Empty vertex label")

    try:
        if cleaned.lower().startswith('0b'):
            value = int(cleaned[2:], 2)
        else:
            value = int(cleaned, 10)
    except ValueError:
        raise ValueError(f"Invalid vertex label '{text}': use decimal or 0b-prefixed binary")

    if value < 0:
        raise ValueError(f"Vertex labels are non-negative (got {value})")
    return value


def format_label(value: int, n: int) -> Dict[str, Union[int, str]]:
    """A label in both spellings; binary is padded to n coordinates."""
    return {'decimal': value, 'binary': '0b' + format(value, f'0{max(n, 1)}b')}


def ensure_parent_dir(path: Path) -> Path:
    """Ensure the directory holding path exists and return path."""
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def setup_logging(verbose: bool = False, console: Optional[Console] = None) -> None:
    """Route library logs through rich on stderr; stdout stays machine-readable."""
    handler = RichHandler(
        console=console or Console(stderr=True),
        show_path=False,
        rich_tracebacks=verbose,
    )
    handler.setFormatter(logging.Formatter('%(message)s', datefmt='[%X]'))

    root = logging.getLogger('twistcube')
    root.handlers = [handler]
    root.setLevel(logging.DEBUG if verbose else logging.WARNING)
