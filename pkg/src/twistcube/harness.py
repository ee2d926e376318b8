"""
Config-driven experiment sweeps over (n, policy, seed).

A sweep builds one graph per cell, measures its diameter (exact up to
``exact_cap``, sampled bounds above) and collects greedy and twist routing
statistics over random pairs. Records come back in cell order whatever the
thread count.
"""

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Dict, Iterable, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator

from .core import MAX_DIMENSION, MAX_SEED, CouplingPolicy, build
from .errors import ConfigError, EmitError, MemoryBudgetError
from .metrics import (
    DEFAULT_EXACT_CAP,
    DEFAULT_PAIRS,
    DEFAULT_SOURCES,
    diameter_bounds_sampled,
    exact_report,
    sampling_rng,
)
from .models import SWEEP_CSV_FIELDS, RouterParams, SweepRecord
from .routing import default_params, greedy_route, twist_route
from .utils import ensure_parent_dir, resolve_threads

logger = logging.getLogger(__name__)

ROUTE_STREAM = 0x5EE
SKIPPED = 'Skipped'

Cell = Tuple[int, CouplingPolicy, int]


def _split(value: Any) -> Any:
    if isinstance(value, str):
        return [part.strip() for part in value.split(',') if part.strip()]
    return value


def _auto(value: Any) -> Any:
    if isinstance(value, str) and value.strip().lower() == 'auto':
        return None
    return value


class SweepConfig(BaseModel):
    """Everything a sweep needs; unknown keys are rejected."""

    model_config = ConfigDict(extra='forbid')

    n_values: List[int]
    policies: List[CouplingPolicy] = [CouplingPolicy.INDEPENDENT, CouplingPolicy.DUPLICUBE]
    seeds_per_cell: int = 1
    base_seed: int = 0
    exact_cap: int = DEFAULT_EXACT_CAP
    sources: int = DEFAULT_SOURCES
    pairs: int = DEFAULT_PAIRS
    router_t: Optional[int] = None
    router_n0: Optional[int] = None
    output: Optional[Path] = None
    format: Literal['csv', 'json'] = 'csv'
    threads: Optional[int] = None
    timings: bool = True
    memory_budget: Optional[int] = None

    @field_validator('n_values', mode='before')
    @classmethod
    def _parse_n_values(cls, value: Any) -> Any:
        """Accept '4,6,8', '4..12' and mixtures such as '1, 4..6'."""
        if not isinstance(value, str):
            return value
        values: List[int] = []
        for part in _split(value):
            if '..' in part:
                lo, _, hi = part.partition('..')
                try:
                    start, stop = int(lo), int(hi)
                except ValueError:
                    raise ValueError(f"bad range '{part}'")
                if start > stop:
                    raise ValueError(f"empty range '{part}'")
                values.extend(range(start, stop + 1))
            else:
                values.append(part)  # type: ignore[arg-type]
        return values

    @field_validator('n_values')
    @classmethod
    def _check_n_values(cls, value: List[int]) -> List[int]:
        if not value:
            raise ValueError("at least one dimension is required")
        for n in value:
            if not 1 <= n <= MAX_DIMENSION:
                raise ValueError(f"dimension out of range: n = {n} (supported 1..{MAX_DIMENSION})")
        return value

    @field_validator('policies', mode='before')
    @classmethod
    def _parse_policies(cls, value: Any) -> Any:
        value = _split(value)
        if isinstance(value, list):
            return [p.lower() if isinstance(p, str) else p for p in value]
        return value

    @field_validator('policies')
    @classmethod
    def _check_policies(cls, value: List[CouplingPolicy]) -> List[CouplingPolicy]:
        if not value:
            raise ValueError("at least one policy is required")
        return value

    @field_validator('router_t', 'router_n0', 'threads', 'memory_budget', mode='before')
    @classmethod
    def _parse_auto(cls, value: Any) -> Any:
        return _auto(value)

    @field_validator('seeds_per_cell', 'sources')
    @classmethod
    def _check_positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("must be at least 1")
        return value

    @field_validator('base_seed', 'pairs')
    @classmethod
    def _check_non_negative(cls, value: int) -> int:
        if value < 0:
            raise ValueError("must be non-negative")
        return value

    @field_validator('base_seed')
    @classmethod
    def _check_seed(cls, value: int) -> int:
        if value > MAX_SEED:
            raise ValueError("must fit in 64 bits")
        return value

    @field_validator('exact_cap')
    @classmethod
    def _check_cap(cls, value: int) -> int:
        if not 0 <= value <= MAX_DIMENSION:
            raise ValueError(f"must lie in [0, {MAX_DIMENSION}]")
        return value

    @field_validator('router_t', 'router_n0', 'threads', 'memory_budget')
    @classmethod
    def _check_optional_positive(cls, value: Optional[int]) -> Optional[int]:
        if value is not None and value < 1:
            raise ValueError("must be at least 1 or 'auto'")
        return value

    def cells(self) -> List[Cell]:
        """(n, policy, seed) in output order."""
        return [
            (n, policy, self.base_seed + i)
            for n in self.n_values
            for policy in self.policies
            for i in range(self.seeds_per_cell)
        ]

    def router_params(self, n: int) -> RouterParams:
        """Default schedule for n with any fixed t / n0 applied; n0 is capped at n + 1."""
        params = default_params(n)
        t = self.router_t or params.t
        n0 = min(self.router_n0 or params.n0, n + 1)
        return RouterParams(t=t, n0=n0)


def load_config_file(path: Union[str, Path]) -> Dict[str, str]:
    """
    Read a flat ``key = value`` file.

    Blank lines and ``#`` comments are skipped; values stay strings and are
    parsed by SweepConfig.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e.strerror or e}")

    values: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition('=')
        if not sep or not key.strip():
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got '{raw.strip()}'")
        values[key.strip()] = value.strip()
    return values


def parse_overrides(items: Iterable[str]) -> Dict[str, str]:
    """Turn ``key=value`` strings into a dict."""
    values = {}
    for item in items:
        key, sep, value = item.partition('=')
        if not sep or not key.strip():
            raise ConfigError(f"override must look like key=value, got '{item}'")
        values[key.strip()] = value.strip()
    return values


def resolve_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> SweepConfig:
    """Merge defaults, file and overrides (later wins) and validate."""
    values: Dict[str, Any] = {}
    if path is not None:
        values.update(load_config_file(path))
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})

    try:
        return SweepConfig.model_validate(values)
    except ValidationError as e:
        error = e.errors()[0]
        field = '.'.join(str(part) for part in error['loc']) or 'config'
        reason = error['msg'].removeprefix('Value error, ')
        raise ConfigError(f"{field}: {reason}")


def _mean(values: Sequence[float]) -> Optional[float]:
    return float(np.mean(values)) if len(values) else None


def diameter_ratio(n: int, diameter: Optional[int]) -> Optional[float]:
    """diameter / (n / log2 n); absent for n = 1."""
    if n < 2 or diameter is None:
        return None
    return diameter / (n / math.log2(n))


def run_cell(config: SweepConfig, n: int, policy: CouplingPolicy, seed: int) -> SweepRecord:
    """Build, measure and route one cell. Memory rejection yields a skipped record."""
    started = time.perf_counter()
    try:
        G = build(n, policy, seed, threads=1, budget=config.memory_budget)
    except MemoryBudgetError as e:
        logger.warning("skipping n=%d %s seed=%d: %s", n, policy.value, seed, e)
        return SweepRecord(n=n, policy=policy.value, seed=seed, method=SKIPPED, skip_reason=str(e))
    built = time.perf_counter()

    params = config.router_params(n)
    if n <= config.exact_cap:
        report = exact_report(G, cap=config.exact_cap, threads=1)
    else:
        report = diameter_bounds_sampled(
            G, config.sources, config.pairs, seed, params=params, threads=1
        )

    greedy: List[int] = []
    twist: List[int] = []
    phases: List[int] = []
    drops: List[int] = []
    if config.pairs:
        rng = sampling_rng(seed, ROUTE_STREAM)
        us = rng.integers(0, G.num_vertices, size=config.pairs)
        vs = rng.integers(0, G.num_vertices, size=config.pairs)
        for u, v in zip(us.tolist(), vs.tolist()):
            greedy.append(greedy_route(G, u, v).length)
            path = twist_route(G, u, v, params)
            twist.append(path.length)
            phases.append(path.phases)
            drops.extend(path.alpha_drops)
    finished = time.perf_counter()

    record = SweepRecord(
        n=n,
        policy=policy.value,
        seed=seed,
        method=report.method.value,
        diam_exact=report.exact,
        diam_lower=report.lower_bound,
        diam_upper=report.upper_bound,
        greedy_mean=_mean(greedy),
        greedy_max=max(greedy) if greedy else None,
        twist_mean=_mean(twist),
        twist_max=max(twist) if twist else None,
        phases_mean=_mean(phases),
        drop_mean=_mean(drops),
        ratio=diameter_ratio(n, report.exact if report.exact is not None else report.lower_bound),
    )
    if config.timings:
        record.build_s = built - started
        record.measure_s = finished - built
    logger.debug("cell n=%d %s seed=%d: diameter [%d, %d]",
                 n, policy.value, seed, report.lower_bound, report.upper_bound)
    return record


def run_sweep(config: SweepConfig) -> List[SweepRecord]:
    """One record per (n, policy, seed), cells run in parallel, order fixed by the config."""
    cells = config.cells()
    workers = min(resolve_threads(config.threads), len(cells))
    logger.debug("sweep: %d cells on %d threads", len(cells), workers)

    def work(cell: Cell) -> SweepRecord:
        return run_cell(config, *cell)

    if workers <= 1:
        return [work(cell) for cell in cells]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(work, cells))


def render(records: Sequence[SweepRecord], fmt: str = 'csv') -> str:
    """Records as CSV (fixed header order) or a JSON array."""
    if fmt == 'csv':
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=SWEEP_CSV_FIELDS, lineterminator='\n')
        writer.writeheader()
        for record in records:
            writer.writerow(record.to_row())
        return buffer.getvalue()
    if fmt == 'json':
        return json.dumps([r.to_dict() for r in records], indent=2) + '\n'
    raise ValueError(f"Unknown output format '{fmt}' (use csv or json)")


def emit(records: Sequence[SweepRecord], fmt: str, path: Union[str, Path]) -> Path:
    """Write rendered records to path."""
    text = render(records, fmt)
    path = Path(path)
    try:
        ensure_parent_dir(path)
        with open(path, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
    except OSError as e:
        raise EmitError(path, e.strerror or str(e))
    logger.debug("wrote %d records to %s", len(records), path)
    return path
