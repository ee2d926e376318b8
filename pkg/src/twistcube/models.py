"""
Data models for twistcube.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional


@dataclass
class RoutePath:
    """A walk through the graph with the matching level used on every hop."""

    vertices: List[int]
    levels: List[int]
    phases: int = 0
    # alpha(u_i, target) at the start of every ball-search phase, plus the value
    # handed over to the greedy finish
    alpha_trace: List[int] = field(default_factory=list)
    phase_lengths: List[int] = field(default_factory=list)

    def __post_init__(self):
        """Validate the shape of the walk."""
        if not self.vertices:
            raise ValueError("A path needs at least one vertex")

        if len(self.levels) != len(self.vertices) - 1:
            raise ValueError(
                f"Path has {len(self.vertices)} vertices but {len(self.levels)} levels"
            )

    @property
    def length(self) -> int:
        """Number of edges."""
        return len(self.levels)

    @property
    def start(self) -> int:
        return self.vertices[0]

    @property
    def end(self) -> int:
        return self.vertices[-1]

    @property
    def alpha_drops(self) -> List[int]:
        """Decrease of alpha achieved by each ball-search phase."""
        trace = self.alpha_trace
        return [trace[i] - trace[i + 1] for i in range(min(self.phases, len(trace) - 1))]

    def to_dict(self) -> dict:
        """Convert to dictionary for JSON serialization."""
        return {
            'vertices': list(self.vertices),
            'levels': list(self.levels),
            'length': self.length,
            'phases': self.phases,
            'alpha_trace': list(self.alpha_trace),
            'phase_lengths': list(self.phase_lengths),
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'RoutePath':
        """Create RoutePath from dictionary."""
        return cls(
            vertices=list(data['vertices']),
            levels=list(data['levels']),
            phases=data.get('phases', 0),
            alpha_trace=list(data.get('alpha_trace', [])),
            phase_lengths=list(data.get('phase_lengths', [])),
        )


@dataclass(frozen=True)
class RouterParams:
    """Ball radius t and greedy-switch threshold n0 of the twist router."""

    t: int
    n0: int

    def __post_init__(self):
        if self.t < 1:
            raise ValueError(f"Ball radius t must be >= 1 (got {self.t})")
        if self.n0 < 1:
            raise ValueError(f"Greedy threshold n0 must be >= 1 (got {self.n0})")

    def check_dimension(self, n: int) -> None:
        """Reject n0 beyond n + 1 (n + 1 already means pure greedy)."""
        if self.n0 > n + 1:
            raise ValueError(f"Greedy threshold n0 = {self.n0} exceeds n + 1 = {n + 1}")

    def to_dict(self) -> dict:
        return {'t': self.t, 'n0': self.n0}


class DiameterMethod(str, Enum):
    ALL_PAIRS = 'AllPairs'
    SAMPLED_SWEEP = 'SampledSweep'


@dataclass
class DiameterReport:
    """Diameter of one graph instance, exact or bracketed by sampling."""

    n: int
    policy: str
    seed: int
    lower_bound: int
    upper_bound: int
    method: DiameterMethod
    exact: Optional[int] = None
    samples: int = 0
    pairs: int = 0
    wall_time: float = 0.0
    # the sampled upper bound is a route-length statistic, not a certificate
    upper_is_heuristic: bool = False

    def __post_init__(self):
        if self.lower_bound > self.upper_bound:
            raise ValueError(
                f"Lower bound {self.lower_bound} exceeds upper bound {self.upper_bound}"
            )
        if self.exact is not None and not (self.lower_bound == self.exact == self.upper_bound):
            raise ValueError("Exact diameter must equal both bounds")

    def to_dict(self) -> dict:
        return {
            'n': self.n,
            'policy': self.policy,
            'seed': self.seed,
            'exact': self.exact,
            'lower_bound': self.lower_bound,
            'upper_bound': self.upper_bound,
            'upper_is_heuristic': self.upper_is_heuristic,
            'method': self.method.value,
            'samples': self.samples,
            'pairs': self.pairs,
            'wall_time': round(self.wall_time, 6),
        }


@dataclass
class CheckReport:
    """Outcome of one deterministic check on one graph."""

    name: str
    n: int
    policy: str
    seed: int
    scope: str
    checked: int = 0
    failures: List[Dict[str, Any]] = field(default_factory=list)
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    def merge(self, other: 'CheckReport') -> 'CheckReport':
        """Combine two partial reports of the same check."""
        return CheckReport(
            name=self.name,
            n=self.n,
            policy=self.policy,
            seed=self.seed,
            scope=self.scope,
            checked=self.checked + other.checked,
            failures=self.failures + other.failures,
            details={**self.details, **other.details},
        )

    def to_dict(self) -> dict:
        return {
            'check': self.name,
            'n': self.n,
            'policy': self.policy,
            'seed': self.seed,
            'scope': self.scope,
            'checked': self.checked,
            'passed': self.passed,
            'failures': list(self.failures),
            'details': dict(self.details),
        }


@dataclass
class FrequencyReport:
    """Empirical frequency of the per-pair miss event of the ball search."""

    n: int
    policy: str
    seed: int
    k: int
    t: int
    pairs: int
    drop: int
    threshold: int
    misses: int
    mean_ball: float
    min_ball: int
    target_size: int
    exact_miss_mean: float
    bound_mean: float
    bound_at_min_ball: float
    exp_bound: float
    warnings: List[str] = field(default_factory=list)

    @property
    def miss_frequency(self) -> float:
        return self.misses / self.pairs if self.pairs else 0.0

    def to_dict(self) -> dict:
        return {
            'check': 'quasirandomness',
            'n': self.n,
            'policy': self.policy,
            'seed': self.seed,
            'k': self.k,
            't': self.t,
            'pairs': self.pairs,
            'drop': self.drop,
            'threshold': self.threshold,
            'misses': self.misses,
            'miss_frequency': self.miss_frequency,
            'mean_ball': self.mean_ball,
            'min_ball': self.min_ball,
            'target_size': self.target_size,
            'exact_miss_mean': self.exact_miss_mean,
            'bound_mean': self.bound_mean,
            'bound_at_min_ball': self.bound_at_min_ball,
            'exp_bound': self.exp_bound,
            'warnings': list(self.warnings),
        }


SWEEP_CSV_FIELDS = [
    'n', 'policy', 'seed', 'diam_exact', 'diam_lower', 'diam_upper', 'method',
    'greedy_mean', 'greedy_max', 'twist_mean', 'twist_max', 'phases_mean',
    'drop_mean', 'ratio', 'build_s', 'measure_s',
]


def _cell(value: Any) -> str:
    if value is None:
        return ''
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


@dataclass
class SweepRecord:
    """One experiment row: a single (n, policy, seed) cell."""

    n: int
    policy: str
    seed: int
    method: str
    diam_exact: Optional[int] = None
    diam_lower: Optional[int] = None
    diam_upper: Optional[int] = None
    greedy_mean: Optional[float] = None
    greedy_max: Optional[int] = None
    twist_mean: Optional[float] = None
    twist_max: Optional[int] = None
    phases_mean: Optional[float] = None
    drop_mean: Optional[float] = None
    ratio: Optional[float] = None
    build_s: Optional[float] = None
    measure_s: Optional[float] = None
    skip_reason: Optional[str] = None

    @property
    def skipped(self) -> bool:
        return self.skip_reason is not None

    def to_row(self) -> Dict[str, str]:
        """CSV cells in schema order; absent optionals become empty strings."""
        return {name: _cell(getattr(self, name)) for name in SWEEP_CSV_FIELDS}

    def to_dict(self) -> dict:
        data = {}
        for name in SWEEP_CSV_FIELDS:
            value = getattr(self, name)
            data[name] = round(value, 6) if isinstance(value, float) else value
        data['skip_reason'] = self.skip_reason
        return data
