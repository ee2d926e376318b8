"""
Tests for data models.
"""

import pytest

from twistcube.models import (
    SWEEP_CSV_FIELDS,
    CheckReport,
    DiameterMethod,
    DiameterReport,
    FrequencyReport,
    RoutePath,
    RouterParams,
    SweepRecord,
)


def test_route_path_creation():
    """Test basic RoutePath creation."""
    path = RoutePath(vertices=[5, 4, 0], levels=[1, 3])

    assert path.length == 2
    assert path.start == 5
    assert path.end == 0
    assert path.phases == 0
    assert path.alpha_trace == []


def test_route_path_single_vertex():
    """A zero-length path is one vertex and no levels."""
    path = RoutePath(vertices=[7], levels=[])

    assert path.length == 0
    assert path.start == path.end == 7


def test_route_path_validation():
    """Test __post_init__ validation."""
    with pytest.raises(ValueError, match="at least one vertex"):
        RoutePath(vertices=[], levels=[])

    with pytest.raises(ValueError, match="3 vertices but 1 levels"):
        RoutePath(vertices=[0, 1, 3], levels=[1])


def test_route_path_alpha_drops():
    """Drops are taken between consecutive phase starts only."""
    path = RoutePath(
        vertices=[0],
        levels=[],
        phases=2,
        alpha_trace=[10, 7, 3],
        phase_lengths=[3, 2],
    )
    assert path.alpha_drops == [3, 4]

    no_phases = RoutePath(vertices=[0], levels=[], alpha_trace=[4])
    assert no_phases.alpha_drops == []


def test_route_path_dict_conversion():
    """Test to_dict and from_dict."""
    path = RoutePath(vertices=[6, 2, 3], levels=[3, 1], phases=1, alpha_trace=[3, 1], phase_lengths=[1])

    data = path.to_dict()
    assert data['length'] == 2
    assert data['levels'] == [3, 1]

    restored = RoutePath.from_dict(data)
    assert restored == path


def test_router_params_validation():
    """t and n0 must be positive; n0 may reach n + 1 but not beyond."""
    with pytest.raises(ValueError, match="Ball radius"):
        RouterParams(t=0, n0=2)
    with pytest.raises(ValueError, match="Greedy threshold"):
        RouterParams(t=3, n0=0)

    params = RouterParams(t=3, n0=9)
    params.check_dimension(8)
    with pytest.raises(ValueError, match="exceeds n \\+ 1"):
        params.check_dimension(7)

    assert params.to_dict() == {'t': 3, 'n0': 9}


def test_diameter_report_sandwich():
    """Bounds must be ordered and an exact value must equal both."""
    report = DiameterReport(
        n=8, policy='independent', seed=1, lower_bound=4, upper_bound=5,
        method=DiameterMethod.SAMPLED_SWEEP,
    )
    assert report.to_dict()['method'] == 'SampledSweep'
    assert report.to_dict()['exact'] is None

    with pytest.raises(ValueError, match="exceeds upper bound"):
        DiameterReport(n=8, policy='independent', seed=1, lower_bound=6, upper_bound=5,
                       method=DiameterMethod.SAMPLED_SWEEP)

    with pytest.raises(ValueError, match="Exact diameter"):
        DiameterReport(n=8, policy='independent', seed=1, lower_bound=4, upper_bound=5,
                       method=DiameterMethod.ALL_PAIRS, exact=4)


def test_check_report_merge():
    """Merging concatenates failures and adds up counts."""
    first = CheckReport(name='injectivity', n=6, policy='independent', seed=0, scope='exhaustive',
                        checked=10)
    second = CheckReport(name='injectivity', n=6, policy='independent', seed=0, scope='exhaustive',
                         checked=5, failures=[{'vertex': 3}])

    assert first.passed
    assert not second.passed

    merged = first.merge(second)
    assert merged.checked == 15
    assert merged.failures == [{'vertex': 3}]
    assert not merged.passed
    assert merged.to_dict()['passed'] is False


def test_frequency_report_miss_frequency():
    """Test the derived miss frequency."""
    report = FrequencyReport(
        n=12, policy='independent', seed=0, k=10, t=3, pairs=40, drop=4, threshold=6,
        misses=10, mean_ball=20.0, min_ball=18, target_size=64, exact_miss_mean=0.1,
        bound_mean=0.2, bound_at_min_ball=0.25, exp_bound=0.02,
    )
    assert report.miss_frequency == 0.25
    assert report.to_dict()['check'] == 'quasirandomness'


def test_sweep_record_row():
    """Absent optionals become empty cells, floats get six decimals."""
    record = SweepRecord(n=6, policy='duplicube', seed=2, method='AllPairs', diam_exact=4,
                         diam_lower=4, diam_upper=4, greedy_mean=2.5, ratio=1.7233083338141042)
    row = record.to_row()

    assert list(row) == SWEEP_CSV_FIELDS
    assert row['diam_exact'] == '4'
    assert row['greedy_mean'] == '2.500000'
    assert row['ratio'] == '1.723308'
    assert row['twist_max'] == ''
    assert not record.skipped

    data = record.to_dict()
    assert data['ratio'] == 1.723308
    assert data['skip_reason'] is None


def test_sweep_record_skipped():
    """Test a skipped record."""
    record = SweepRecord(n=27, policy='independent', seed=0, method='Skipped',
                         skip_reason='memory budget exceeded')
    assert record.skipped
    assert record.to_row()['diam_lower'] == ''
