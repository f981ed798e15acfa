"""
Tests for rank correlation, change rate and the shift sweep
"""

import numpy as np
import pandas as pd
import pytest
from scipy import stats as scipy_stats

from src.exceptions import InvalidParameters, SeriesTooShort, TooFewPairs, ZeroVariance
from src.series import dated_series
from src.stats import (
    VARIABLES,
    change_rate,
    correlation_matrix,
    n_pairs,
    parse_shift_range,
    shift_sweep,
    spearman,
)

START = '2020-04-01'

def average_ranks(values):
    """1-based ranks, tied values sharing the mean of their positions"""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = np.empty(len(values))
    position = 0
    while position < len(order):
        end = position
        while end + 1 < len(order) and values[order[end + 1]] == values[order[position]]:
            end += 1
        for i in order[position:end + 1]:
            ranks[i] = (position + end) / 2 + 1
        position = end + 1
    return ranks

class TestSpearman:
    """Test the Spearman coefficient"""

    def test_perfect_monotone(self):
        x = dated_series(START, [1.0, 2.0, 3.0, 4.0, 5.0])
        assert spearman(x, x ** 3) == pytest.approx(1.0)
        assert spearman(x, -np.exp(x)) == pytest.approx(-1.0)

    def test_matches_reference_with_ties(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            x = rng.integers(0, 6, size=40).astype(float)
            y = x + rng.integers(0, 4, size=40)
            expected = scipy_stats.spearmanr(x, y)[0]
            assert spearman(x, y) == pytest.approx(expected, abs=1e-12)

    def test_pairs_on_shared_dates_only(self):
        x = dated_series(START, [1.0, 2.0, None, 4.0, 5.0, 6.0])
        y = dated_series('2020-04-02', [10.0, 30.0, 20.0, 40.0, 50.0, 60.0])
        # shared dates 04-02..04-06, 04-03 absent in x
        assert n_pairs(x, y) == 4
        assert spearman(x, y) == pytest.approx(1.0)

    def test_too_few_pairs(self):
        with pytest.raises(TooFewPairs):
            spearman([1.0, 2.0], [2.0, 1.0])

    def test_constant_variable(self):
        with pytest.raises(ZeroVariance):
            spearman([1.0, 2.0, 3.0, 4.0], [7.0, 7.0, 7.0, 7.0])

    def test_brute_force_average_rank_oracle(self):
        """Tie-bearing integer samples of length 3..10 against explicit average ranks"""
        rng = np.random.default_rng(200)
        checked = 0
        for _ in range(200):
            n = int(rng.integers(3, 11))
            x = rng.integers(0, 4, size=n).astype(float)
            y = rng.integers(0, 4, size=n).astype(float)
            if np.ptp(x) == 0 or np.ptp(y) == 0:
                with pytest.raises(ZeroVariance):
                    spearman(x, y)
                continue
            rx, ry = average_ranks(x), average_ranks(y)
            dx, dy = rx - rx.mean(), ry - ry.mean()
            expected = (dx * dy).sum() / np.sqrt((dx * dx).sum() * (dy * dy).sum())
            assert spearman(x, y) == pytest.approx(expected, abs=1e-12)
            checked += 1
        assert checked > 150

    def test_tie_free_closed_form(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            n = int(rng.integers(3, 30))
            x = rng.permutation(n).astype(float)
            y = rng.permutation(n).astype(float)
            d = x - y
            expected = 1 - 6 * (d * d).sum() / (n * (n * n - 1))
            assert spearman(x, y) == pytest.approx(expected, abs=1e-12)

    def test_symmetric(self):
        rng = np.random.default_rng(3)
        x, y = rng.normal(size=25), rng.normal(size=25)
        assert spearman(x, y) == pytest.approx(spearman(y, x), abs=1e-15)

    def test_negating_tie_free_variable_flips_sign(self):
        rng = np.random.default_rng(41)
        for _ in range(20):
            n = int(rng.integers(3, 40))
            x = rng.integers(0, 5, size=n).astype(float)
            if np.ptp(x) == 0:
                x[0] += 1.0
            y = rng.normal(size=n)
            assert spearman(x, -y) == pytest.approx(-spearman(x, y), abs=1e-12)

class TestChangeRate:
    """Test dR_t/dt"""

    def test_linear_series_has_constant_slope(self):
        rt = dated_series(START, [3.0 - 0.1 * t for t in range(10)])
        slope = change_rate(rt)
        assert slope.name == 'drt_dt'
        assert np.allclose(slope.to_numpy(), -0.1)

    def test_central_differences(self):
        rt = dated_series(START, [1.0, 2.0, 4.0, 7.0])
        assert change_rate(rt).tolist() == pytest.approx([1.0, 1.5, 2.5, 3.0])

    def test_missing_dates_become_absent(self):
        rt = pd.Series(
            [1.0, 2.0, 3.0, 5.0, 6.0, 7.0],
            index=pd.to_datetime(['2020-04-01', '2020-04-02', '2020-04-03',
                                  '2020-04-05', '2020-04-06', '2020-04-07'])
        )
        slope = change_rate(rt)
        assert len(slope) == 7
        assert slope.loc['2020-04-03':'2020-04-05'].isna().all()
        assert slope.loc['2020-04-02'] == pytest.approx(1.0)

    def test_too_short(self):
        with pytest.raises(SeriesTooShort):
            change_rate(dated_series(START, [1.0, 2.0]))

class TestCorrelationMatrix:
    """Test the rt / drt_dt / mobility matrix"""

    def setup_method(self):
        days = 30
        index = pd.date_range(START, periods=days, freq='D', name='date')
        t = np.arange(days)
        self.table = pd.DataFrame({
            'rt': 3.0 * np.exp(-t / 10.0) + 0.5,
            'mobility': 110.0 - 1.5 * t,
            'daily_new_cases': 100.0 + t,
        }, index=index)

    def test_symmetric_with_unit_diagonal(self):
        report = correlation_matrix(self.table, country='Testland')
        assert list(report.r_s.index) == list(VARIABLES)
        assert np.allclose(report.r_s.to_numpy(), report.r_s.to_numpy().T, equal_nan=True)
        for name in VARIABLES:
            assert report.cell(name, name) == 1.0
        # decaying rt falls with mobility
        assert report.cell('rt', 'mobility') == pytest.approx(1.0)
        assert report.cell('mobility', 'rt') == report.cell('rt', 'mobility')
        assert report.period == (self.table.index[0], self.table.index[-1])

    def test_pair_counts(self):
        report = correlation_matrix(self.table)
        assert report.n_obs.loc['rt', 'mobility'] == 30
        assert report.n_obs.loc['drt_dt', 'rt'] == 30

    def test_constant_mobility_gives_undefined_cells(self):
        table = self.table.assign(mobility=100.0)
        report = correlation_matrix(table)
        assert np.isnan(report.cell('rt', 'mobility'))
        assert np.isnan(report.cell('mobility', 'mobility'))
        assert report.cell('rt', 'rt') == 1.0

    def test_to_frame_layout(self):
        frame = correlation_matrix(self.table, country='Testland').to_frame()
        assert list(frame.columns) == ['variable', 'rt', 'drt_dt', 'mobility',
                                       'n_obs_rt', 'n_obs_drt_dt', 'n_obs_mobility']
        assert frame['variable'].tolist() == list(VARIABLES)

    def test_too_few_rows(self):
        with pytest.raises(TooFewPairs):
            correlation_matrix(self.table.iloc[:2])

class TestShiftSweep:
    """Test the lagged correlation sweep"""

    def setup_method(self):
        rng = np.random.default_rng(20200415)
        self.mobility = dated_series(START, rng.normal(100.0, 10.0, size=150), 'mobility')

    @pytest.mark.parametrize("lag", [-10, -5, 0, 5, 10])
    def test_recovers_planted_lag(self, lag):
        # rt(t) = f(mobility(t - lag)) for a monotone f: mobility leads by lag days
        rt = np.exp(self.mobility / 50.0).shift(lag, freq='D').rename('rt')
        sweep = shift_sweep(rt, self.mobility, range(-21, 22))
        assert sweep.best_shift() == lag
        assert sweep.at(lag) == pytest.approx(1.0)
        assert len(sweep) == 43

    def test_anti_correlated_mobility(self):
        rt = (self.mobility / 40.0).rename('rt')
        table = pd.DataFrame({'rt': rt, 'mobility': -rt})
        assert correlation_matrix(table).cell('rt', 'mobility') == pytest.approx(-1.0)
        sweep = shift_sweep(rt, -rt, range(-7, 8))
        assert sweep.best_shift() == 0
        assert sweep.at(0) == pytest.approx(-1.0)

    def test_pair_counts_shrink_with_overlap(self):
        rt = self.mobility.iloc[:50]
        sweep = shift_sweep(rt, self.mobility, [-5, 0, 5])
        assert sweep.n_obs.tolist() == [50, 50, 45]

    def test_undefined_shifts_are_nan(self):
        rt = self.mobility.iloc[:5]
        sweep = shift_sweep(rt, self.mobility, [0, 3, 10])
        assert sweep.r_s[0] == pytest.approx(1.0)
        assert np.isnan(sweep.r_s[1])
        assert np.isnan(sweep.r_s[2])
        assert sweep.n_obs.tolist() == [5, 2, 0]

    def test_all_undefined_has_no_best_shift(self):
        rt = dated_series('2030-01-01', [1.0, 2.0, 3.0])
        assert shift_sweep(rt, self.mobility, [0, 1]).best_shift() is None

    def test_to_frame(self):
        frame = shift_sweep(self.mobility, self.mobility, [-1, 0, 1]).to_frame()
        assert list(frame.columns) == ['shift', 'r_s', 'n_obs']
        assert frame['shift'].tolist() == [-1, 0, 1]

    @pytest.mark.parametrize("shifts", [[], [0, 0], [2, 1]])
    def test_invalid_shifts(self, shifts):
        with pytest.raises(InvalidParameters):
            shift_sweep(self.mobility, self.mobility, shifts)

class TestParseShiftRange:
    """Test the 'lo..hi' syntax"""

    def test_inclusive(self):
        assert parse_shift_range('-21..21') == range(-21, 22)
        assert parse_shift_range('3..3') == range(3, 4)

    @pytest.mark.parametrize("text", ['5..1', '1-5', 'a..b', '..'])
    def test_invalid(self, text):
        with pytest.raises(InvalidParameters):
            parse_shift_range(text)
