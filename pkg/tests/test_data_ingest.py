"""
Tests for feed parsing, smoothing and alignment
"""

import numpy as np
import pandas as pd
import pytest

from src.data_ingest import (
    CountryPanel,
    MobilitySeries,
    align,
    full_window,
    interpolate_short_gaps,
    parse_csse,
    parse_mobility,
    smooth_cases,
    trailing_mean,
)
from src.exceptions import (
    DateGap,
    InvalidParameters,
    MalformedRow,
    NoOverlap,
    NoStreams,
    SeriesTooShort,
    UnknownCountry,
)
from src.series import dated_series

from conftest import FIXTURES_DIR, make_panel, write_mobility

def parse_fixture(country, population_file='uid_lookup.csv'):
    return parse_csse(
        FIXTURES_DIR / 'csse_confirmed.csv',
        FIXTURES_DIR / 'csse_recovered.csv',
        FIXTURES_DIR / 'csse_deaths.csv',
        FIXTURES_DIR / population_file,
        country
    )

class TestParseCsse:
    """Test CSSE time-series parsing"""

    def test_provinces_are_summed(self):
        panel = parse_fixture('Testland')
        assert panel.country == 'Testland'
        assert panel.confirmed.tolist() == [11.0, 22.0, 33.0, 44.0, 55.0]
        assert panel.recovered.tolist() == [0.0, 1.0, 1.0, 2.0, 3.0]
        assert panel.deaths.tolist() == [0.0, 1.0, 2.0, 2.0, 3.0]
        assert panel.dates[0] == pd.Timestamp('2020-03-01')
        assert len(panel.dates) == 5
        assert not panel.is_smoothed

    def test_population_from_country_level_row(self):
        assert parse_fixture('Testland').population == 1_000_000

    def test_population_override(self):
        panel = parse_fixture('Testland', 'population_override.csv')
        assert panel.population == 1_234_567

    def test_alias_resolves_to_csse_spelling(self):
        panel = parse_fixture('Republic of Korea')
        assert panel.country == 'Korea, South'
        assert panel.confirmed.tolist() == [0.0, 1.0, 2.0, 3.0, 4.0]
        assert panel.population == 51_269_183

    def test_missing_recovered_rows_become_zeros(self):
        panel = parse_fixture('Otherland')
        assert (panel.recovered == 0).all()
        assert panel.confirmed.tolist() == [5.0, 5.0, 6.0, 8.0, 9.0]

    def test_unknown_country(self):
        with pytest.raises(UnknownCountry):
            parse_fixture('Atlantis')

    def test_malformed_row_reports_file_line(self, tmp_path):
        path = tmp_path / 'confirmed.csv'
        path.write_text(
            "Province/State,Country/Region,Lat,Long,3/1/20,3/2/20\n"
            ",Otherland,0,0,1,2\n"
            ",Testland,0,0,3,oops\n",
            encoding='utf-8'
        )
        with pytest.raises(MalformedRow) as info:
            parse_csse(path, path, path, FIXTURES_DIR / 'uid_lookup.csv', 'Testland')
        assert info.value.line == 3

    def test_non_consecutive_header_dates(self, tmp_path):
        path = tmp_path / 'confirmed.csv'
        path.write_text(
            "Province/State,Country/Region,Lat,Long,3/1/20,3/2/20,3/4/20\n"
            ",Testland,0,0,1,2,3\n",
            encoding='utf-8'
        )
        with pytest.raises(DateGap):
            parse_csse(path, path, path, FIXTURES_DIR / 'uid_lookup.csv', 'Testland')

    def test_daily_new_cases(self):
        panel = parse_fixture('Testland')
        daily = panel.daily_new_cases(smoothed=False)
        assert daily.tolist() == [11.0, 11.0, 11.0, 11.0]
        assert daily.index[0] == pd.Timestamp('2020-03-02')

class TestSmoothing:
    """Test the trailing-mean smoothing rules"""

    def test_three_day_case_smoothing(self):
        panel = smooth_cases(make_panel([10, 20, 30, 40, 50], deaths=[0, 0, 3, 3, 3]))
        assert panel.is_smoothed
        assert panel.confirmed_smoothed.tolist() == pytest.approx([10.0, 15.0, 20.0, 30.0, 40.0])
        assert panel.deaths_smoothed.tolist() == pytest.approx([0.0, 0.0, 1.0, 2.0, 3.0])
        # raw series untouched
        assert panel.confirmed.tolist() == [10.0, 20.0, 30.0, 40.0, 50.0]
        assert panel.observed('confirmed') is panel.confirmed_smoothed

    def test_smoothed_daily_cases_difference_the_smoothed_series(self):
        panel = smooth_cases(make_panel([10, 20, 30, 40, 50]))
        assert panel.daily_new_cases().tolist() == pytest.approx([5.0, 5.0, 10.0, 10.0])

    def test_smoothing_needs_full_window(self):
        with pytest.raises(SeriesTooShort):
            smooth_cases(make_panel([1, 2]))

    def test_weekly_cycle_is_removed(self):
        week = [3.0, 9.0, 4.0, 7.0, 1.0, 5.0, 6.0]
        series = dated_series('2020-04-01', week * 4)
        smoothed = trailing_mean(series, 7)
        assert np.allclose(smoothed.iloc[6:].to_numpy(), np.mean(week))

    def test_interpolates_short_gaps_only(self):
        series = dated_series('2020-04-01', [1.0, None, None, 4.0, None, None, None, None, 9.0, None])
        filled = interpolate_short_gaps(series)
        assert filled.iloc[:4].tolist() == pytest.approx([1.0, 2.0, 3.0, 4.0])
        assert filled.iloc[4:8].isna().all()
        # trailing absences are not interior
        assert np.isnan(filled.iloc[9])

    def test_full_window_after_gap(self):
        series = dated_series('2020-04-01', [1.0, 2.0, None, 4.0, 5.0, 6.0, 7.0, 8.0])
        mask = full_window(series, 3)
        assert mask.tolist() == [True, True, False, False, False, True, True, True]

class TestParseMobility:
    """Test Apple mobility parsing"""

    def test_streams_combined_and_smoothed(self):
        mobility = parse_mobility(FIXTURES_DIR / 'apple_mobility.csv', 'Testland')
        assert mobility.country == 'Testland'
        assert sorted(mobility.streams) == ['driving', 'transit', 'walking']
        assert mobility.combined.index[0] == pd.Timestamp('2020-05-08')
        assert len(mobility.combined) == 9
        assert mobility.combined.tolist() == pytest.approx([100, 90, 80, 90, 100, 110, 120, 130, 140])
        assert mobility.combined_smoothed.tolist() == pytest.approx(
            [100, 95, 90, 90, 92, 95, 690 / 7, 720 / 7, 110]
        )

    def test_long_gap_leaves_partial_windows_absent(self, tmp_path):
        values = np.array([100.0 + t for t in range(20)])
        values[5:9] = np.nan
        path = write_mobility(tmp_path / 'mobility.csv', [('Testland', 'driving', values)])
        mobility = parse_mobility(path, 'Testland')
        smoothed = mobility.combined_smoothed
        # four absent days are too many to interpolate
        assert mobility.combined.iloc[5:9].isna().all()
        assert smoothed.iloc[:5].notna().all()
        assert smoothed.iloc[5:15].isna().all()
        assert smoothed.iloc[15] == pytest.approx(112.0)
        assert smoothed.iloc[19] == pytest.approx(116.0)

    def test_missing_feed_days_are_absent_in_streams(self):
        mobility = parse_mobility(FIXTURES_DIR / 'apple_mobility.csv', 'Testland')
        assert mobility.driving.loc['2020-05-11':'2020-05-12'].isna().all()

    def test_city_rows_are_ignored(self):
        mobility = parse_mobility(FIXTURES_DIR / 'apple_mobility.csv', 'Testland')
        assert mobility.driving.max() == 160

    def test_two_streams_and_alias(self):
        mobility = parse_mobility(FIXTURES_DIR / 'apple_mobility.csv', 'Korea, South')
        assert mobility.country == 'Korea, South'
        assert mobility.transit is None
        assert mobility.combined.tolist() == pytest.approx([75, 77, 79, 81, 83, 85, 87, 89, 91])

    def test_no_known_streams(self):
        with pytest.raises(NoStreams):
            parse_mobility(FIXTURES_DIR / 'apple_mobility.csv', 'Streamless')

    def test_unknown_country(self):
        with pytest.raises(UnknownCountry):
            parse_mobility(FIXTURES_DIR / 'apple_mobility.csv', 'Atlantis')

class TestAlign:
    """Test the shared-date join"""

    def setup_method(self):
        self.panel = smooth_cases(make_panel([10 * t * t for t in range(1, 11)], start='2020-05-01'))
        combined = dated_series('2020-05-04', [100.0, 98.0, None, 94.0, 92.0, 90.0, 88.0, 86.0, 84.0, 82.0])
        self.mobility = MobilitySeries('Testland', combined, None, None, combined, combined)

    def test_inner_join_drops_absent_rows(self):
        rt = dated_series('2020-05-03', [1.5] * 6, 'rt')
        aligned = align(self.panel, self.mobility, rt)
        assert list(aligned.columns) == ['rt', 'mobility', 'daily_new_cases']
        assert aligned.index.name == 'date'
        # rt covers 05-03..05-08, mobility starts 05-04 with 05-06 absent
        expected = pd.to_datetime(['2020-05-04', '2020-05-05', '2020-05-07', '2020-05-08'])
        assert aligned.index.equals(pd.DatetimeIndex(expected, name='date'))
        assert aligned['daily_new_cases'].loc['2020-05-04'] == pytest.approx(
            self.panel.daily_new_cases().loc['2020-05-04']
        )

    def test_no_overlap(self):
        rt = dated_series('2021-01-01', [1.0] * 5, 'rt')
        with pytest.raises(NoOverlap):
            align(self.panel, self.mobility, rt)

class TestCountryPanel:
    """Test panel invariants"""

    def test_negative_counts_rejected(self):
        with pytest.raises(InvalidParameters):
            make_panel([1, 2, 3], recovered=[0, -1, 0])

    def test_mismatched_dates_rejected(self):
        with pytest.raises(InvalidParameters):
            CountryPanel(
                country='Testland',
                population=100.0,
                confirmed=dated_series('2020-03-01', [1, 2, 3]),
                recovered=dated_series('2020-03-02', [0, 0, 0]),
                deaths=dated_series('2020-03-01', [0, 0, 0]),
            )

    def test_population_must_be_positive(self):
        with pytest.raises(InvalidParameters):
            make_panel([1, 2, 3], population=0)
