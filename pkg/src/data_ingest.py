"""
Ingestion of the CSSE case feed and the Apple mobility feed

Parses both feeds for one country, applies the smoothing rules (3-day trailing
mean on case counts, 7-day trailing mean on mobility) and aligns series onto a
shared daily calendar.
"""

import re
from dataclasses import dataclass, replace
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import pandas as pd

from .config import Config
from .exceptions import (
    DateGap,
    InvalidParameters,
    MalformedRow,
    NoOverlap,
    NoStreams,
    SeriesTooShort,
    UnknownCountry,
)
from .file_handler import FileHandler
from .logger_config import get_logger
from .series import check_daily

logger = get_logger('data_ingest')

PathLike = Union[str, Path]

CSSE_KEY_COLUMNS = ['Province/State', 'Country/Region', 'Lat', 'Long']
APPLE_KEY_COLUMNS = ['geo_type', 'region', 'transportation_type', 'alternative_name', 'sub-region', 'country']

@dataclass(frozen=True, eq=False)
class CountryPanel:
    """Cumulative case counts for one country on a shared daily calendar"""
    
    country: str
    population: float
    confirmed: pd.Series
    recovered: pd.Series
    deaths: pd.Series
    confirmed_smoothed: Optional[pd.Series] = None
    recovered_smoothed: Optional[pd.Series] = None
    deaths_smoothed: Optional[pd.Series] = None
    
    def __post_init__(self):
        if not self.population > 0:
            raise InvalidParameters(f"{self.country}: population must be > 0, got {self.population}")
        for name in ('confirmed', 'recovered', 'deaths'):
            series = getattr(self, name)
            check_daily(series, f"{self.country} {name}")
            if not series.index.equals(self.confirmed.index):
                raise InvalidParameters(f"{self.country}: {name} does not share the confirmed date range")
            if (series.dropna() < 0).any():
                raise InvalidParameters(f"{self.country}: {name} contains negative counts")
            smoothed = getattr(self, f"{name}_smoothed")
            if smoothed is not None and not smoothed.index.equals(self.confirmed.index):
                raise InvalidParameters(f"{self.country}: {name}_smoothed does not share the raw date range")
    
    @property
    def dates(self) -> pd.DatetimeIndex:
        return self.confirmed.index
    
    @property
    def is_smoothed(self) -> bool:
        return self.confirmed_smoothed is not None
    
    def observed(self, name: str) -> pd.Series:
        """The smoothed series when available, else the raw one"""
        smoothed = getattr(self, f"{name}_smoothed")
        return smoothed if smoothed is not None else getattr(self, name)
    
    def daily_new_cases(self, smoothed: bool = True) -> pd.Series:
        """New cases reported on each date, V(t) - V(t-1), from the second date on"""
        cumulative = self.observed('confirmed') if smoothed else self.confirmed
        return cumulative.diff().iloc[1:].rename('daily_new_cases')

@dataclass(frozen=True, eq=False)
class MobilitySeries:
    """Apple mobility streams for one country (index, baseline 100)"""
    
    country: str
    driving: Optional[pd.Series]
    walking: Optional[pd.Series]
    transit: Optional[pd.Series]
    combined: pd.Series
    combined_smoothed: pd.Series
    
    @property
    def streams(self) -> Dict[str, pd.Series]:
        """Present streams keyed by transportation type"""
        found = {}
        for name in Config.MOBILITY_STREAMS:
            series = getattr(self, name)
            if series is not None:
                found[name] = series
        return found

def _read_feed_csv(path: PathLike) -> pd.DataFrame:
    try:
        return FileHandler().read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.ParserError as e:
        match = re.search(r'line (\d+)', str(e))
        raise MalformedRow(f"{path}: {e}", int(match.group(1)) if match else None) from e

def _parse_date_columns(columns: List[str], fmt: str, path: PathLike) -> pd.DatetimeIndex:
    try:
        dates = pd.DatetimeIndex([datetime.strptime(c.strip(), fmt) for c in columns])
    except ValueError as e:
        raise MalformedRow(f"{path}: unparseable date column ({e})", 1) from e
    check_daily(pd.Series(np.zeros(len(dates)), index=dates), str(path))
    return dates

def _numeric_block(frame: pd.DataFrame, columns: List[str], path: PathLike,
                   allow_empty: bool) -> pd.DataFrame:
    """Convert date cells to floats, reporting the first unparseable cell by file line"""
    block = frame[columns]
    if allow_empty:
        block = block.replace(r'^\s*$', np.nan, regex=True)
    numeric = block.apply(pd.to_numeric, errors='coerce')
    bad = numeric.isna() & block.notna() if allow_empty else numeric.isna()
    if bad.to_numpy().any():
        position = int(np.argmax(bad.to_numpy().any(axis=1)))
        row_label = frame.index[position]
        # header is line 1; pandas rows are numbered from 0
        raise MalformedRow(f"{path}: non-numeric value in row for {frame.iloc[position, :2].tolist()}",
                           int(row_label) + 2)
    return numeric

def _csse_country_series(path: PathLike, country: str, label: str) -> Optional[pd.Series]:
    frame = _read_feed_csv(path)
    missing = [c for c in CSSE_KEY_COLUMNS if c not in frame.columns]
    if missing:
        raise MalformedRow(f"{path}: missing CSSE columns {missing}", 1)
    date_columns = list(frame.columns[len(CSSE_KEY_COLUMNS):])
    if not date_columns:
        raise MalformedRow(f"{path}: no date columns", 1)
    dates = _parse_date_columns(date_columns, '%m/%d/%y', path)
    
    mask = frame['Country/Region'].map(lambda name: Config.same_country(name, country))
    if not mask.any():
        return None
    rows = frame.loc[mask]
    values = _numeric_block(rows, date_columns, path, allow_empty=False)
    
    if (values < 0).to_numpy().any():
        logger.warning(f"{country} {label}: negative province counts clipped to 0")
        values = values.clip(lower=0)
    
    series = pd.Series(values.sum(axis=0).to_numpy(dtype=float), index=dates, name=label)
    logger.debug(f"{country} {label}: {len(rows)} province rows aggregated over {len(dates)} dates")
    return series

def _read_population(path: PathLike, country: str) -> float:
    frame = _read_feed_csv(path)
    lowered = {c.lower(): c for c in frame.columns}
    
    if 'Country_Region' in frame.columns and 'Population' in frame.columns:
        rows = frame[frame['Country_Region'].map(lambda name: Config.same_country(name, country))]
        if rows.empty:
            raise UnknownCountry(f"{country} not found in population table {path}")
        country_level = rows[rows.get('Province_State', pd.Series('', index=rows.index)) == '']
        if 'Admin2' in rows.columns and not country_level.empty:
            country_level = country_level[country_level['Admin2'] == '']
        if country_level.empty:
            country_level = rows
        population = pd.to_numeric(country_level['Population'], errors='coerce').sum()
    
    elif 'country' in lowered and 'population' in lowered:
        name_col, pop_col = lowered['country'], lowered['population']
        rows = frame[frame[name_col].map(lambda name: Config.same_country(name, country))]
        if rows.empty:
            raise UnknownCountry(f"{country} not found in population override {path}")
        population = pd.to_numeric(rows[pop_col], errors='coerce').sum()
    
    else:
        raise MalformedRow(f"{path}: expected UID lookup or (country, population) columns", 1)
    
    if not population > 0:
        raise MalformedRow(f"{path}: population for {country} must be > 0")
    return float(population)

def parse_csse(confirmed_file: PathLike, recovered_file: PathLike, deaths_file: PathLike,
               population_file: PathLike, country: str) -> CountryPanel:
    """
    Parse the CSSE global time-series files for one country
    
    Province rows are summed per date. The three series are trimmed to their
    common date range. A country missing only from the recovered or deaths
    file gets an all-zero series and a warning.
    
    Args:
        confirmed_file: time_series_covid19_confirmed_global.csv layout
        recovered_file: time_series_covid19_recovered_global.csv layout
        deaths_file: time_series_covid19_deaths_global.csv layout
        population_file: UID lookup table or a (country, population) override
        country: Country name in either feed's spelling
        
    Returns:
        CountryPanel with raw cumulative series (smoothed fields unset)
        
    Raises:
        UnknownCountry: if the country is absent from the confirmed file
        MalformedRow: on unparseable rows, with the file line number
        DateGap: if header dates are not consecutive
    """
    canonical = Config.normalize_country(country)
    
    confirmed = _csse_country_series(confirmed_file, canonical, 'confirmed')
    recovered = _csse_country_series(recovered_file, canonical, 'recovered')
    deaths = _csse_country_series(deaths_file, canonical, 'deaths')
    
    if confirmed is None:
        present = [label for label, s in (('recovered', recovered), ('deaths', deaths)) if s is not None]
        raise UnknownCountry(
            f"{country} not found in confirmed feed" + (f" (present in {present})" if present else "")
        )
    
    start = confirmed.index[0]
    end = confirmed.index[-1]
    for series in (recovered, deaths):
        if series is not None:
            start = max(start, series.index[0])
            end = min(end, series.index[-1])
    if start > end:
        raise DateGap(f"{country}: CSSE files share no dates")
    
    dates = pd.date_range(start, end, freq='D')
    if len(dates) != len(confirmed):
        logger.warning(f"{country}: CSSE files trimmed to common range {start.date()}..{end.date()}")
    
    def trimmed(series: Optional[pd.Series], label: str) -> pd.Series:
        if series is None:
            logger.warning(f"{country}: no {label} rows; using zeros")
            return pd.Series(0.0, index=dates, name=label)
        return series.loc[dates]
    
    recovered = trimmed(recovered, 'recovered')
    if (recovered == 0).all():
        logger.warning(f"{country}: recovered feed is all zeros; removed compartment holds deaths only")
    
    panel = CountryPanel(
        country=canonical,
        population=_read_population(population_file, canonical),
        confirmed=trimmed(confirmed, 'confirmed'),
        recovered=recovered,
        deaths=trimmed(deaths, 'deaths')
    )
    logger.info(f"{canonical}: parsed {len(dates)} days, population {panel.population:.0f}")
    return panel

def trailing_mean(series: pd.Series, days: int) -> pd.Series:
    """Trailing rolling mean; the first days-1 dates average the available prefix"""
    return series.rolling(days, min_periods=1).mean()

def full_window(series: pd.Series, days: int) -> pd.Series:
    """
    True where the trailing window holds a value on every date it spans
    
    The first days-1 dates of the series count as full when their shorter
    prefix has no absent value.
    """
    present = series.notna().astype(float).rolling(days, min_periods=1).sum()
    spanned = np.minimum(np.arange(1, len(series) + 1), days)
    return pd.Series(present.to_numpy() == spanned, index=series.index)

def smooth_cases(panel: CountryPanel, days: int = Config.CASE_SMOOTHING_DAYS) -> CountryPanel:
    """
    Fill the smoothed fields with the trailing mean of each cumulative series
    
    Args:
        panel: Parsed panel
        days: Window length (3 by default)
        
    Returns:
        New CountryPanel; raw series are kept unchanged
    """
    if len(panel.confirmed) < days:
        raise SeriesTooShort(f"{panel.country}: need at least {days} days to smooth, got {len(panel.confirmed)}")
    return replace(
        panel,
        confirmed_smoothed=trailing_mean(panel.confirmed, days).rename('confirmed_smoothed'),
        recovered_smoothed=trailing_mean(panel.recovered, days).rename('recovered_smoothed'),
        deaths_smoothed=trailing_mean(panel.deaths, days).rename('deaths_smoothed'),
    )

def interpolate_short_gaps(series: pd.Series, max_gap: int = Config.MAX_INTERPOLATED_GAP_DAYS) -> pd.Series:
    """Linearly fill interior runs of at most max_gap absent days; longer runs stay absent"""
    missing = series.isna()
    if not missing.any():
        return series
    run_id = (missing != missing.shift()).cumsum()
    run_length = missing.groupby(run_id).transform('sum')
    interpolated = series.interpolate(method='linear', limit_area='inside')
    fill = missing & (run_length <= max_gap) & interpolated.notna()
    if fill.any():
        logger.warning(f"interpolated {int(fill.sum())} absent days in {series.name}")
    return series.where(~fill, interpolated)

def parse_mobility(file: PathLike, country: str) -> MobilitySeries:
    """
    Parse the Apple mobility trends file for one country
    
    Args:
        file: applemobilitytrends layout (geo_type, region, transportation_type,
            alternative_name, sub-region, country, then one column per ISO date)
        country: Country name in either feed's spelling
        
    Returns:
        MobilitySeries with the present streams, their per-date mean and its
        7-day trailing mean
        
    Raises:
        UnknownCountry: if no country/region row matches
        NoStreams: if none of driving, walking, transit is present
    """
    frame = _read_feed_csv(file)
    missing = [c for c in ('geo_type', 'region', 'transportation_type') if c not in frame.columns]
    if missing:
        raise MalformedRow(f"{file}: missing mobility columns {missing}", 1)
    date_columns = [c for c in frame.columns if c not in APPLE_KEY_COLUMNS]
    if not date_columns:
        raise MalformedRow(f"{file}: no date columns", 1)
    
    try:
        raw_dates = pd.DatetimeIndex([datetime.strptime(c.strip(), '%Y-%m-%d') for c in date_columns])
    except ValueError as e:
        raise MalformedRow(f"{file}: unparseable date column ({e})", 1) from e
    # the feed skips days (e.g. an outage); those become absent values
    dates = pd.date_range(raw_dates.min(), raw_dates.max(), freq='D')
    
    canonical = Config.normalize_country(country)
    mask = (frame['geo_type'].str.strip() == 'country/region') & \
        frame['region'].map(lambda name: Config.same_country(name, canonical))
    rows = frame.loc[mask]
    if rows.empty:
        raise UnknownCountry(f"{country} not found in mobility feed {file}")
    
    values = _numeric_block(rows, date_columns, file, allow_empty=True)
    streams: Dict[str, pd.Series] = {}
    for position, label in enumerate(rows.index):
        stream = rows.at[label, 'transportation_type'].strip().lower()
        if stream not in Config.MOBILITY_STREAMS:
            logger.warning(f"{canonical}: ignoring unknown mobility stream '{stream}'")
            continue
        series = pd.Series(values.iloc[position].to_numpy(dtype=float), index=raw_dates, name=stream)
        streams[stream] = series.reindex(dates)
    
    if not streams:
        raise NoStreams(f"{canonical}: no driving, walking or transit stream in {file}")
    
    combined = pd.DataFrame(streams).mean(axis=1, skipna=True).rename('combined')
    combined = interpolate_short_gaps(combined)
    smoothed = trailing_mean(combined, Config.MOBILITY_SMOOTHING_DAYS)
    # absent days, and the days whose window still reaches back into a gap, stay absent
    smoothed = smoothed.where(full_window(combined, Config.MOBILITY_SMOOTHING_DAYS)).rename('combined_smoothed')
    
    logger.info(f"{canonical}: mobility streams {sorted(streams)} over {len(dates)} days")
    return MobilitySeries(
        country=canonical,
        driving=streams.get('driving'),
        walking=streams.get('walking'),
        transit=streams.get('transit'),
        combined=combined,
        combined_smoothed=smoothed
    )

def align(panel: CountryPanel, mobility: MobilitySeries, rt) -> pd.DataFrame:
    """
    Join R_t, smoothed mobility and smoothed daily new cases on shared dates
    
    Args:
        panel: Case panel (smoothed series used when present)
        mobility: Parsed mobility
        rt: RtResult or a DatedSeries of R_t
        
    Returns:
        DataFrame indexed by date with columns rt, mobility, daily_new_cases;
        rows with any absent value are dropped
        
    Raises:
        NoOverlap: if no date carries all three values
    """
    rt_series = getattr(rt, 'rt', rt)
    frame = pd.concat(
        {
            'rt': rt_series,
            'mobility': mobility.combined_smoothed,
            'daily_new_cases': panel.daily_new_cases(smoothed=True),
        },
        axis=1,
        join='inner'
    )
    aligned = frame.dropna()
    if aligned.empty:
        raise NoOverlap(f"{panel.country}: R_t, mobility and case series share no complete dates")
    
    dropped = len(frame) - len(aligned)
    logger.info(f"{panel.country}: aligned {len(aligned)} rows ({dropped} dropped for absent values)")
    aligned.index.name = 'date'
    return aligned
