"""
Per-country analysis engine for the rtkit reproduction number toolkit
"""

import logging
import time
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, Iterable, List, Optional, Union

import numpy as np
import pandas as pd

from .config import Config
from .data_ingest import CountryPanel, align, parse_csse, parse_mobility, smooth_cases
from .exceptions import InvalidParameters, NoStreams, SeriesTooShort, UnknownCountry
from .logger_config import RunLogger, get_logger
from .model_free import MfConfig, rt_model_free
from .rt_estimator import EstimatorConfig, RtResult, estimate_rt
from .series import DateLike, iso_dates, to_timestamp
from .snapshot_manager import Snapshot
from .stats import CorrelationReport, ShiftSweep, change_rate, correlation_matrix, shift_sweep

@dataclass
class RtOutcome:
    """R_t results for one country"""
    
    country: str
    panel: CountryPanel
    result: RtResult
    rt_mf: pd.Series
    table: pd.DataFrame
    summary: Dict[str, Any]

@dataclass
class CorrelationOutcome:
    """Correlation results for one country"""
    
    country: str
    rt: RtOutcome
    aligned: pd.DataFrame
    report: CorrelationReport
    sweep: ShiftSweep
    summary: Dict[str, Any]

@dataclass
class CountryFailure:
    """A country that produced no output, with the reason"""
    
    country: str
    stage: str
    reason: str
    skipped: bool = False

@dataclass
class RunResults:
    outcomes: Dict[str, Union[RtOutcome, CorrelationOutcome]] = field(default_factory=dict)
    failures: List[CountryFailure] = field(default_factory=list)
    
    @property
    def ok(self) -> bool:
        return not self.failures
    
    def skipped(self) -> List[CountryFailure]:
        return [f for f in self.failures if f.skipped]

def truncate_panel(panel: CountryPanel, end: pd.Timestamp) -> CountryPanel:
    """Drop dates after end (smoothed fields are dropped too and recomputed by the caller)"""
    if end < panel.dates[0]:
        raise InvalidParameters(
            f"{panel.country}: end date {end.date()} precedes the data start {panel.dates[0].date()}"
        )
    if end >= panel.dates[-1]:
        return panel
    return replace(
        panel,
        confirmed=panel.confirmed.loc[:end],
        recovered=panel.recovered.loc[:end],
        deaths=panel.deaths.loc[:end],
        confirmed_smoothed=None,
        recovered_smoothed=None,
        deaths_smoothed=None,
    )

def build_rt_table(panel: CountryPanel, result: RtResult, rt_mf: pd.Series) -> pd.DataFrame:
    """
    Plot-ready per-day table from t0 to the last panel date
    
    Columns: date, days_since_t0, rt_seir, rt_mf, daily_new_cases_per_million,
    converged. Days without an estimate are left empty.
    """
    dates = pd.date_range(result.t0, panel.dates[-1], freq='D')
    daily = panel.daily_new_cases(smoothed=True).reindex(dates)
    per_million = (daily * 1e6 / panel.population).round(3)
    return pd.DataFrame({
        'date': iso_dates(dates),
        'days_since_t0': np.arange(len(dates)),
        'rt_seir': result.rt.reindex(dates).to_numpy(dtype=float),
        'rt_mf': rt_mf.reindex(dates).to_numpy(dtype=float),
        'daily_new_cases_per_million': per_million.to_numpy(dtype=float),
        'converged': result.converged.reindex(dates).astype('boolean').array,
    })

def build_aligned_table(panel: CountryPanel, result: RtResult, aligned: pd.DataFrame) -> pd.DataFrame:
    """
    Per-day rows behind the correlation, on the days since t0 axis

    Columns: date, days_since_t0, rt, drt_dt, mobility,
    daily_new_cases_per_million. Only dates used by the correlation appear.
    """
    dates = aligned.index
    return pd.DataFrame({
        'date': iso_dates(dates),
        'days_since_t0': (dates - result.t0).days.to_numpy(),
        'rt': aligned['rt'].to_numpy(dtype=float),
        'drt_dt': aligned['drt_dt'].to_numpy(dtype=float),
        'mobility': aligned['mobility'].to_numpy(dtype=float),
        'daily_new_cases_per_million': (aligned['daily_new_cases'] * 1e6 / panel.population).round(3).to_numpy(dtype=float),
    })

def summarize_rt(result: RtResult) -> Dict[str, Any]:
    """Headline numbers of one R_t series"""
    rt = result.rt.dropna()
    median = float(rt.median()) if len(rt) else np.nan
    return {
        'country': result.country,
        't0': result.t0.strftime('%Y-%m-%d'),
        'n_estimates': int(len(rt)),
        'first_rt': float(rt.iloc[0]) if len(rt) else np.nan,
        'median_rt': median,
        'final_rt': float(rt.iloc[-1]) if len(rt) else np.nan,
        'days_below_one': int((rt < 1).sum()),
        'first_exceeds_median': bool(len(rt) and rt.iloc[0] > median),
        'failed_windows': len(result.failed_windows),
    }

def build_rt_comparison(outcomes: Iterable[RtOutcome]) -> pd.DataFrame:
    """R_t of every country against days since its own t0"""
    columns = {}
    for outcome in outcomes:
        table = outcome.table
        columns[outcome.country] = pd.Series(table['rt_seir'].to_numpy(), index=table['days_since_t0'].to_numpy())
    if not columns:
        return pd.DataFrame({'days_since_t0': []})
    frame = pd.DataFrame(columns)
    frame.index.name = 'days_since_t0'
    return frame.sort_index().reset_index()

class AnalysisPipeline:
    """Run estimation and correlation per country over one snapshot"""
    
    def __init__(self, snapshot: Snapshot, estimator: Optional[EstimatorConfig] = None,
                 mf: Optional[MfConfig] = None, end_date: Optional[DateLike] = None,
                 shifts: Iterable[int] = range(Config.DEFAULT_SHIFTS[0], Config.DEFAULT_SHIFTS[1] + 1),
                 period_start: Optional[DateLike] = None, period_end: Optional[DateLike] = None,
                 workers: int = Config.DEFAULT_WORKERS, base_logger: Optional[logging.Logger] = None):
        self.snapshot = snapshot
        self.estimator = estimator or EstimatorConfig()
        self.mf = mf or MfConfig()
        self.end_date = to_timestamp(end_date) if end_date is not None else None
        self.shifts = list(shifts)
        self.period_start = to_timestamp(period_start) if period_start is not None else None
        self.period_end = to_timestamp(period_end) if period_end is not None else None
        self.workers = max(1, int(workers))
        self.logger = get_logger('pipeline')
        self.base_logger = base_logger or self.logger
        self.run_logger = RunLogger(self.base_logger)
        
        self.stats = {
            'countries': 0,
            'succeeded': 0,
            'failed': 0,
            'skipped': 0,
            'processing_time_seconds': None,
        }
    
    def load_panel(self, country: str) -> CountryPanel:
        """Parse, truncate to the end date, and smooth one country's case panel"""
        panel = parse_csse(
            self.snapshot.path('confirmed'),
            self.snapshot.path('recovered'),
            self.snapshot.path('deaths'),
            self.snapshot.path('population'),
            country
        )
        if self.end_date is not None:
            panel = truncate_panel(panel, self.end_date)
        return smooth_cases(panel)
    
    def rt_for_country(self, country: str, log: RunLogger) -> RtOutcome:
        panel = self.load_panel(country)
        result = estimate_rt(panel, self.estimator, self.end_date)
        for diagnostic in result.diagnostics:
            if diagnostic.kind != 'clamped':
                log.warning(f"{panel.country}: {diagnostic.date.date()} {diagnostic.kind}: {diagnostic.message}")
        
        daily = panel.daily_new_cases(smoothed=not self.mf.use_raw_cases)
        negative = int((daily < 0).sum())
        if negative:
            log.warning(f"{panel.country}: {negative} negative daily case counts clamped to 0")
            daily = daily.clip(lower=0)
        try:
            rt_mf = rt_model_free(daily, self.mf)
        except SeriesTooShort as e:
            log.warning(f"{panel.country}: no model-free estimate ({e})")
            rt_mf = pd.Series(dtype=float, name='rt_mf')
        if rt_mf.attrs.get('zero_denominator_days'):
            log.warning(f"{panel.country}: {rt_mf.attrs['zero_denominator_days']} model-free dates omitted (zero denominator)")
        
        summary = summarize_rt(result)
        log.info(
            f"{panel.country}: t0 {summary['t0']}, {summary['n_estimates']} R_t estimates, "
            f"first {summary['first_rt']:.3f}, median {summary['median_rt']:.3f}"
        )
        return RtOutcome(
            country=panel.country,
            panel=panel,
            result=result,
            rt_mf=rt_mf,
            table=build_rt_table(panel, result, rt_mf),
            summary=summary
        )
    
    def correlate_for_country(self, country: str, log: RunLogger) -> Union[CorrelationOutcome, CountryFailure]:
        rt_outcome = self.rt_for_country(country, log)
        try:
            mobility = parse_mobility(self.snapshot.path('mobility'), rt_outcome.country)
        except (UnknownCountry, NoStreams) as e:
            log.warning(f"{country}: skipped, {e}")
            return CountryFailure(country, 'correlate', f"{type(e).__name__}: {e}", skipped=True)

        rt = rt_outcome.result.rt.loc[self.period_start:self.period_end]
        aligned = align(rt_outcome.panel, mobility, rt)
        # derivative taken on the full series so period edges keep central differences
        aligned['drt_dt'] = change_rate(rt_outcome.result.rt).reindex(aligned.index)
        
        report = correlation_matrix(aligned, rt_outcome.country)
        sweep = shift_sweep(aligned['rt'], mobility.combined_smoothed, self.shifts)
        best = sweep.best_shift()
        summary = {
            'country': rt_outcome.country,
            'status': 'ok',
            'reason': '',
            'rt_mobility': report.cell('rt', 'mobility'),
            'drt_dt_mobility': report.cell('drt_dt', 'mobility'),
            'rt_drt_dt': report.cell('rt', 'drt_dt'),
            'n_obs': int(report.n_obs.loc['rt', 'mobility']),
            'best_shift': best,
            'best_shift_r_s': sweep.at(best) if best is not None else np.nan,
        }
        log.info(
            f"{rt_outcome.country}: rt-mobility r_s {summary['rt_mobility']:.3f} "
            f"over {summary['n_obs']} days, strongest at shift {best}"
        )
        return CorrelationOutcome(
            country=rt_outcome.country,
            rt=rt_outcome,
            aligned=aligned,
            report=report,
            sweep=sweep,
            summary=summary
        )
    
    def _run_one(self, task: Callable[[str, RunLogger], Any], stage: str, country: str):
        log = RunLogger(self.base_logger)
        try:
            return task(country, log), log
        except Exception as e:
            log.error(f"{country}: {type(e).__name__}: {e}")
            self.logger.debug(traceback.format_exc())
            return CountryFailure(country, stage, f"{type(e).__name__}: {e}"), log
    
    def _run(self, task: Callable[[str, RunLogger], Any], stage: str, countries: List[str]) -> RunResults:
        start_time = time.time()
        self.stats['countries'] = len(countries)
        self.run_logger.info(f"{stage}: {len(countries)} countries, snapshot {self.snapshot.date}")
        
        with ThreadPoolExecutor(max_workers=min(self.workers, max(len(countries), 1))) as executor:
            futures = [executor.submit(self._run_one, task, stage, country) for country in countries]
            collected = [future.result() for future in futures]
        
        results = RunResults()
        # merged in request order so the run log does not depend on scheduling
        for country, (outcome, log) in zip(countries, collected):
            self.run_logger.merge(log)
            if isinstance(outcome, CountryFailure):
                results.failures.append(outcome)
            else:
                results.outcomes[outcome.country] = outcome
        
        self.stats['succeeded'] = len(results.outcomes)
        self.stats['skipped'] = len(results.skipped())
        self.stats['failed'] = len(results.failures) - self.stats['skipped']
        self.stats['processing_time_seconds'] = time.time() - start_time
        self.run_logger.info(
            f"{stage}: {self.stats['succeeded']} succeeded, {self.stats['failed']} failed, "
            f"{self.stats['skipped']} skipped"
        )
        return results
    
    def run_rt(self, countries: List[str]) -> RunResults:
        return self._run(self.rt_for_country, 'rt', countries)
    
    def run_correlate(self, countries: List[str]) -> RunResults:
        return self._run(self.correlate_for_country, 'correlate', countries)
