"""
Command-line surface for the rtkit reproduction number toolkit

    rtkit fetch      download the CSSE and Apple feeds into a dated snapshot
    rtkit rt         per-country R_t tables (SEIR-based and model-free)
    rtkit correlate  Spearman matrices and shift sweeps against mobility

Settings come from an optional JSON file given with --config; flags override
the file, and RTKIT_DATA_DIR is the fallback for the data directory.
"""

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from . import __version__
from .config import Config
from .exceptions import InvalidParameters, RtkitError
from .feed_fetchers import FeedFetcherFactory
from .file_handler import FileHandler
from .logger_config import get_logger, setup_logging
from .model_free import MfConfig
from .pipeline import AnalysisPipeline, RunResults, build_aligned_table, build_rt_comparison
from .rt_estimator import EstimatorConfig
from .snapshot_manager import Snapshot, SnapshotManager
from .stats import SHIFT_CONVENTION, parse_shift_range
from .utils import country_slug, format_duration, parse_iso_date

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

SUMMARY_COLUMNS = [
    'country', 'status', 'reason', 't0', 'n_estimates', 'first_rt', 'median_rt',
    'final_rt', 'days_below_one', 'first_exceeds_median', 'failed_windows',
]
CORRELATION_SUMMARY_COLUMNS = [
    'country', 'status', 'reason', 'rt_mobility', 'drt_dt_mobility', 'rt_drt_dt',
    'n_obs', 'best_shift', 'best_shift_r_s',
]

def _iso(value: Optional[str], name: str) -> Optional[str]:
    if value is None or value == "":
        return None
    try:
        return parse_iso_date(value).isoformat()
    except (ValueError, OverflowError) as e:
        raise InvalidParameters(f"{name} must be an ISO date, got {value!r}") from e

@dataclass
class RunConfig:
    """Settings of one rtkit invocation"""

    countries: List[str] = field(default_factory=Config.get_default_countries)
    data_dir: Optional[str] = None
    snapshot_date: Optional[str] = None
    end_date: str = Config.DEFAULT_END_DATE
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    mf: MfConfig = field(default_factory=MfConfig)
    shifts: Tuple[int, int] = Config.DEFAULT_SHIFTS
    output_dir: str = Config.DEFAULT_OUTPUT_DIR
    output_format: str = 'csv'
    period_start: Optional[str] = None
    period_end: Optional[str] = None
    workers: int = Config.DEFAULT_WORKERS
    log_level: str = Config.LOG_LEVEL
    log_file: Optional[str] = None

    def __post_init__(self):
        self.data_dir = Config.get_data_dir(self.data_dir)
        self.countries = [c.strip() for c in self.countries if c and c.strip()]
        if not self.countries:
            raise InvalidParameters("countries must not be empty")
        self.output_format = self.output_format.lower()
        if self.output_format not in FileHandler.SUPPORTED_FORMATS:
            raise InvalidParameters(f"output_format must be csv or json, got {self.output_format!r}")
        self.snapshot_date = _iso(self.snapshot_date, 'snapshot_date')
        self.end_date = _iso(self.end_date, 'end_date')
        self.period_start = _iso(self.period_start, 'period_start')
        self.period_end = _iso(self.period_end, 'period_end')
        if self.period_start and self.period_end and self.period_start > self.period_end:
            raise InvalidParameters(f"period_start {self.period_start} is after period_end {self.period_end}")
        lo, hi = (int(v) for v in self.shifts)
        if lo > hi:
            raise InvalidParameters(f"shift range {lo}..{hi} is empty")
        self.shifts = (lo, hi)
        if self.workers < 1:
            raise InvalidParameters(f"workers must be >= 1, got {self.workers}")

    @property
    def shift_range(self) -> range:
        return range(self.shifts[0], self.shifts[1] + 1)

    def result_settings(self, snapshot_date: Optional[str] = None) -> Dict[str, Any]:
        """Everything that can change an output value; paths and logging excluded"""
        return {
            'countries': self.countries,
            'snapshot': snapshot_date or self.snapshot_date,
            'end_date': self.end_date,
            'estimator': self.estimator.to_dict(),
            'mf': self.mf.to_dict(),
            'shifts': list(self.shifts),
            'period_start': self.period_start,
            'period_end': self.period_end,
            'output_format': self.output_format,
        }

    def config_hash(self, snapshot_date: Optional[str] = None) -> str:
        canonical = json.dumps(self.result_settings(snapshot_date), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()[:12]

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "RunConfig":
        values = dict(values)
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(values) - known)
        if unknown:
            raise InvalidParameters(f"unknown config keys: {unknown}")
        if isinstance(values.get('estimator'), dict):
            values['estimator'] = EstimatorConfig.from_dict(values['estimator'])
        if isinstance(values.get('mf'), dict):
            values['mf'] = MfConfig(**values['mf'])
        if isinstance(values.get('shifts'), str):
            shift_range = parse_shift_range(values['shifts'])
            values['shifts'] = (shift_range.start, shift_range.stop - 1)
        if isinstance(values.get('countries'), str):
            values['countries'] = values['countries'].split(',')
        return cls(**values)

    @classmethod
    def from_file(cls, path: str) -> Dict[str, Any]:
        """Read the raw settings mapping of a JSON config file"""
        try:
            with open(path, 'r', encoding='utf-8') as f:
                values = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise InvalidParameters(f"cannot read config file {path}: {e}") from e
        if not isinstance(values, dict):
            raise InvalidParameters(f"config file {path} must hold a JSON object")
        return values

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        """Config file first, then flags on top"""
        values = cls.from_file(args.config) if args.config else {}
        overrides = {
            'countries': args.countries,
            'data_dir': args.data_dir,
            'snapshot_date': args.snapshot,
            'end_date': args.end_date,
            'shifts': args.shifts,
            'output_dir': args.output_dir,
            'output_format': args.format,
            'period_start': args.period_start,
            'period_end': args.period_end,
            'workers': args.workers,
            'log_level': args.log_level,
            'log_file': args.log_file,
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls.from_dict(values)

class RtkitApp:
    """Runs one command and writes its output files"""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.logger = get_logger('cli')
        self.file_handler = FileHandler()
        self.snapshots = SnapshotManager(cfg.data_dir)
        self.output_dir = Path(cfg.output_dir)

    def _metadata(self, snapshot: Snapshot, *extra: Tuple[str, str]) -> List[Tuple[str, str]]:
        return [
            ('tool', f"rtkit {__version__}"),
            ('config_hash', self.cfg.config_hash(snapshot.date)),
            ('snapshot', snapshot.date),
            *extra,
        ]

    def _write(self, df: pd.DataFrame, name: str, metadata: Sequence[Tuple[str, str]]) -> str:
        path = self.output_dir / f"{name}.{self.cfg.output_format}"
        return self.file_handler.export_table(df, path, metadata, self.cfg.output_format)

    def _write_run_log(self, pipeline: AnalysisPipeline, snapshot: Snapshot, command: str):
        header = [f"{key}: {value}" for key, value in self._metadata(snapshot, ('command', command))]
        pipeline.run_logger.save_log_file(str(self.output_dir / 'run_log.txt'), header)
        stats = pipeline.run_logger.get_stats()
        self.logger.info(
            f"{command} run log: {stats['total_entries']} entries, "
            f"{stats['errors']} errors, {stats['warnings']} warnings"
        )

    def _pipeline(self, snapshot: Snapshot) -> AnalysisPipeline:
        return AnalysisPipeline(
            snapshot,
            estimator=self.cfg.estimator,
            mf=self.cfg.mf,
            end_date=self.cfg.end_date,
            shifts=self.cfg.shift_range,
            period_start=self.cfg.period_start,
            period_end=self.cfg.period_end,
            workers=self.cfg.workers,
            base_logger=self.logger
        )

    def _failure_rows(self, results: RunResults) -> List[Dict[str, Any]]:
        return [
            {
                'country': failure.country,
                'status': 'skipped' if failure.skipped else 'failed',
                'reason': failure.reason,
            }
            for failure in results.failures
        ]

    def _ordered(self, rows: List[Dict[str, Any]], columns: List[str]) -> pd.DataFrame:
        """Rows in the order countries were requested"""
        order = {Config.normalize_country(c).lower(): i for i, c in enumerate(self.cfg.countries)}
        rows = sorted(rows, key=lambda row: order.get(Config.normalize_country(row['country']).lower(), len(order)))
        return pd.DataFrame(rows, columns=columns)

    def cmd_fetch(self) -> Dict[str, Any]:
        """
        Download every feed into the snapshot for cfg.snapshot_date (today by default)

        Returns:
            The manifest written; its 'complete' flag is False if any file failed
        """
        snapshot_date = self.cfg.snapshot_date or date.today().isoformat()
        self.logger.info(f"Fetching feeds into snapshot {snapshot_date}")
        entries: List[Dict[str, Any]] = []
        failures: List[Dict[str, Any]] = []
        for feed in FeedFetcherFactory.get_supported_feeds():
            fetcher = FeedFetcherFactory.create_fetcher(feed)
            report = fetcher.fetch(self.snapshots, snapshot_date)
            entries.extend(report.entries)
            failures.extend(report.failures)
        return self.snapshots.write_manifest(snapshot_date, entries, failures)

    def cmd_rt(self) -> RunResults:
        """Estimate R_t per country and write rt_<country>, rt_summary and rt_comparison"""
        snapshot = self.snapshots.resolve(self.cfg.snapshot_date)
        pipeline = self._pipeline(snapshot)
        results = pipeline.run_rt(self.cfg.countries)

        for outcome in results.outcomes.values():
            metadata = self._metadata(
                snapshot,
                ('country', outcome.country),
                ('population', f"{outcome.panel.population:.0f}"),
                ('t0', outcome.summary['t0']),
            )
            self._write(outcome.table, f"rt_{country_slug(outcome.country)}", metadata)

        rows = [dict(outcome.summary, status='ok', reason='') for outcome in results.outcomes.values()]
        rows.extend(self._failure_rows(results))
        self._write(self._ordered(rows, SUMMARY_COLUMNS), 'rt_summary', self._metadata(snapshot))
        self._write(build_rt_comparison(results.outcomes.values()), 'rt_comparison', self._metadata(snapshot))
        self._write_run_log(pipeline, snapshot, 'rt')

        self.logger.info(
            f"rt finished in {format_duration(pipeline.stats['processing_time_seconds'] or 0)}: "
            f"{len(results.outcomes)} of {len(self.cfg.countries)} countries written to {self.output_dir}"
        )
        return results

    def cmd_correlate(self) -> RunResults:
        """Correlate R_t with mobility per country and write matrices, sweeps, aligned days and a summary"""
        snapshot = self.snapshots.resolve(self.cfg.snapshot_date)
        pipeline = self._pipeline(snapshot)
        results = pipeline.run_correlate(self.cfg.countries)

        for outcome in results.outcomes.values():
            start, end = outcome.report.period
            period = f"{start.date()}..{end.date()}"
            slug = country_slug(outcome.country)
            self._write(
                outcome.report.to_frame(),
                f"correlation_{slug}",
                self._metadata(snapshot, ('country', outcome.country), ('period', period))
            )
            self._write(
                outcome.sweep.to_frame(),
                f"shift_sweep_{slug}",
                self._metadata(
                    snapshot,
                    ('country', outcome.country),
                    ('period', period),
                    ('shift_convention', SHIFT_CONVENTION),
                )
            )
            self._write(
                build_aligned_table(outcome.rt.panel, outcome.rt.result, outcome.aligned),
                f"aligned_{slug}",
                self._metadata(
                    snapshot,
                    ('country', outcome.country),
                    ('period', period),
                    ('t0', outcome.rt.summary['t0']),
                )
            )

        coefficients = np.array([o.summary['rt_mobility'] for o in results.outcomes.values()], dtype=float)
        defined = coefficients[~np.isnan(coefficients)]
        negative = f"{int((defined < 0).sum())} of {len(defined)}"
        rows = [dict(outcome.summary) for outcome in results.outcomes.values()]
        rows.extend(self._failure_rows(results))
        summary = self._ordered(rows, CORRELATION_SUMMARY_COLUMNS)
        summary['best_shift'] = summary['best_shift'].astype('Int64')
        self._write(
            summary,
            'correlation_summary',
            self._metadata(snapshot, ('negative_rt_mobility', negative), ('shift_convention', SHIFT_CONVENTION))
        )
        self._write_run_log(pipeline, snapshot, 'correlate')

        for failure in results.skipped():
            self.logger.warning(f"skipped {failure.country}: {failure.reason}")
        self.logger.info(f"correlate finished: rt-mobility coefficient negative for {negative} countries")
        return results

    def run(self, command: str) -> int:
        try:
            if command == 'fetch':
                manifest = self.cmd_fetch()
                return EXIT_OK if manifest['complete'] else EXIT_FAILURE
            if command == 'rt':
                return EXIT_OK if self.cmd_rt().ok else EXIT_FAILURE
            if command == 'correlate':
                return EXIT_OK if self.cmd_correlate().ok else EXIT_FAILURE
        except RtkitError as e:
            self.logger.error(f"{command} failed: {e}")
            return EXIT_FAILURE
        raise InvalidParameters(f"unknown command {command!r}")

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help="JSON config file; flags override its values")
    common.add_argument('--countries', help="Comma-separated country names (CSSE or Apple spelling)")
    common.add_argument('--data-dir', help=f"Data directory (default: ${Config.DATA_DIR_ENV} or '{Config.DEFAULT_DATA_DIR}')")
    common.add_argument('--snapshot', help="Snapshot date (ISO); latest complete snapshot when omitted")
    common.add_argument('--end-date', help=f"Last date analysed (default {Config.DEFAULT_END_DATE})")
    common.add_argument('--shifts', help="Inclusive shift range lo..hi in days, e.g. --shifts=-21..21")
    common.add_argument('--period-start', help="First date of the correlation period")
    common.add_argument('--period-end', help="Last date of the correlation period")
    common.add_argument('--output-dir', help=f"Output directory (default '{Config.DEFAULT_OUTPUT_DIR}')")
    common.add_argument('--format', choices=FileHandler.SUPPORTED_FORMATS, help="Output format")
    common.add_argument('--workers', type=int, help=f"Countries processed in parallel (default {Config.DEFAULT_WORKERS})")
    common.add_argument('--log-level', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'], help="Log level")
    common.add_argument('--log-file', help="Log file path; empty string disables file logging")

    parser = argparse.ArgumentParser(
        prog='rtkit',
        description="SEIR-based reproduction number estimation and mobility correlation"
    )
    parser.add_argument('--version', action='version', version=f"rtkit {__version__}")
    subparsers = parser.add_subparsers(dest='command', required=True)
    subparsers.add_parser('fetch', parents=[common], help="Download feeds into a dated snapshot")
    subparsers.add_parser('rt', parents=[common], help="Estimate R_t per country")
    subparsers.add_parser('correlate', parents=[common], help="Correlate R_t with mobility")
    return parser

def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.from_args(args)
    except InvalidParameters as e:
        parser.print_usage(sys.stderr)
        print(f"rtkit: error: {e}", file=sys.stderr)
        return EXIT_USAGE

    setup_logging(cfg.log_level, cfg.log_file)
    return RtkitApp(cfg).run(args.command)
