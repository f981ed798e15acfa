"""
Shared fixtures for the rtkit test suite
"""

import os
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.data_ingest import CountryPanel
from src.seir_model import SeirParams, SeirState, integrate
from src.series import dated_series
from src.snapshot_manager import SnapshotManager

FIXTURES_DIR = Path(__file__).parent / 'fixtures'

SNAPSHOT_DATE = '2021-01-15'

UID_HEADER = "UID,iso2,iso3,code3,FIPS,Admin2,Province_State,Country_Region,Lat,Long_,Combined_Key,Population"
APPLE_HEADER = "geo_type,region,transportation_type,alternative_name,sub-region,country"

def make_panel(confirmed: Sequence[float], recovered: Optional[Sequence[float]] = None,
               deaths: Optional[Sequence[float]] = None, population: float = 1e7,
               start: str = '2020-03-01', country: str = 'Testland') -> CountryPanel:
    """Unsmoothed panel from plain value lists (zeros where recovered or deaths are omitted)"""
    n = len(confirmed)
    zeros = [0.0] * n
    return CountryPanel(
        country=country,
        population=population,
        confirmed=dated_series(start, confirmed, 'confirmed'),
        recovered=dated_series(start, recovered if recovered is not None else zeros, 'recovered'),
        deaths=dated_series(start, deaths if deaths is not None else zeros, 'deaths'),
    )

def seir_cumulative(schedule: List[Tuple[float, int]], n_pop: float = 1e7,
                    initial_infected: float = 500.0) -> np.ndarray:
    """
    Cumulative infected E+I+R of a SEIR run with piecewise-constant beta

    Args:
        schedule: (beta, days) segments run back to back
        n_pop: Population
        initial_infected: Infectious count on day 0 (nobody exposed or removed)

    Returns:
        Array with one value per day mark, sum(days) + 1 long
    """
    state = SeirState(n_pop - initial_infected, 0.0, initial_infected, 0.0)
    values = [state.e + state.i + state.r]
    for beta, days in schedule:
        traj = integrate(state, SeirParams(beta=beta, n_pop=n_pop), days)
        values.extend(traj.cumulative_values()[1:].tolist())
        state = traj.final_state
    return np.maximum.accumulate(np.array(values))

def csse_dates(dates: pd.DatetimeIndex) -> List[str]:
    return [f"{d.month}/{d.day}/{d.strftime('%y')}" for d in dates]

def write_csse(path: Path, rows: List[Tuple[str, str, Sequence[float]]], start: str = '2020-02-01') -> Path:
    """Write a CSSE global time-series file from (province, country, values) rows"""
    n = len(rows[0][2])
    dates = pd.date_range(start, periods=n, freq='D')
    lines = [",".join(['Province/State', 'Country/Region', 'Lat', 'Long'] + csse_dates(dates))]
    for province, country, values in rows:
        name = f'"{country}"' if ',' in country else country
        cells = [str(int(round(v))) for v in values]
        lines.append(",".join([province, name, '0.0', '0.0'] + cells))
    path.write_text("\n".join(lines) + "\n", encoding='utf-8')
    return path

def write_uid_table(path: Path, populations: Dict[str, float]) -> Path:
    lines = [UID_HEADER]
    for uid, (country, population) in enumerate(populations.items(), start=1):
        name = f'"{country}"' if ',' in country else country
        lines.append(f"{uid},XX,XXX,{uid},,,,{name},0.0,0.0,{name},{int(population)}")
    path.write_text("\n".join(lines) + "\n", encoding='utf-8')
    return path

def write_mobility(path: Path, rows: List[Tuple[str, str, Sequence[float]]], start: str = '2020-02-01') -> Path:
    """Write an Apple mobility file from (region, transportation_type, values) country rows"""
    n = len(rows[0][2])
    dates = pd.date_range(start, periods=n, freq='D')
    lines = [",".join([APPLE_HEADER] + [d.strftime('%Y-%m-%d') for d in dates])]
    for region, stream, values in rows:
        cells = ["" if np.isnan(v) else repr(float(v)) for v in values]
        lines.append(",".join(['country/region', region, stream, '', '', ''] + cells))
    path.write_text("\n".join(lines) + "\n", encoding='utf-8')
    return path

def build_snapshot(data_dir: Path, files: Dict[str, Tuple[str, Path]],
                   snapshot_date: str = SNAPSHOT_DATE) -> dict:
    """Store files (role -> (feed, source path)) as a snapshot and write its manifest"""
    manager = SnapshotManager(str(data_dir))
    entries = []
    for role, (feed, source) in files.items():
        entries.append(manager.store_file(feed, role, snapshot_date, source.name, source.read_bytes()))
    return manager.write_manifest(snapshot_date, entries, retrieved_at='2021-01-15T00:00:00+00:00')

@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES_DIR

@pytest.fixture
def synthetic_snapshot(tmp_path) -> Path:
    """
    Data directory with one complete snapshot of three synthetic countries

    Alphaland grows from 500 infectious under beta = 0.1 and has all three
    mobility streams. Betaland never passes 1000 cases. Gammaland has cases
    but no mobility rows.
    """
    days = 70
    raw = tmp_path / 'raw_feeds'
    raw.mkdir()

    alpha = seir_cumulative([(0.1, days - 1)], n_pop=5e6, initial_infected=500.0)
    gamma = seir_cumulative([(0.15, days - 1)], n_pop=2e6, initial_infected=400.0)
    beta = np.linspace(10, 600, days)
    t = np.arange(days)

    write_csse(raw / 'time_series_covid19_confirmed_global.csv', [
        ('North', 'Alphaland', alpha * 0.4),
        ('South', 'Alphaland', alpha * 0.6),
        ('', 'Betaland', beta),
        ('', 'Gammaland', gamma),
    ])
    write_csse(raw / 'time_series_covid19_recovered_global.csv', [
        ('', 'Alphaland', alpha * 0.05),
        ('', 'Betaland', beta * 0.1),
        ('', 'Gammaland', np.zeros(days)),
    ])
    write_csse(raw / 'time_series_covid19_deaths_global.csv', [
        ('', 'Alphaland', alpha * 0.01),
        ('', 'Betaland', np.zeros(days)),
        ('', 'Gammaland', gamma * 0.01),
    ])
    write_uid_table(raw / 'UID_ISO_FIPS_LookUp_Table.csv', {
        'Alphaland': 5e6,
        'Betaland': 1e6,
        'Gammaland': 2e6,
    })
    write_mobility(raw / 'applemobilitytrends-2022-04-12.csv', [
        ('Alphaland', 'driving', 120 - 0.5 * t + 5 * np.sin(t / 3.0)),
        ('Alphaland', 'walking', 100 - 0.4 * t + 4 * np.cos(t / 4.0)),
        ('Alphaland', 'transit', 80 - 0.3 * t + 3 * np.sin(t / 5.0)),
        ('Betaland', 'driving', 100 + 0.0 * t),
    ])

    data_dir = tmp_path / 'data'
    build_snapshot(data_dir, {
        'confirmed': ('csse', raw / 'time_series_covid19_confirmed_global.csv'),
        'recovered': ('csse', raw / 'time_series_covid19_recovered_global.csv'),
        'deaths': ('csse', raw / 'time_series_covid19_deaths_global.csv'),
        'population': ('csse', raw / 'UID_ISO_FIPS_LookUp_Table.csv'),
        'mobility': ('mobility', raw / 'applemobilitytrends-2022-04-12.csv'),
    })
    return data_dir
