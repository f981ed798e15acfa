"""
Rank correlation between R_t, its change rate and mobility

Spearman coefficients are the product-moment correlation of average ranks,
so ties are handled without a separate formula. Undefined coefficients
(too few pairs, a constant variable) are reported as NaN, never as 0.
"""

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.stats import rankdata

from .config import Config
from .exceptions import InvalidParameters, SeriesTooShort, TooFewPairs, ZeroVariance
from .logger_config import get_logger
from .series import paired, to_daily

logger = get_logger('stats')

VARIABLES = ('rt', 'drt_dt', 'mobility')

# positive s pairs rt(t) with mobility(t - s)
SHIFT_CONVENTION = "positive shift s pairs rt(t) with mobility(t - s): mobility leads rt by s days"

def _as_series(values) -> pd.Series:
    if isinstance(values, pd.Series):
        return values.astype(float)
    return pd.Series(np.asarray(values, dtype=float))

def spearman(x, y) -> float:
    """
    Spearman rank correlation over the dates where both series are present
    
    Args:
        x, y: Dated series (or plain sequences, paired by position)
        
    Returns:
        r_s in [-1, 1]
        
    Raises:
        TooFewPairs: fewer than 3 paired observations
        ZeroVariance: either variable is constant over the pairs
    """
    pairs = paired(_as_series(x), _as_series(y))
    n = len(pairs)
    if n < Config.MIN_CORRELATION_PAIRS:
        raise TooFewPairs(f"{n} paired observations, need {Config.MIN_CORRELATION_PAIRS}")
    rx = rankdata(pairs['x'].to_numpy(), method='average')
    ry = rankdata(pairs['y'].to_numpy(), method='average')
    if np.ptp(rx) == 0 or np.ptp(ry) == 0:
        raise ZeroVariance("constant variable, rank correlation undefined")
    r = float(np.corrcoef(rx, ry)[0, 1])
    return min(1.0, max(-1.0, r))

def n_pairs(x, y) -> int:
    return len(paired(_as_series(x), _as_series(y)))

def change_rate(rt: pd.Series) -> pd.Series:
    """
    dR_t/dt by central differences, one-sided at the ends
    
    Absent days stay absent and make their neighbours' derivative absent.
    """
    daily = to_daily(rt)
    if daily.notna().sum() < 3:
        raise SeriesTooShort(f"change rate needs 3 values, got {int(daily.notna().sum())}")
    values = daily.to_numpy(dtype=float)
    derivative = np.gradient(values)
    derivative[np.isnan(values)] = np.nan
    result = pd.Series(derivative, index=daily.index, name='drt_dt')
    result.index.name = 'date'
    return result

@dataclass(frozen=True, eq=False)
class CorrelationReport:
    """Spearman matrix over rt, drt_dt and mobility with per-cell pair counts"""
    
    country: str
    r_s: pd.DataFrame
    n_obs: pd.DataFrame
    period: Tuple[Optional[pd.Timestamp], Optional[pd.Timestamp]]
    
    def cell(self, a: str, b: str) -> float:
        return float(self.r_s.loc[a, b])
    
    def to_frame(self) -> pd.DataFrame:
        frame = self.r_s.copy()
        for name in self.n_obs.columns:
            frame[f"n_obs_{name}"] = self.n_obs[name].astype(int)
        frame.index.name = 'variable'
        return frame.reset_index()

def correlation_matrix(table: pd.DataFrame, country: str = "",
                       variables: Sequence[str] = VARIABLES) -> CorrelationReport:
    """
    Pairwise Spearman matrix over an aligned table
    
    Args:
        table: Aligned table with at least 'rt' and 'mobility' columns; 'drt_dt'
            is derived from 'rt' when missing
        country: Label carried into the report
        variables: Columns to correlate
        
    Returns:
        Symmetric CorrelationReport; cells whose coefficient is undefined are NaN
    """
    if len(table) < Config.MIN_CORRELATION_PAIRS:
        raise TooFewPairs(f"{country}: aligned table has {len(table)} rows")
    table = table.copy()
    if 'drt_dt' in variables and 'drt_dt' not in table.columns:
        table['drt_dt'] = change_rate(table['rt']).reindex(table.index)
    
    names = list(variables)
    r_s = pd.DataFrame(np.nan, index=names, columns=names)
    n_obs = pd.DataFrame(0, index=names, columns=names, dtype=int)
    for i, a in enumerate(names):
        for b in names[i:]:
            count = n_pairs(table[a], table[b])
            n_obs.loc[a, b] = n_obs.loc[b, a] = count
            try:
                value = spearman(table[a], table[b])
            except (TooFewPairs, ZeroVariance) as e:
                logger.warning(f"{country}: {a} vs {b} undefined ({e})")
                continue
            r_s.loc[a, b] = r_s.loc[b, a] = 1.0 if a == b else value
    
    index = table.index
    period = (index.min(), index.max()) if len(index) else (None, None)
    return CorrelationReport(country=country, r_s=r_s, n_obs=n_obs, period=period)

@dataclass(frozen=True, eq=False)
class ShiftSweep:
    """Spearman coefficient between rt and shifted mobility for each shift"""
    
    shifts: np.ndarray
    r_s: np.ndarray
    n_obs: np.ndarray
    
    def __len__(self) -> int:
        return len(self.shifts)
    
    def at(self, shift: int) -> float:
        position = int(np.flatnonzero(self.shifts == shift)[0])
        return float(self.r_s[position])
    
    def best_shift(self) -> Optional[int]:
        """Shift with the largest |r_s|; the first on ties, None if all undefined"""
        magnitude = np.abs(self.r_s)
        if np.all(np.isnan(magnitude)):
            return None
        return int(self.shifts[int(np.nanargmax(magnitude))])
    
    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'shift': self.shifts, 'r_s': self.r_s, 'n_obs': self.n_obs})

def parse_shift_range(text: str) -> range:
    """Parse 'lo..hi' (inclusive) into a range"""
    try:
        lo, hi = (int(part) for part in text.split('..'))
    except ValueError:
        raise InvalidParameters(f"shift range must look like 'lo..hi', got {text!r}")
    if lo > hi:
        raise InvalidParameters(f"shift range {text!r} is empty")
    return range(lo, hi + 1)

def shift_sweep(rt: pd.Series, mobility: pd.Series, shifts: Iterable[int]) -> ShiftSweep:
    """
    Spearman correlation of rt with mobility displaced by each shift
    
    A positive shift s pairs rt(t) with mobility(t - s). Shifts whose overlap
    leaves fewer than 3 pairs, or a constant variable, get r_s = NaN.
    
    Raises:
        InvalidParameters: if shifts are not strictly increasing
    """
    shift_values = np.asarray(list(shifts), dtype=int)
    if len(shift_values) == 0 or np.any(np.diff(shift_values) <= 0):
        raise InvalidParameters("shifts must be a non-empty strictly increasing sequence")
    
    r_s = np.full(len(shift_values), np.nan)
    n_obs = np.zeros(len(shift_values), dtype=int)
    for position, s in enumerate(shift_values):
        shifted = mobility.shift(int(s), freq='D')
        n_obs[position] = n_pairs(rt, shifted)
        try:
            r_s[position] = spearman(rt, shifted)
        except (TooFewPairs, ZeroVariance) as e:
            logger.debug(f"shift {s}: {e}")
    return ShiftSweep(shifts=shift_values, r_s=r_s, n_obs=n_obs)
