"""
Date-indexed series helpers

A DatedSeries is a ``pandas.Series`` of floats on a daily ``DatetimeIndex``
with one entry per consecutive day. Absent values are ``NaN``.
"""

from datetime import date
from typing import Iterable, Optional, Union

import numpy as np
import pandas as pd

from .exceptions import DateGap

DatedSeries = pd.Series
DateLike = Union[str, date, pd.Timestamp]

def to_timestamp(value: DateLike) -> pd.Timestamp:
    """Normalise a date-like value to a midnight ``Timestamp``"""
    return pd.Timestamp(value).normalize()

def dated_series(start_date: DateLike, values: Iterable[float], name: Optional[str] = None) -> pd.Series:
    """
    Build a DatedSeries from a start date and consecutive daily values
    
    Args:
        start_date: Date of the first value
        values: One value per consecutive day; None or NaN marks an absent day
        name: Optional series name
        
    Returns:
        Float series on a daily DatetimeIndex
    """
    data = np.asarray([np.nan if v is None else v for v in values], dtype=float)
    index = pd.date_range(to_timestamp(start_date), periods=len(data), freq='D')
    return pd.Series(data, index=index, name=name)

def check_daily(series: pd.Series, label: str = "series"):
    """Raise DateGap unless the index is strictly consecutive days"""
    if len(series) < 2:
        return
    steps = np.diff(series.index.values).astype('timedelta64[D]').astype(int)
    if not np.all(steps == 1):
        bad = int(np.argmax(steps != 1))
        raise DateGap(
            f"{label}: dates not consecutive between "
            f"{series.index[bad].date()} and {series.index[bad + 1].date()}"
        )

def to_daily(series: pd.Series) -> pd.Series:
    """Reindex onto the full daily range of the series, absent days as NaN"""
    if series.empty:
        return series.astype(float)
    full = pd.date_range(series.index.min(), series.index.max(), freq='D')
    return series.reindex(full).astype(float)

def paired(x: pd.Series, y: pd.Series) -> pd.DataFrame:
    """Pairs of (x, y) on shared dates where both are present"""
    frame = pd.concat([x.rename('x'), y.rename('y')], axis=1, join='inner')
    return frame.dropna()

def iso_dates(index: pd.DatetimeIndex) -> list:
    """Format a DatetimeIndex as ISO-8601 date strings"""
    return [ts.strftime('%Y-%m-%d') for ts in index]
