"""
Model-free reproduction number: ratio of the latest 4-day case sum to the
4-day sum before it, taken over the 8 days ending at each date.
"""

from dataclasses import asdict, dataclass
from typing import Any, Dict

import numpy as np
import pandas as pd
from numpy.lib.stride_tricks import sliding_window_view

from .config import Config
from .exceptions import InvalidParameters, SeriesTooShort
from .logger_config import get_logger
from .series import check_daily

logger = get_logger('model_free')

@dataclass(frozen=True)
class MfConfig:
    numerator_days: int = Config.MF_NUMERATOR_DAYS
    denominator_days: int = Config.MF_DENOMINATOR_DAYS
    # feed raw daily cases instead of the 3-day smoothed series
    use_raw_cases: bool = False
    
    def __post_init__(self):
        if self.numerator_days < 1 or self.denominator_days < 1:
            raise InvalidParameters(
                f"numerator_days and denominator_days must be >= 1, "
                f"got {self.numerator_days} and {self.denominator_days}"
            )
    
    @property
    def span(self) -> int:
        return self.numerator_days + self.denominator_days
    
    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

def rt_model_free(daily_cases: pd.Series, cfg: MfConfig = None) -> pd.Series:
    """
    Trailing-window growth ratio of daily cases
    
    Args:
        daily_cases: Non-negative daily new cases on consecutive dates
        cfg: Window sizes
        
    Returns:
        Series named 'rt_mf' dated at the last day of each window. Dates whose
        denominator sum is zero (or whose window holds an absent day) are
        omitted; the zero-denominator count is kept in
        ``attrs['zero_denominator_days']``.
        
    Raises:
        SeriesTooShort: fewer values than one full window
        InvalidParameters: negative case counts
    """
    cfg = cfg or MfConfig()
    check_daily(daily_cases, "daily cases")
    values = daily_cases.to_numpy(dtype=float)
    if len(values) < cfg.span:
        raise SeriesTooShort(f"model-free estimate needs {cfg.span} days, got {len(values)}")
    if np.any(values[np.isfinite(values)] < 0):
        raise InvalidParameters("daily cases must be non-negative")
    
    windows = sliding_window_view(values, cfg.span)
    denominator = windows[:, :cfg.denominator_days].sum(axis=1)
    numerator = windows[:, cfg.denominator_days:].sum(axis=1)
    dates = daily_cases.index[cfg.span - 1:]
    
    zero = denominator == 0
    keep = ~zero & np.isfinite(numerator) & np.isfinite(denominator)
    n_zero = int(np.count_nonzero(zero))
    if n_zero:
        logger.warning(f"model-free R_t: {n_zero} dates omitted with zero denominator")
    
    result = pd.Series(numerator[keep] / denominator[keep], index=dates[keep], name='rt_mf')
    result.index.name = 'date'
    result.attrs['zero_denominator_days'] = n_zero
    return result
