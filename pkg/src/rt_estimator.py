"""
SEIR-based time-dependent reproduction number

Starting at the first day cumulative confirmed cases exceed the threshold,
a window of n days slides forward one day at a time. For each window the
model is initialised from the observed counts at the window start and beta
is fitted by least squares between observed and predicted daily new cases.
The estimate R_t = beta*/gamma is reported at the window's final day.
"""

import math
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, List, NamedTuple, Optional, Tuple

import numpy as np
import pandas as pd

from .config import Config
from .data_ingest import CountryPanel
from .exceptions import (
    InsufficientHistory,
    InvalidParameters,
    NegativeCompartment,
    NonFiniteObjective,
    NonFiniteState,
    ThresholdNeverReached,
)
from .logger_config import get_logger
from .optimizer import MinimizeOptions, ScalarObjective, minimize_scalar
from .seir_model import SeirParams, SeirState, integrate
from .series import DateLike, to_timestamp

logger = get_logger('rt_estimator')

@dataclass(frozen=True)
class EstimatorConfig:
    """Settings for the sliding-window fit"""
    
    window_days: int = Config.WINDOW_DAYS
    case_threshold: int = Config.CASE_THRESHOLD
    incubation_shift_days: int = Config.INCUBATION_SHIFT_DAYS
    asymptomatic_fraction: float = Config.ASYMPTOMATIC_FRACTION
    gamma: float = Config.DEFAULT_GAMMA
    k: float = Config.DEFAULT_K
    substeps_per_day: int = Config.SUBSTEPS_PER_DAY
    beta_upper: float = Config.BETA_BOUNDS[1]
    x_tolerance: float = Config.X_TOLERANCE
    # I(t0) = V - D - G instead of I(t0) = V
    active_infected_init: bool = False
    
    def __post_init__(self):
        if self.window_days < 2:
            raise InvalidParameters(f"window_days must be >= 2, got {self.window_days}")
        if self.case_threshold < 1:
            raise InvalidParameters(f"case_threshold must be >= 1, got {self.case_threshold}")
        if self.incubation_shift_days < 0:
            raise InvalidParameters(f"incubation_shift_days must be >= 0, got {self.incubation_shift_days}")
        if not 0 <= self.asymptomatic_fraction < 1:
            raise InvalidParameters(
                f"asymptomatic_fraction must be in [0, 1), got {self.asymptomatic_fraction}"
            )
        if not (self.gamma > 0 and self.k > 0):
            raise InvalidParameters("gamma and k must be > 0")
        if self.substeps_per_day < 1:
            raise InvalidParameters(f"substeps_per_day must be >= 1, got {self.substeps_per_day}")
        if not self.beta_upper > 0:
            raise InvalidParameters(f"beta_upper must be > 0, got {self.beta_upper}")
    
    def minimize_options(self) -> MinimizeOptions:
        return MinimizeOptions(
            lower_bound=0.0,
            upper_bound=self.beta_upper,
            x_tolerance=self.x_tolerance
        )
    
    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)
    
    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "EstimatorConfig":
        """Build from a mapping, rejecting unknown keys"""
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise InvalidParameters(f"unknown estimator settings: {unknown}")
        return cls(**values)

class WindowFit(NamedTuple):
    beta_star: float
    residual: float
    converged: bool
    clamped_days: int = 0

class WindowDiagnostic(NamedTuple):
    date: pd.Timestamp
    kind: str
    message: str

@dataclass(frozen=True, eq=False)
class RtResult:
    """Per-day R_t with the fitted beta and fit diagnostics, all on one date index"""
    
    country: str
    rt: pd.Series
    beta: pd.Series
    residual: pd.Series
    converged: pd.Series
    t0: pd.Timestamp
    gamma: float
    diagnostics: Tuple[WindowDiagnostic, ...] = field(default_factory=tuple)
    
    def __len__(self) -> int:
        return len(self.rt)
    
    @property
    def failed_windows(self) -> List[WindowDiagnostic]:
        return [d for d in self.diagnostics if d.kind == 'failed']
    
    @property
    def initial_rt(self) -> float:
        """First emitted estimate (the initial reproduction number), NaN if none"""
        return float(self.rt.iloc[0]) if len(self.rt) else math.nan
    
    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'rt': self.rt,
            'beta': self.beta,
            'residual': self.residual,
            'converged': self.converged,
        })

def find_t0(panel: CountryPanel, threshold: int = Config.CASE_THRESHOLD) -> pd.Timestamp:
    """
    First date on which cumulative confirmed cases strictly exceed threshold
    
    Raises:
        ThresholdNeverReached: if no date exceeds the threshold
    """
    confirmed = panel.confirmed
    if confirmed.empty:
        raise ThresholdNeverReached(f"{panel.country}: confirmed series is empty")
    above = confirmed > threshold
    if not above.any():
        raise ThresholdNeverReached(
            f"{panel.country}: cumulative confirmed never exceeds {threshold} "
            f"(max {confirmed.max():.0f})"
        )
    return above.idxmax()

def exposed_effective(confirmed: pd.Series, t: DateLike, cfg: EstimatorConfig) -> float:
    """
    Exposed count inflated for asymptomatic cases: V(t - shift) / (1 - fraction)
    
    Raises:
        InsufficientHistory: if t - shift precedes the series or is absent
    """
    lookup = to_timestamp(t) - pd.Timedelta(days=cfg.incubation_shift_days)
    if confirmed.empty or lookup < confirmed.index[0]:
        raise InsufficientHistory(
            f"exposed count at {to_timestamp(t).date()} needs data from {lookup.date()}"
        )
    value = confirmed.get(lookup, np.nan)
    if not np.isfinite(value):
        raise InsufficientHistory(f"confirmed count absent on {lookup.date()}")
    return float(value) / (1.0 - cfg.asymptomatic_fraction)

def _observed_at(series: pd.Series, t: pd.Timestamp, label: str) -> float:
    value = series.get(t, np.nan)
    if not np.isfinite(value):
        raise InsufficientHistory(f"{label} absent on {t.date()}")
    return float(value)

def initial_state(panel: CountryPanel, t: DateLike, cfg: EstimatorConfig) -> SeirState:
    """
    Model state built from the observed counts on day t
    
    S = N - V - E_eff - D - G, E = E_eff, I = V, R = D + G, with V, G, D the
    (smoothed) cumulative confirmed, recovered and deaths. With
    active_infected_init, I = V - D - G and S absorbs the difference.
    
    Raises:
        InsufficientHistory: if an observation is missing
        NegativeCompartment: if the counts exceed the population
    """
    t = to_timestamp(t)
    confirmed = panel.observed('confirmed')
    v = _observed_at(confirmed, t, 'confirmed')
    g = _observed_at(panel.observed('recovered'), t, 'recovered')
    d = _observed_at(panel.observed('deaths'), t, 'deaths')
    e = exposed_effective(confirmed, t, cfg)
    n_pop = float(panel.population)
    
    removed = d + g
    infected = v
    if cfg.active_infected_init:
        infected = max(v - removed, 0.0)
    susceptible = n_pop - infected - e - removed
    
    if susceptible < 0:
        raise NegativeCompartment(
            f"{panel.country} {t.date()}: V + E_eff + D + G = {n_pop - susceptible:.0f} "
            f"exceeds population {n_pop:.0f}"
        )
    return SeirState(susceptible, e, infected, removed)

def observed_window(panel: CountryPanel, window_start: DateLike, cfg: EstimatorConfig) -> np.ndarray:
    """Observed daily new cases V'(t) = V(t+1) - V(t) over the window, unclamped"""
    start = to_timestamp(window_start)
    dates = pd.date_range(start, periods=cfg.window_days + 1, freq='D')
    confirmed = panel.observed('confirmed')
    if dates[-1] > confirmed.index[-1]:
        raise InsufficientHistory(f"window from {start.date()} runs past {confirmed.index[-1].date()}")
    values = confirmed.reindex(dates).to_numpy(dtype=float)
    if not np.all(np.isfinite(values)):
        raise InsufficientHistory(f"confirmed counts absent within window from {start.date()}")
    return np.diff(values)

def window_objective(panel: CountryPanel, window_start: DateLike,
                     cfg: EstimatorConfig) -> Tuple[ScalarObjective, int]:
    """
    Least-squares cost of beta over one window
    
    Args:
        panel: Case panel
        window_start: First day of the window
        cfg: Estimator settings
        
    Returns:
        Tuple of (objective, number of negative observed diffs clamped to 0)
    """
    x0 = initial_state(panel, window_start, cfg)
    raw = observed_window(panel, window_start, cfg)
    observed = np.clip(raw, 0.0, None)
    clamped = int(np.count_nonzero(raw < 0))
    n_pop = float(panel.population)
    
    def cost(beta: float) -> float:
        params = SeirParams(beta=beta, n_pop=n_pop, gamma=cfg.gamma, k=cfg.k)
        try:
            traj = integrate(x0, params, cfg.window_days, cfg.substeps_per_day)
        except NonFiniteState as e:
            logger.debug(f"{panel.country}: beta={beta} unstable ({e})")
            return math.nan
        predicted = np.diff(traj.cumulative_values())
        return float(np.sum((observed - predicted) ** 2))
    
    name = f"{panel.country} window {to_timestamp(window_start).date()}"
    return ScalarObjective(cost, name=name), clamped

def fit_window(panel: CountryPanel, window_start: DateLike, cfg: EstimatorConfig) -> WindowFit:
    """
    Fit beta on the window starting at window_start
    
    Raises:
        InsufficientHistory, NegativeCompartment, NonFiniteObjective
    """
    objective, clamped = window_objective(panel, window_start, cfg)
    result = minimize_scalar(objective, cfg.minimize_options())
    return WindowFit(result.x_min, result.f_min, result.converged, clamped)

def estimate_rt(panel: CountryPanel, cfg: Optional[EstimatorConfig] = None,
                end_date: Optional[DateLike] = None) -> RtResult:
    """
    Sliding-window R_t series for one country
    
    Args:
        panel: Case panel, normally smoothed
        cfg: Estimator settings (defaults when omitted)
        end_date: Last date whose observations may be used; defaults to the
            panel's last date and is clipped to it
            
    Returns:
        RtResult; windows that fail leave their date absent and add a
        diagnostic instead of a value
        
    Raises:
        ThresholdNeverReached: if the panel never exceeds the case threshold
    """
    cfg = cfg or EstimatorConfig()
    t0 = find_t0(panel, cfg.case_threshold)
    last = panel.dates[-1]
    end = to_timestamp(end_date) if end_date is not None else last
    if end > last:
        logger.warning(f"{panel.country}: end date {end.date()} beyond data; using {last.date()}")
        end = last
    
    span = pd.Timedelta(days=cfg.window_days)
    starts = pd.date_range(t0, end - span, freq='D') if end - span >= t0 else pd.DatetimeIndex([])
    
    dates: List[pd.Timestamp] = []
    betas: List[float] = []
    residuals: List[float] = []
    converged: List[bool] = []
    diagnostics: List[WindowDiagnostic] = []
    
    if len(starts) == 0:
        message = f"data ends {end.date()}, before the first complete window after t0 {t0.date()}"
        logger.warning(f"{panel.country}: {message}")
        diagnostics.append(WindowDiagnostic(t0, 'empty', message))
    
    for start in starts:
        report_date = start + span
        try:
            fit = fit_window(panel, start, cfg)
        except (InsufficientHistory, NegativeCompartment, NonFiniteObjective, InvalidParameters) as e:
            logger.warning(f"{panel.country}: window ending {report_date.date()} failed: {e}")
            diagnostics.append(WindowDiagnostic(report_date, 'failed', str(e)))
            continue
        
        if fit.clamped_days:
            diagnostics.append(WindowDiagnostic(
                report_date, 'clamped', f"{fit.clamped_days} negative daily diffs clamped to 0"
            ))
        logger.debug(f"{panel.country}: {report_date.date()} beta*={fit.beta_star:.6f} residual={fit.residual:.3g}")
        dates.append(report_date)
        betas.append(fit.beta_star)
        residuals.append(fit.residual)
        converged.append(fit.converged)
    
    index = pd.DatetimeIndex(dates, name='date')
    beta = pd.Series(betas, index=index, dtype=float, name='beta')
    result = RtResult(
        country=panel.country,
        rt=(beta / cfg.gamma).rename('rt'),
        beta=beta,
        residual=pd.Series(residuals, index=index, dtype=float, name='residual'),
        converged=pd.Series(converged, index=index, dtype=bool, name='converged'),
        t0=t0,
        gamma=cfg.gamma,
        diagnostics=tuple(diagnostics)
    )
    failed = len(result.failed_windows)
    logger.info(f"{panel.country}: {len(result)} R_t estimates from t0 {t0.date()} ({failed} windows failed)")
    return result
