"""
SEIR compartmental model: parameters, state and fixed-step integration

    dS/dt = -beta*S*I/N
    dE/dt =  beta*S*I/N - k*E
    dI/dt =  k*E - gamma*I
    dR/dt =  gamma*I

Compartments are real-valued person counts. Integration uses classical
fourth-order Runge-Kutta with a fixed number of substeps per day and
samples the state at integer day marks.
"""

import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional

import numpy as np
import pandas as pd

from .config import Config
from .exceptions import InvalidParameters, NonFiniteState, SeriesTooShort
from .series import DateLike, to_timestamp

# |S+E+I+R - N| <= CONSERVATION_TOLERANCE * N at every state
CONSERVATION_TOLERANCE = 1e-6
# negatives down to -CLAMP_TOLERANCE * N are roundoff and clamp to zero
CLAMP_TOLERANCE = 1e-9

@dataclass(frozen=True)
class SeirParams:
    """Rates governing the SEIR system (all per day) and the population size"""
    
    beta: float
    n_pop: float
    gamma: float = Config.DEFAULT_GAMMA
    k: float = Config.DEFAULT_K
    
    def __post_init__(self):
        if not (math.isfinite(self.beta) and self.beta >= 0):
            raise InvalidParameters(f"beta must be finite and >= 0, got {self.beta}")
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise InvalidParameters(f"gamma must be > 0, got {self.gamma}")
        if not (math.isfinite(self.k) and self.k > 0):
            raise InvalidParameters(f"k must be > 0, got {self.k}")
        if not (math.isfinite(self.n_pop) and self.n_pop > 0):
            raise InvalidParameters(f"n_pop must be > 0, got {self.n_pop}")
    
    @property
    def reproduction_number(self) -> float:
        """beta / gamma"""
        return self.beta / self.gamma

class SeirState(NamedTuple):
    """Compartment occupancies (or their rates of change) at one instant"""
    
    s: float
    e: float
    i: float
    r: float
    
    @property
    def total(self) -> float:
        return self.s + self.e + self.i + self.r
    
    def validate(self, n_pop: float) -> "SeirState":
        """
        Check the state invariants against a population size
        
        Args:
            n_pop: Population the compartments must add up to
            
        Returns:
            The state itself, for chaining
            
        Raises:
            InvalidParameters: if a compartment is negative or non-finite,
                or the compartments do not add up to n_pop
        """
        for name, value in zip(self._fields, self):
            if not math.isfinite(value) or value < 0:
                raise InvalidParameters(f"compartment {name} must be finite and >= 0, got {value}")
        if abs(self.total - n_pop) > CONSERVATION_TOLERANCE * n_pop:
            raise InvalidParameters(
                f"compartments sum to {self.total}, expected population {n_pop}"
            )
        return self

@dataclass(frozen=True, eq=False)
class Trajectory:
    """States at consecutive integer day marks, stored as a (days+1, 4) array"""
    
    values: np.ndarray
    n_pop: float
    start_day: int = 0
    start_date: Optional[pd.Timestamp] = None
    
    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.shape[1] != 4 or values.shape[0] < 1:
            raise InvalidParameters(f"trajectory values must have shape (n, 4), got {values.shape}")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise NonFiniteState("trajectory contains negative or non-finite compartments")
        drift = np.abs(values.sum(axis=1) - self.n_pop)
        if np.any(drift > CONSERVATION_TOLERANCE * self.n_pop):
            raise NonFiniteState(f"conservation violated by {drift.max()} persons")
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)
        if self.start_date is not None:
            object.__setattr__(self, 'start_date', to_timestamp(self.start_date))
    
    def __len__(self) -> int:
        return self.values.shape[0]
    
    @property
    def states(self) -> List[SeirState]:
        return [SeirState(*row) for row in self.values.tolist()]
    
    @property
    def final_state(self) -> SeirState:
        return SeirState(*self.values[-1].tolist())
    
    @property
    def index(self) -> pd.Index:
        """Day marks as dates when the trajectory is anchored, else day numbers"""
        if self.start_date is not None:
            return pd.date_range(self.start_date, periods=len(self), freq='D')
        return pd.RangeIndex(self.start_day, self.start_day + len(self), name='day')
    
    def cumulative_values(self) -> np.ndarray:
        """I+R+E at every day mark as a plain array"""
        total = self.values[:, 1] + self.values[:, 2] + self.values[:, 3]
        # the three-term sum can dip by an ulp where S is flat
        return np.maximum.accumulate(total)

def seir_derivative(state: SeirState, params: SeirParams) -> SeirState:
    """
    Per-day rates of change of each compartment
    
    Args:
        state: Current compartment occupancies
        params: Model parameters
        
    Returns:
        SeirState holding (dS/dt, dE/dt, dI/dt, dR/dt)
    """
    infection = params.beta * state.s * state.i / params.n_pop
    progression = params.k * state.e
    removal = params.gamma * state.i
    return SeirState(-infection, infection - progression, progression - removal, removal)

def _checked_compartment(value: float, floor: float, name: str, day: int) -> float:
    if not math.isfinite(value) or value < floor:
        raise NonFiniteState(
            f"compartment {name} reached {value} on day {day}; step size too coarse for this beta"
        )
    return value if value > 0.0 else 0.0

def integrate(initial: SeirState, params: SeirParams, days: int,
              substeps_per_day: int = Config.SUBSTEPS_PER_DAY,
              start_day: int = 0, start_date: Optional[DateLike] = None) -> Trajectory:
    """
    Integrate the SEIR system forward with fixed-step RK4
    
    Args:
        initial: State at the first day mark
        params: Model parameters
        days: Number of days to integrate (>= 1)
        substeps_per_day: RK4 steps per day (>= 1)
        start_day: Day number of the first state
        start_date: Optional calendar date of the first state
        
    Returns:
        Trajectory with days+1 states
        
    Raises:
        InvalidParameters: on invalid days, substeps or initial state
        NonFiniteState: if a compartment becomes non-finite or materially negative
    """
    if days < 1:
        raise InvalidParameters(f"days must be >= 1, got {days}")
    if substeps_per_day < 1:
        raise InvalidParameters(f"substeps_per_day must be >= 1, got {substeps_per_day}")
    initial.validate(params.n_pop)
    
    beta, gamma, k, n_pop = params.beta, params.gamma, params.k, params.n_pop
    h = 1.0 / substeps_per_day
    half = 0.5 * h
    sixth = h / 6.0
    floor = -CLAMP_TOLERANCE * n_pop
    
    s, e, i, r = (float(v) for v in initial)
    rows = [(s, e, i, r)]
    
    # seir_derivative inlined on plain floats; this loop dominates fitting time
    for day in range(1, days + 1):
        for _ in range(substeps_per_day):
            inf1 = beta * s * i / n_pop
            ds1, de1, di1, dr1 = -inf1, inf1 - k * e, k * e - gamma * i, gamma * i
            
            s2, e2, i2 = s + half * ds1, e + half * de1, i + half * di1
            inf2 = beta * s2 * i2 / n_pop
            ds2, de2, di2, dr2 = -inf2, inf2 - k * e2, k * e2 - gamma * i2, gamma * i2
            
            s3, e3, i3 = s + half * ds2, e + half * de2, i + half * di2
            inf3 = beta * s3 * i3 / n_pop
            ds3, de3, di3, dr3 = -inf3, inf3 - k * e3, k * e3 - gamma * i3, gamma * i3
            
            s4, e4, i4 = s + h * ds3, e + h * de3, i + h * di3
            inf4 = beta * s4 * i4 / n_pop
            ds4, de4, di4, dr4 = -inf4, inf4 - k * e4, k * e4 - gamma * i4, gamma * i4
            
            s += sixth * (ds1 + 2.0 * ds2 + 2.0 * ds3 + ds4)
            e += sixth * (de1 + 2.0 * de2 + 2.0 * de3 + de4)
            i += sixth * (di1 + 2.0 * di2 + 2.0 * di3 + di4)
            r += sixth * (dr1 + 2.0 * dr2 + 2.0 * dr3 + dr4)
        
        s = _checked_compartment(s, floor, 's', start_day + day)
        e = _checked_compartment(e, floor, 'e', start_day + day)
        i = _checked_compartment(i, floor, 'i', start_day + day)
        r = _checked_compartment(r, floor, 'r', start_day + day)
        rows.append((s, e, i, r))
    
    return Trajectory(np.array(rows), n_pop, start_day=start_day, start_date=start_date)

def cumulative_infected(traj: Trajectory) -> pd.Series:
    """
    Cumulative infected I+(t) = I(t) + R(t) + E(t) at every day mark
    
    The E compartment already counts every exposed person, symptomatic or not,
    so no asymptomatic inflation is applied here.
    """
    return pd.Series(traj.cumulative_values(), index=traj.index, name='cumulative_infected')

def daily_new_infected(traj: Trajectory) -> pd.Series:
    """
    Daily new infections I'(t) = I+(t+1) - I+(t)
    
    Args:
        traj: Trajectory with at least two states
        
    Returns:
        Series of len(traj) - 1 non-negative values, indexed by the day t
    """
    if len(traj) < 2:
        raise SeriesTooShort("daily_new_infected needs a trajectory of at least two days")
    diffs = np.diff(traj.cumulative_values())
    return pd.Series(diffs, index=traj.index[:-1], name='daily_new_infected')
