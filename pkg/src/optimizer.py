"""
Derivative-free scalar minimisation

With gamma and k fixed, fitting the SEIR model leaves beta as the only free
parameter, so the conjugate-direction method reduces to its line search. The
search runs a coarse equispaced scan across the bounds to bracket the best
basin, then refines inside the bracket by golden-section search.
"""

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .config import Config
from .exceptions import InvalidParameters, NonFiniteObjective
from .logger_config import get_logger

logger = get_logger('optimizer')

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

class ScalarObjective:
    """A deterministic real-valued cost of one real argument, counting its evaluations"""
    
    def __init__(self, func: Callable[[float], float], name: str = "objective"):
        self.func = func
        self.name = name
        self.evaluations = 0
    
    def __call__(self, x: float) -> float:
        self.evaluations += 1
        return float(self.func(x))

@dataclass(frozen=True)
class MinimizeOptions:
    """Bounds and stopping rules for minimize_scalar"""
    
    lower_bound: float = Config.BETA_BOUNDS[0]
    upper_bound: float = Config.BETA_BOUNDS[1]
    x_tolerance: float = Config.X_TOLERANCE
    max_iterations: int = Config.MAX_ITERATIONS
    scan_probes: int = Config.SCAN_PROBES
    
    def __post_init__(self):
        if not self.lower_bound < self.upper_bound:
            raise InvalidParameters(
                f"lower_bound {self.lower_bound} must be below upper_bound {self.upper_bound}"
            )
        if not self.x_tolerance > 0:
            raise InvalidParameters(f"x_tolerance must be > 0, got {self.x_tolerance}")
        if self.max_iterations < 1:
            raise InvalidParameters(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.scan_probes < 3:
            raise InvalidParameters(f"scan_probes must be >= 3, got {self.scan_probes}")

@dataclass(frozen=True)
class MinimizeResult:
    x_min: float
    f_min: float
    iterations: int
    converged: bool
    evaluations: int = 0

def minimize_scalar(obj: Union[ScalarObjective, Callable[[float], float]],
                    opts: MinimizeOptions = None) -> MinimizeResult:
    """
    Minimise a scalar objective on a closed interval without derivatives
    
    Args:
        obj: Objective to minimise (plain callables are wrapped)
        opts: Bounds and tolerances; defaults to the beta search settings
        
    Returns:
        MinimizeResult with the best probe found. Among equal-cost probes the
        smallest argument wins.
        
    Raises:
        NonFiniteObjective: if the objective returns NaN or infinity at any probe
    """
    opts = opts or MinimizeOptions()
    if not isinstance(obj, ScalarObjective):
        obj = ScalarObjective(obj)
    
    best_x = math.inf
    best_f = math.inf
    
    def evaluate(x: float) -> float:
        nonlocal best_x, best_f
        f = obj(x)
        if not math.isfinite(f):
            raise NonFiniteObjective(f"{obj.name} returned {f} at x={x!r}")
        if f < best_f or (f == best_f and x < best_x):
            best_x, best_f = x, f
        return f
    
    probes = np.linspace(opts.lower_bound, opts.upper_bound, opts.scan_probes)
    costs = [evaluate(float(x)) for x in probes]
    # argmin returns the first, i.e. smallest, of equal costs
    j = int(np.argmin(costs))
    a = float(probes[max(j - 1, 0)])
    b = float(probes[min(j + 1, len(probes) - 1)])
    
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc = evaluate(c)
    fd = evaluate(d)
    
    iterations = 0
    while (b - a) > opts.x_tolerance and iterations < opts.max_iterations:
        iterations += 1
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = evaluate(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = evaluate(d)
    
    converged = (b - a) <= opts.x_tolerance
    if not converged:
        logger.debug(f"{obj.name}: bracket width {b - a} after {iterations} iterations")
    
    return MinimizeResult(
        x_min=best_x,
        f_min=best_f,
        iterations=iterations,
        converged=converged,
        evaluations=obj.evaluations
    )
