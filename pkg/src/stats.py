"""
Oracle-call accounting, cooperative deadlines and growth fitting
"""

import time
from dataclasses import dataclass, asdict
from typing import Dict, Optional, Sequence, Tuple

import numpy as np


class SolveTimeout(RuntimeError):
    """Raised when a solve runs past its deadline"""


class BudgetExceeded(AssertionError):
    """Raised when a run makes more oracle calls than its complexity bound allows"""


@dataclass
class OracleStats:
    """Counters shared by one solve; owned by the caller, never thread-shared"""
    force_calls: int = 0
    primitive_calls: int = 0

    def record_force(self):
        self.force_calls += 1

    def record_primitive(self):
        self.primitive_calls += 1

    def snapshot(self) -> 'OracleStats':
        return OracleStats(self.force_calls, self.primitive_calls)

    def since(self, earlier: 'OracleStats') -> 'OracleStats':
        """Calls made after ``earlier`` was taken"""
        return OracleStats(
            self.force_calls - earlier.force_calls,
            self.primitive_calls - earlier.primitive_calls,
        )

    def to_dict(self) -> Dict[str, int]:
        return asdict(self)


def check_budget(stats: OracleStats, bound: int, what: str):
    """Fail loudly if the force-call count of a run exceeds ``bound``"""
    if stats.force_calls > bound:
        raise BudgetExceeded(f"{what} made {stats.force_calls} force calls, bound is {bound}")


class Deadline:
    """Wall-clock deadline checked at outer-iteration boundaries"""

    def __init__(self, seconds: Optional[float] = None):
        self.seconds = seconds if seconds and seconds > 0 else None
        self.started = time.monotonic()

    @property
    def expired(self) -> bool:
        return self.seconds is not None and time.monotonic() - self.started > self.seconds

    def check(self, where: str):
        if self.expired:
            raise SolveTimeout(f"Timed out after {self.seconds}s in {where}")

    def elapsed_ms(self) -> float:
        return (time.monotonic() - self.started) * 1000.0


NO_DEADLINE = Deadline()


def fit_growth_exponent(xs: Sequence[float], counts: Sequence[float],
                        log_x: bool = True) -> Tuple[float, float]:
    """
    Fit ``log(count) = slope * x' + intercept`` by least squares

    With ``log_x`` the abscissa is ``log(x)`` (a polynomial degree estimate);
    without it ``x`` is used as given, e.g. ``log2(d)`` when checking that call
    counts grow like ``|S|^(a*log2(d) + b)``.

    Returns:
        ``(slope, intercept)``
    """
    x = np.asarray(xs, dtype=float)
    y = np.log(np.asarray(counts, dtype=float))
    if log_x:
        x = np.log(x)
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)
