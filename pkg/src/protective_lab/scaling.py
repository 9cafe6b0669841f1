"""Measurement counts and time budgets for reconstructing N-qubit states.

Counts are exact Python integers, so ``4**N - 1`` never overflows. Time
budgets are floats and use logarithms for the order-of-magnitude figure,
which stays finite even when the total itself overflows a double.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

AGE_OF_UNIVERSE_S = 4.35e17


@dataclass(frozen=True)
class TimeBudget:
    count: int
    T_per: float
    total_seconds: float
    age_universe_ratio: float
    orders_of_magnitude: float


@dataclass(frozen=True)
class ScalingReport:
    N: int
    d: int
    count_general: int
    count_pure: int
    assume_pure: bool
    T_per: float
    total_seconds: float
    age_universe_ratio: float
    orders_of_magnitude: float

    def record(self) -> dict:
        # Big integers go out as decimal strings so JSON consumers never lose digits.
        return {
            "N": self.N,
            "d": str(self.d),
            "count_general": str(self.count_general),
            "count_pure": str(self.count_pure),
            "assume_pure": self.assume_pure,
            "T_per": self.T_per,
            "total_seconds": self.total_seconds,
            "age_universe_ratio": self.age_universe_ratio,
            "orders_of_magnitude": self.orders_of_magnitude,
        }


def observable_count(N: int, assume_pure: bool = False, c_pure: float = 1.0) -> int:
    """Number of expectation values needed for an N-qubit state.

    General states need ``d**2 - 1 = 4**N - 1``; pure states are modelled as
    ``round(c_pure * 2**N)``.
    """
    if int(N) != N or N < 1:
        raise ValueError(f"N must be an integer >= 1, got {N}")
    N = int(N)
    if assume_pure:
        return round(Fraction(c_pure) * 2**N)
    return 4**N - 1


def time_budget(count: int, T_per_seconds: float,
                age_universe: float = AGE_OF_UNIVERSE_S) -> TimeBudget:
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if not T_per_seconds > 0:
        raise ValueError(f"T_per must be positive, got {T_per_seconds}")
    log_total = math.log10(count) + math.log10(T_per_seconds)
    try:
        total = float(count) * T_per_seconds
    except OverflowError:
        total = math.inf
    orders = log_total - math.log10(age_universe)
    ratio = 10.0**orders if orders < 308 else math.inf
    return TimeBudget(count, T_per_seconds, total, ratio, orders)


def per_measurement_time(total_seconds: float, count: int) -> float:
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    return total_seconds / count


def scaling_report(N: int, T_per: float, assume_pure: bool = False, c_pure: float = 1.0,
                   age_universe: float = AGE_OF_UNIVERSE_S) -> ScalingReport:
    general = observable_count(N)
    pure = observable_count(N, assume_pure=True, c_pure=c_pure)
    budget = time_budget(pure if assume_pure else general, T_per, age_universe)
    return ScalingReport(
        N=N, d=2**N, count_general=general, count_pure=pure, assume_pure=assume_pure,
        T_per=T_per, total_seconds=budget.total_seconds,
        age_universe_ratio=budget.age_universe_ratio,
        orders_of_magnitude=budget.orders_of_magnitude,
    )
