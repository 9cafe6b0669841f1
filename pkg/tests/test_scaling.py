import math

import pytest

from protective_lab.scaling import (AGE_OF_UNIVERSE_S, observable_count, per_measurement_time,
                                    scaling_report, time_budget)


def test_general_counts():
    assert [observable_count(N) for N in (1, 2, 3)] == [3, 15, 63]
    assert observable_count(100) == 4**100 - 1


def test_pure_counts():
    assert observable_count(3, assume_pure=True) == 8
    assert observable_count(3, assume_pure=True, c_pure=2.5) == 20


@pytest.mark.parametrize("N", [0, -1, 1.5])
def test_invalid_N(N):
    with pytest.raises(ValueError):
        observable_count(N)


def test_per_measurement_time():
    assert per_measurement_time(36000.0, 656100) == pytest.approx(0.05487, abs=1e-4)
    with pytest.raises(ValueError):
        per_measurement_time(1.0, 0)


def test_budget_overflow_is_handled():
    b = time_budget(4**1000 - 1, 1e-5)
    assert b.total_seconds == math.inf
    assert b.orders_of_magnitude == pytest.approx(1000 * math.log10(4) - 5 - math.log10(4.35e17),
                                                  abs=1e-9)


def test_budget_rejects_bad_inputs():
    with pytest.raises(ValueError):
        time_budget(0, 1.0)
    with pytest.raises(ValueError):
        time_budget(10, 0.0)


def test_hundred_qubit_report():
    rep = scaling_report(100, 1e-5, assume_pure=True)
    assert rep.count_pure == 2**100
    assert rep.total_seconds == pytest.approx(2**100 * 1e-5)
    assert rep.orders_of_magnitude >= 7
    rec = rep.record()
    assert rec["count_general"] == str(4**100 - 1)
    assert int(rec["d"]) == 2**100
    assert AGE_OF_UNIVERSE_S == 4.35e17
