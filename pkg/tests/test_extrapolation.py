from __future__ import annotations

import pytest

from degennes.core.extrapolation import combine_levels, richardson, romberg_table


def test_romberg_removes_even_powers():
    values = [1.0 + h**2 + h**4 for h in (1.0, 0.5, 0.25)]
    value, error = richardson(values)
    assert value == pytest.approx(1.0, abs=1e-14)
    assert error > 0.0


def test_table_shape():
    table = romberg_table([3.0, 2.0, 1.5, 1.25])
    assert [len(row) for row in table] == [1, 2, 3, 4]


def test_single_value_has_no_error():
    assert richardson([0.25]) == (0.25, 0.0)


def test_empty_table_rejected():
    with pytest.raises(ValueError):
        romberg_table([])


def test_unextrapolated_levels_report_fine_value():
    fine, error = combine_levels([1.04, 1.01], extrapolated=False)
    assert fine == 1.01
    assert error == pytest.approx(0.01)
