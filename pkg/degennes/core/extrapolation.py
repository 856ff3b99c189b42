"""Richardson extrapolation for quantities with an even power expansion in the step.

Both the grid levels of a fiber solve (spacing halved each level) and the
central-difference steps of band derivatives (step halved each level) share
this table.
"""
from __future__ import annotations

from typing import List, Sequence, Tuple


def romberg_table(values: Sequence[float], ratio: float = 2.0) -> List[List[float]]:
    """Build the triangular Romberg table.

    values[k] is the raw estimate at step h0 / ratio**k. Row k, column m
    removes the error terms h^2 .. h^(2m).
    """

    if not values:
        raise ValueError("romberg_table needs at least one value")

    table: List[List[float]] = []
    for k, value in enumerate(values):
        row = [float(value)]
        for m in range(1, k + 1):
            factor = ratio ** (2 * m)
            row.append(row[m - 1] + (row[m - 1] - table[k - 1][m - 1]) / (factor - 1.0))
        table.append(row)
    return table


def richardson(values: Sequence[float], ratio: float = 2.0) -> Tuple[float, float]:
    """Extrapolated value and the size of the last correction.

    With a single value there is nothing to extrapolate and the error is 0.
    """

    table = romberg_table(values, ratio)
    last = table[-1]
    if len(last) == 1:
        return last[0], 0.0
    return last[-1], abs(last[-1] - last[-2])


def combine_levels(values: Sequence[float], extrapolated: bool) -> Tuple[float, float]:
    """Combine per-level values of a fiber functional.

    When `extrapolated` is False the last level is reported as is and the
    error comes from the second-order difference with the previous level.
    """

    if extrapolated or len(values) < 2:
        return richardson(values)
    fine, coarse = float(values[-1]), float(values[-2])
    return fine, abs(fine - coarse) / 3.0
