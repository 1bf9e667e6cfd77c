"""Integer linear feasibility by depth-first search with bound propagation.

Desk-scale replacement for fixed-dimension integer programming: every
variable carries finite integer bounds, variables are assigned in order with
the lowest value first, and each row prunes partial assignments through
interval arithmetic on the unassigned suffix.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class IntegerProgram:
    """Rows are dense coefficient tuples over all variables.

    eq_rows: coeffs . z == rhs;  le_rows: coeffs . z <= rhs.
    """

    lower: tuple[int, ...]
    upper: tuple[int, ...]
    eq_rows: tuple[tuple[tuple[int, ...], int], ...] = ()
    le_rows: tuple[tuple[tuple[int, ...], int], ...] = ()

    def __post_init__(self) -> None:
        p = len(self.lower)
        if len(self.upper) != p:
            raise ValueError("bound vectors disagree on variable count")
        for lo, hi in zip(self.lower, self.upper):
            if lo > hi:
                raise ValueError(f"empty variable domain [{lo}, {hi}]")
        for coeffs, _ in self.eq_rows + self.le_rows:
            if len(coeffs) != p:
                raise ValueError("row width differs from variable count")

    @property
    def num_vars(self) -> int:
        return len(self.lower)


def solve_feasibility(prog: IntegerProgram) -> tuple[int, ...] | None:
    """An integer point satisfying every row, or None when none exists.

    Deterministic: variables in index order, values from the lower bound up.
    """
    p = prog.num_vars
    rows = [(coeffs, rhs, True) for coeffs, rhs in prog.eq_rows]
    rows += [(coeffs, rhs, False) for coeffs, rhs in prog.le_rows]

    # suffix_min/max[r][i]: extreme contribution of variables i.. to row r.
    suffix_min: list[list[int]] = []
    suffix_max: list[list[int]] = []
    for coeffs, _, _ in rows:
        mins = [0] * (p + 1)
        maxs = [0] * (p + 1)
        for i in range(p - 1, -1, -1):
            c = coeffs[i]
            lo_c = c * prog.lower[i]
            hi_c = c * prog.upper[i]
            if lo_c > hi_c:
                lo_c, hi_c = hi_c, lo_c
            mins[i] = mins[i + 1] + lo_c
            maxs[i] = maxs[i + 1] + hi_c
        suffix_min.append(mins)
        suffix_max.append(maxs)

    partial = [0] * len(rows)
    assignment: list[int] = []

    def feasible_here(i: int) -> bool:
        for r, (coeffs, rhs, is_eq) in enumerate(rows):
            lo = partial[r] + suffix_min[r][i]
            hi = partial[r] + suffix_max[r][i]
            if is_eq:
                if not (lo <= rhs <= hi):
                    return False
            elif lo > rhs:
                return False
        return True

    def descend(i: int) -> bool:
        if not feasible_here(i):
            return False
        if i == p:
            return True
        for value in range(prog.lower[i], prog.upper[i] + 1):
            assignment.append(value)
            for r, (coeffs, _, _) in enumerate(rows):
                partial[r] += coeffs[i] * value
            if descend(i + 1):
                return True
            for r, (coeffs, _, _) in enumerate(rows):
                partial[r] -= coeffs[i] * value
            assignment.pop()
        return False

    if descend(0):
        return tuple(assignment)
    return None
