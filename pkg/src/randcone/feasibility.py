"""Exact linear feasibility by a phase-1 simplex over the rationals.

Bland's rule (smallest eligible index for both the entering and the leaving
variable) rules out cycling, so the solver always terminates.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Sequence

try:
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover
    _Q = Fraction

Number = int | Fraction
RELATIONS = ("=", "<=", ">=")


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    witness: tuple[Fraction, ...] | None = None

    def __bool__(self) -> bool:
        return self.feasible


def solve_linear_feasibility(rows: Sequence[Sequence[Number]], relations: Sequence[str],
                             rhs: Sequence[Number], *, n_vars: int | None = None,
                             nonneg: bool = False) -> FeasibilityResult:
    """Decide whether ``rows @ x (relations) rhs`` has a solution.

    Variables are free unless ``nonneg`` is set.  ``relations`` holds one of
    ``"="``, ``"<="``, ``">="`` per row.  On success the witness is an exact
    rational point satisfying every constraint.

    >>> solve_linear_feasibility([[1], [1]], [">=", "<="], [1, 0]).feasible
    False
    """
    m = len(rows)
    if len(relations) != m or len(rhs) != m:
        raise ValueError(f"dimension mismatch: {m} rows, {len(relations)} relations, {len(rhs)} rhs")
    if n_vars is None:
        if m == 0:
            raise ValueError("n_vars is required when there are no rows")
        n_vars = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != n_vars:
            raise ValueError(f"row {i} has {len(row)} entries, expected {n_vars}")
    for rel in relations:
        if rel not in RELATIONS:
            raise ValueError(f"unknown relation {rel!r}")
    if m == 0:
        return FeasibilityResult(True, (Fraction(0),) * n_vars)

    # Standard form A y = b, y >= 0, b >= 0.  Columns: structural (split when
    # free), then one slack per inequality.
    n_struct = n_vars if nonneg else 2 * n_vars
    n_slack = sum(rel != "=" for rel in relations)
    n_cols = n_struct + n_slack
    zero = _Q(0)
    table: list[list] = []
    slack_col = n_struct
    slack_of_row: list[int | None] = []
    for row, rel, b in zip(rows, relations, rhs):
        coeffs, b = _integer_row([*row, b])
        line = [zero] * (n_cols + 1)
        for j, a in enumerate(coeffs):
            line[j] = _Q(a)
            if not nonneg:
                line[n_vars + j] = _Q(-a)
        if rel != "=":
            line[slack_col] = _Q(1 if rel == "<=" else -1)
            slack_of_row.append(slack_col)
            slack_col += 1
        else:
            slack_of_row.append(None)
        line[-1] = _Q(b)
        if b < 0:
            line = [-v for v in line]
        table.append(line)

    # Basis: a slack with coefficient +1 may start basic, otherwise an artificial.
    basis: list[int] = []
    artificial: list[int] = []
    n_total = n_cols
    for i, line in enumerate(table):
        s = slack_of_row[i]
        if s is not None and line[s] == 1:
            basis.append(s)
        else:
            basis.append(n_total)
            artificial.append(n_total)
            n_total += 1
    width = n_total + 1
    for i, line in enumerate(table):
        rhs_val = line[-1]
        table[i] = line[:-1] + [zero] * (n_total - n_cols) + [rhs_val]
        if basis[i] >= n_cols:
            table[i][basis[i]] = _Q(1)

    if artificial:
        art = set(artificial)
        # Phase-1 objective: minimise the sum of artificials, expressed in
        # terms of the non-basic columns.
        cost = [zero] * width
        for i, line in enumerate(table):
            if basis[i] in art:
                for j in range(width):
                    cost[j] -= line[j]
        for a in artificial:
            cost[a] = zero
        _run_simplex(table, basis, cost, width)
        if cost[-1] != 0:
            return FeasibilityResult(False)

    values = [Fraction(0)] * n_total
    for i, var in enumerate(basis):
        v = table[i][-1]
        values[var] = Fraction(int(v.numerator), int(v.denominator))
    if nonneg:
        witness = tuple(values[:n_vars])
    else:
        witness = tuple(values[j] - values[n_vars + j] for j in range(n_vars))
    return FeasibilityResult(True, witness)


def _run_simplex(table: list[list], basis: list[int], cost: list,
                 width: int) -> None:
    """Minimise in place; ``cost[-1]`` holds minus the objective value."""
    m = len(table)
    while True:
        entering = next((j for j in range(width - 1) if cost[j] < 0), None)
        if entering is None:
            return
        leaving = None
        best_ratio = None
        for i in range(m):
            a = table[i][entering]
            if a > 0:
                ratio = table[i][-1] / a
                if (best_ratio is None or ratio < best_ratio
                        or (ratio == best_ratio and basis[i] < basis[leaving])):
                    best_ratio, leaving = ratio, i
        if leaving is None:
            # Unbounded below cannot happen for a sum of non-negative artificials.
            raise ArithmeticError("phase-1 objective unbounded")
        _pivot(table, cost, leaving, entering)
        basis[leaving] = entering


def _pivot(table: list[list], cost: list, r: int, c: int) -> None:
    pivot_row = table[r]
    p = pivot_row[c]
    if p != 1:
        pivot_row = table[r] = [v / p for v in pivot_row]
    nz = [j for j, v in enumerate(pivot_row) if v]
    for i, line in enumerate(table):
        if i != r and line[c]:
            f = line[c]
            for j in nz:
                line[j] -= f * pivot_row[j]
    if cost[c]:
        f = cost[c]
        for j in nz:
            cost[j] -= f * pivot_row[j]


def _integer_row(values: Sequence[Number]) -> tuple[list[int], int]:
    """Scale a row (with its rhs last) to integers by a positive factor."""
    fracs = [Fraction(v) for v in values]
    scale = lcm(*(f.denominator for f in fracs)) if fracs else 1
    ints = [int(f * scale) for f in fracs]
    return ints[:-1], ints[-1]
