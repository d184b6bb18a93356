"""
Two-phase tableau simplex over exact rationals (or tolerant floats)

Pivoting follows Bland's rule on both the entering and the leaving variable,
so the method terminates without anti-cycling perturbations. The problems
solved here are tiny (one variable per successor), so a dense tableau is fine.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

from .arith import EXACT, FeasibilityBackend, Number
from .uncertainty import Relation


class LpError(ArithmeticError):
    """Malformed linear program"""


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class LpResult:
    status: LpStatus
    value: Optional[Number] = None
    point: List[Number] = field(default_factory=list)


Constraint = Tuple[Sequence[Number], Relation, Number]


class SimplexTableau:
    """Dense simplex tableau in equality form with non-negative right-hand side"""

    def __init__(self, rows: List[List[Number]], rhs: List[Number], backend: FeasibilityBackend):
        self.backend = backend
        self.eps = backend.eps
        self.A = rows
        self.b = rhs
        self.m = len(rows)
        self.n = len(rows[0]) if rows else 0
        self.basis: List[int] = []

    def pivot(self, i: int, j: int):
        piv = self.A[i][j]
        row = [v / piv for v in self.A[i]]
        self.A[i] = row
        self.b[i] = self.b[i] / piv
        for k in range(self.m):
            if k != i:
                f = self.A[k][j]
                if f != 0:
                    self.A[k] = [a - f * r for a, r in zip(self.A[k], row)]
                    self.b[k] -= f * self.b[i]
        self.basis[i] = j

    def reduced_costs(self, cost: Sequence[Number], allowed: Sequence[bool]) -> List[Number]:
        reduced = []
        for j in range(self.n):
            if not allowed[j]:
                reduced.append(0)
                continue
            value = cost[j]
            for i in range(self.m):
                value -= cost[self.basis[i]] * self.A[i][j]
            reduced.append(value)
        return reduced

    def bland_primal(self, cost: Sequence[Number], allowed: Sequence[bool]) -> LpStatus:
        """Maximize ``cost . x`` from the current feasible basis"""
        while True:
            reduced = self.reduced_costs(cost, allowed)
            entering = next((j for j in range(self.n) if allowed[j] and reduced[j] > self.eps), None)
            if entering is None:
                return LpStatus.OPTIMAL
            try:
                _, _, leaving = min(
                    (self.b[i] / self.A[i][entering], self.basis[i], i)
                    for i in range(self.m)
                    if self.A[i][entering] > self.eps
                )
            except ValueError:
                return LpStatus.UNBOUNDED
            self.pivot(leaving, entering)

    def objective(self, cost: Sequence[Number]) -> Number:
        return sum((cost[self.basis[i]] * self.b[i] for i in range(self.m)), self.backend.num(0))

    def drop_row(self, i: int):
        del self.A[i]
        del self.b[i]
        del self.basis[i]
        self.m -= 1


def solve_lp(objective: Sequence[Number], constraints: Sequence[Constraint],
             backend: FeasibilityBackend = EXACT) -> LpResult:
    """
    Maximize ``objective . x`` subject to ``constraints`` and ``x >= 0``

    Args:
        objective: One coefficient per variable
        constraints: ``(coefficients, relation, rhs)`` triples
        backend: Arithmetic used for the tableau

    Returns:
        Status, optimal value and an optimal point when one exists
    """
    nvars = len(objective)
    for coeffs, _, _ in constraints:
        if len(coeffs) != nvars:
            raise LpError(f"Constraint has {len(coeffs)} coefficients, expected {nvars}")

    zero, one = backend.num(0), backend.num(1)
    n_slack = sum(1 for _, rel, _ in constraints if rel is Relation.LE)
    m = len(constraints)
    width = nvars + n_slack + m

    rows: List[List[Number]] = []
    rhs: List[Number] = []
    slack = nvars
    for i, (coeffs, rel, value) in enumerate(constraints):
        row = [backend.num(a) for a in coeffs] + [zero] * (n_slack + m)
        if rel is Relation.LE:
            row[slack] = one
            slack += 1
        value = backend.num(value)
        if value < 0:
            row = [-a for a in row]
            value = -value
        row[nvars + n_slack + i] = one
        rows.append(row)
        rhs.append(value)

    if m == 0:
        if any(backend.positive(c) for c in objective):
            return LpResult(LpStatus.UNBOUNDED)
        return LpResult(LpStatus.OPTIMAL, zero, [zero] * nvars)

    tableau = SimplexTableau(rows, rhs, backend)
    artificial_start = nvars + n_slack
    tableau.basis = [artificial_start + i for i in range(m)]

    # phase 1: drive the artificial variables to zero
    phase1 = [zero] * artificial_start + [-one] * m
    tableau.bland_primal(phase1, [True] * width)
    if backend.positive(-tableau.objective(phase1)):
        return LpResult(LpStatus.INFEASIBLE)

    i = 0
    while i < tableau.m:
        if tableau.basis[i] >= artificial_start:
            j = next((j for j in range(artificial_start)
                      if not backend.is_zero(tableau.A[i][j])), None)
            if j is None:
                tableau.drop_row(i)
                continue
            tableau.pivot(i, j)
        i += 1

    # phase 2
    cost = [backend.num(c) for c in objective] + [zero] * (n_slack + m)
    allowed = [j < artificial_start for j in range(width)]
    status = tableau.bland_primal(cost, allowed)
    if status is LpStatus.UNBOUNDED:
        return LpResult(status)

    point = [zero] * nvars
    for i, j in enumerate(tableau.basis):
        if j < nvars:
            point[j] = tableau.b[i]
    return LpResult(LpStatus.OPTIMAL, tableau.objective(cost), point)
