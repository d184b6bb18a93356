"""
Tests for the exact simplex
"""

from fractions import Fraction

import pytest

from src.arith import FeasibilityBackend
from src.lp import LpError, LpStatus, solve_lp
from src.uncertainty import Relation

LE, EQ = Relation.LE, Relation.EQ


def test_optimum_is_exact():
    result = solve_lp([1, 1], [([1, 2], LE, 4), ([3, 1], LE, 6)])
    assert result.status is LpStatus.OPTIMAL
    assert result.value == Fraction(14, 5)
    assert result.point == [Fraction(8, 5), Fraction(6, 5)]


def test_equality_rows():
    result = solve_lp([0, 1, 0], [([1, 1, 1], EQ, 1), ([1, 0, 0], LE, Fraction(1, 3))])
    assert result.status is LpStatus.OPTIMAL
    assert result.value == 1


def test_negative_rhs_rows():
    # x >= 1/2 written as -x <= -1/2
    result = solve_lp([-1, 0], [([1, 1], EQ, 1), ([-1, 0], LE, Fraction(-1, 2))])
    assert result.status is LpStatus.OPTIMAL
    assert result.value == Fraction(-1, 2)


def test_infeasible():
    result = solve_lp([1], [([1], LE, 1), ([1], EQ, 2)])
    assert result.status is LpStatus.INFEASIBLE


def test_unbounded():
    result = solve_lp([1, 0], [([1, -1], LE, 1)])
    assert result.status is LpStatus.UNBOUNDED


def test_redundant_equalities():
    result = solve_lp([1, 0], [([1, 1], EQ, 1), ([2, 2], EQ, 2)])
    assert result.status is LpStatus.OPTIMAL
    assert result.value == 1


def test_degenerate_problem_terminates():
    # classic cycling example for the largest-coefficient rule
    rows = [
        ([Fraction(1, 4), -8, -1, 9], LE, 0),
        ([Fraction(1, 2), -12, Fraction(-1, 2), 3], LE, 0),
        ([0, 0, 1, 0], LE, 1),
    ]
    result = solve_lp([Fraction(3, 4), -20, Fraction(1, 2), -6], rows)
    assert result.status is LpStatus.OPTIMAL
    assert result.value == Fraction(5, 4)


def test_float_backend():
    backend = FeasibilityBackend.from_name('float', 1e-9)
    result = solve_lp([1, 1], [([1, 2], LE, 4), ([3, 1], LE, 6)], backend)
    assert result.status is LpStatus.OPTIMAL
    assert result.value == pytest.approx(2.8)


def test_malformed_constraint():
    with pytest.raises(LpError):
        solve_lp([1, 1], [([1], LE, 1)])
