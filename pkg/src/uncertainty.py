"""
Uncertainty-set descriptors for one (state, action) pair

An entry couples a nominal transition template (successor list and centre
distribution) with the family describing which distributions the environment
may pick: an L_d ball, a polytope given by linear rows, or an explicit finite
menu. The successor list is the coordinate domain of every vector in here.
"""

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import FrozenSet, List, Sequence, Tuple, Union


class Relation(Enum):
    """Relation of a polytope row"""
    LE = "<="
    EQ = "="


@dataclass(frozen=True)
class TransitionTemplate:
    """Nominal distribution of one (state, action) pair over its successor domain"""
    successors: Tuple[int, ...]
    center: Tuple[Fraction, ...]

    def position(self, state: int) -> int:
        return self.successors.index(state)

    @property
    def support(self) -> FrozenSet[int]:
        return frozenset(t for t, p in zip(self.successors, self.center) if p > 0)

    def mass(self, states: FrozenSet[int]) -> Fraction:
        """Nominal probability of landing in ``states``"""
        return sum((p for t, p in zip(self.successors, self.center) if t in states), Fraction(0))

    def problems(self) -> List[str]:
        issues = []
        if not self.successors:
            issues.append("empty successor list")
        if len(set(self.successors)) != len(self.successors):
            issues.append("duplicate successors")
        if len(self.center) != len(self.successors):
            issues.append("center length differs from successor list")
        elif any(p < 0 for p in self.center) or sum(self.center) != 1:
            issues.append("center not a distribution")
        return issues


@dataclass(frozen=True)
class LBall:
    """Ball of radius ``radius`` around the centre in the L_exponent norm"""
    exponent: Union[int, float]
    radius: Fraction

    tag = "lball"

    @property
    def is_max_norm(self) -> bool:
        return self.exponent == math.inf

    def describe(self) -> str:
        norm = "inf" if self.is_max_norm else str(self.exponent)
        return f"L{norm}(R={self.radius})"


@dataclass(frozen=True)
class PolytopeRow:
    """One linear row ``coefficients . p (<=|=) rhs``"""
    coefficients: Tuple[Fraction, ...]
    relation: Relation
    rhs: Fraction

    def holds(self, vector: Sequence[Fraction]) -> bool:
        value = sum((a * x for a, x in zip(self.coefficients, vector)), Fraction(0))
        if self.relation is Relation.EQ:
            return value == self.rhs
        return value <= self.rhs

    def scaled(self, factor: Fraction) -> 'PolytopeRow':
        return PolytopeRow(tuple(a * factor for a in self.coefficients), self.relation, self.rhs * factor)


@dataclass(frozen=True)
class Polytope:
    """Distributions satisfying every row (the simplex constraints are implicit)"""
    rows: Tuple[PolytopeRow, ...]

    tag = "polytope"

    def describe(self) -> str:
        return f"Polytope({len(self.rows)} rows)"


@dataclass(frozen=True)
class FiniteMenu:
    """Explicit list of admissible distributions"""
    members: Tuple[Tuple[Fraction, ...], ...]

    tag = "menu"

    def describe(self) -> str:
        return f"Menu({len(self.members)} members)"


Family = Union[LBall, Polytope, FiniteMenu]


@dataclass(frozen=True)
class UncertaintyEntry:
    """The ambiguity set of one (state, action) pair"""
    template: TransitionTemplate
    family: Family
    support_restricted: bool = False

    @property
    def successors(self) -> Tuple[int, ...]:
        return self.template.successors

    @property
    def center(self) -> Tuple[Fraction, ...]:
        return self.template.center

    @property
    def usable(self) -> FrozenSet[int]:
        """Successors the environment may put mass on at all"""
        if self.support_restricted:
            return self.template.support
        return frozenset(self.template.successors)

    def problems(self) -> List[str]:
        """Type-invariant violations of this entry (empty when well formed)"""
        issues = self.template.problems()
        if issues:
            return issues

        n = len(self.successors)
        family = self.family
        if isinstance(family, LBall):
            if family.radius < 0:
                issues.append("negative radius")
            if not (family.is_max_norm or (isinstance(family.exponent, int) and family.exponent >= 1)):
                issues.append(f"invalid norm exponent {family.exponent}")
        elif isinstance(family, Polytope):
            for i, row in enumerate(family.rows):
                if len(row.coefficients) != n:
                    issues.append(f"row {i} has {len(row.coefficients)} coefficients, expected {n}")
                elif not row.holds(self.center):
                    issues.append(f"center outside polytope (row {i})")
        elif isinstance(family, FiniteMenu):
            if not family.members:
                issues.append("empty menu")
            support = self.template.support
            for i, member in enumerate(family.members):
                if len(member) != n or any(p < 0 for p in member) or sum(member) != 1:
                    issues.append(f"menu member {i} not a distribution")
                elif self.support_restricted and any(
                        p > 0 and t not in support for t, p in zip(self.successors, member)):
                    issues.append(f"menu member {i} leaves the nominal support")
            if tuple(self.center) not in {tuple(m) for m in family.members}:
                issues.append("center not in menu")
        else:
            issues.append(f"unknown family {type(family).__name__}")
        return issues
