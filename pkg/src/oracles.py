"""
Decision procedures over a single uncertainty set

Two primitives answer every question the solvers ask:

- ``face_feasible(entry, C)``: some admissible distribution lives on ``C``
- ``can_hit(entry, C, B)``: some admissible distribution on ``C`` puts
  positive mass on ``B``

The force oracles of both players are built from them. L_d balls are decided
in closed form from the minimal distance between the centre and a simplex
face, polytopes with the exact simplex in ``lp``, finite menus by enumeration.
"""

import logging
from itertools import combinations
from typing import FrozenSet, Iterable, List, Optional, Set, TYPE_CHECKING, Tuple

from .arith import EXACT, FeasibilityBackend, Number
from .logger import SolverLogger
from .lp import LpStatus, solve_lp
from .stats import OracleStats
from .uncertainty import FiniteMenu, LBall, Polytope, Relation, UncertaintyEntry

if TYPE_CHECKING:
    from .rmdp import Rmdp

log = SolverLogger(__name__)

DEFAULT_SUPPORT_CAP = 12


class OracleError(ValueError):
    """Query outside the successor domain of an uncertainty set"""


class SupportCapExceeded(OracleError):
    """Support enumeration would exceed the configured cap"""


def _usable_face(entry: UncertaintyEntry, face: Iterable[int]) -> FrozenSet[int]:
    face = frozenset(face)
    extra = face - set(entry.successors)
    if extra:
        raise OracleError(f"States {sorted(extra)} are not successors of this entry")
    return face & entry.usable


def _ball_distance(entry: UncertaintyEntry, face: FrozenSet[int],
                   backend: FeasibilityBackend) -> Tuple[Number, Number]:
    """
    Minimal distance from the centre to the face, and the radius, both raised
    to the norm exponent (plain values for the max norm)

    Zeroing the centre outside the face frees mass ``c``; spreading it evenly
    over the face is optimal for every L_d norm and never pushes a coordinate
    above 1, since each face coordinate starts at most at ``1 - c``.
    """
    ball: LBall = entry.family
    outside = [backend.num(p) for t, p in zip(entry.successors, entry.center) if t not in face]
    moved = sum(outside, backend.num(0))
    increment = moved / len(face)
    radius = backend.num(ball.radius)
    if ball.is_max_norm:
        return max(max(outside, default=backend.num(0)), increment), radius
    d = ball.exponent
    distance = sum((p ** d for p in outside), backend.num(0)) + len(face) * increment ** d
    return distance, radius ** d


def uniform_increment_cost(entry: UncertaintyEntry, avoid: Iterable[int]) -> Optional[Tuple[Number, Number]]:
    """
    Uniform-increment cost ``(k1, k2)`` of keeping all mass inside ``avoid``

    ``k2`` is the cost of zeroing the centre outside ``avoid`` and ``k1`` the
    cost of spreading that mass evenly over all of ``avoid``, counting every
    successor coordinate whether or not the set may use it.

    Returns:
        ``None`` when ``avoid`` is empty (the cost is unbounded)
    """
    avoid = frozenset(avoid) & frozenset(entry.successors)
    if not avoid:
        return None
    ball: LBall = entry.family
    outside = [p for t, p in zip(entry.successors, entry.center) if t not in avoid]
    moved = sum(outside)
    if ball.is_max_norm:
        return moved / len(avoid), max(outside, default=0)
    d = ball.exponent
    return len(avoid) * (moved / len(avoid)) ** d, sum(p ** d for p in outside)


def uniform_increment_forces(entry: UncertaintyEntry, avoid: Iterable[int]) -> bool:
    """Uniform-increment test: no admissible distribution stays inside ``avoid``"""
    cost = uniform_increment_cost(entry, avoid)
    if cost is None:
        return True
    k1, k2 = cost
    ball: LBall = entry.family
    if ball.is_max_norm:
        return max(k1, k2) > ball.radius
    return k1 + k2 > ball.radius ** ball.exponent


class UncertaintyOracle:
    """
    Oracle front end bound to an arithmetic backend and a statistics collector

    Args:
        backend: Exact or tolerant-float comparisons
        stats: Call counters; a fresh collector is created when omitted
        support_cap: Largest face size ``achievable_supports`` will enumerate
    """

    def __init__(self, backend: FeasibilityBackend = EXACT, stats: Optional[OracleStats] = None,
                 support_cap: int = DEFAULT_SUPPORT_CAP):
        self.backend = backend
        self.stats = stats if stats is not None else OracleStats()
        self.support_cap = support_cap

    # Primitives

    def face_feasible(self, entry: UncertaintyEntry, face: Iterable[int]) -> bool:
        """True iff some admissible distribution has all its mass on ``face``"""
        self.stats.record_primitive()
        usable = _usable_face(entry, face)
        if not usable:
            return False

        family = entry.family
        if isinstance(family, LBall):
            distance, bound = _ball_distance(entry, usable, self.backend)
            return self.backend.leq(distance, bound)
        if isinstance(family, Polytope):
            return self._polytope_max(entry, usable, frozenset()) is not None
        if isinstance(family, FiniteMenu):
            return any(self._member_support(entry, m) <= usable for m in family.members)
        raise OracleError(f"Unknown uncertainty family {type(family).__name__}")

    def can_hit(self, entry: UncertaintyEntry, face: Iterable[int], target: Iterable[int]) -> bool:
        """True iff some admissible distribution on ``face`` puts positive mass on ``target``"""
        usable = _usable_face(entry, face)
        hit = usable & frozenset(target)
        if not self.face_feasible(entry, usable) or not hit:
            return False

        backend = self.backend
        family = entry.family
        if isinstance(family, LBall):
            moved = sum((backend.num(p) for t, p in zip(entry.successors, entry.center)
                         if t not in usable), backend.num(0))
            if backend.positive(moved):
                # the closest point spreads the moved mass over the whole face
                return True
            nominal = sum((backend.num(p) for t, p in zip(entry.successors, entry.center)
                           if t in hit), backend.num(0))
            if backend.positive(nominal):
                return True
            # the centre sits on the face already; any slack moves mass onto the target
            return backend.positive(backend.num(family.radius))
        if isinstance(family, Polytope):
            best = self._polytope_max(entry, usable, hit)
            return best is not None and backend.positive(best)
        if isinstance(family, FiniteMenu):
            for member in family.members:
                support = self._member_support(entry, member)
                if support <= usable and support & hit:
                    return True
            return False
        raise OracleError(f"Unknown uncertainty family {type(family).__name__}")

    def achievable_supports(self, entry: UncertaintyEntry, face: Iterable[int]) -> Set[FrozenSet[int]]:
        """
        Supports the environment can realize exactly on ``face``

        A subset is achievable iff its face is feasible and every one of its
        coordinates can receive positive mass on it; averaging the per-coordinate
        witnesses keeps the result inside the convex set.

        Raises:
            SupportCapExceeded: if ``face`` is larger than the support cap
        """
        face = frozenset(face)
        if len(face) > self.support_cap:
            raise SupportCapExceeded(
                f"Face of size {len(face)} exceeds the support cap {self.support_cap}"
            )
        usable = _usable_face(entry, face)
        family = entry.family
        if isinstance(family, FiniteMenu):
            supports = (self._member_support(entry, m) for m in family.members)
            return {s for s in supports if s <= usable}

        ordered = sorted(usable)
        achievable: Set[FrozenSet[int]] = set()
        for size in range(1, len(ordered) + 1):
            for subset in combinations(ordered, size):
                candidate = frozenset(subset)
                if not self.face_feasible(entry, candidate):
                    continue
                if all(self.can_hit(entry, candidate, {t}) for t in candidate):
                    achievable.add(candidate)
        return achievable

    # Force oracles

    def agent_action(self, model: 'Rmdp', state: int, target: FrozenSet[int]) -> Optional[int]:
        """
        Lowest action at ``state`` under which every admissible distribution
        reaches ``target`` with positive probability

        Returns:
            The action id, or ``None`` when the agent cannot force ``target``
        """
        self.stats.record_force()
        chosen = None
        for action in model.menu(state):
            entry = model.entry(state, action)
            face = model.face(state, action)
            forced = not self.face_feasible(entry, face - target)
            if isinstance(entry.family, LBall) and log.logger.isEnabledFor(logging.DEBUG):
                uncapped = uniform_increment_forces(entry, face - target)
                if uncapped != forced:
                    log.oracle_mismatch(model.state_names[state], model.action_names[action],
                                        forced, uncapped)
            if forced:
                chosen = action
                break
        return chosen

    def force_agent(self, model: 'Rmdp', state: int, target: FrozenSet[int]) -> bool:
        return self.agent_action(model, state, frozenset(target)) is not None

    def force_env(self, model: 'Rmdp', state: int, target: FrozenSet[int]) -> bool:
        """True iff every action at ``state`` lets the environment hit ``target``"""
        self.stats.record_force()
        target = frozenset(target)
        return all(self.can_hit(model.entry(state, a), model.face(state, a), target)
                   for a in model.menu(state))

    # Helpers

    @staticmethod
    def _member_support(entry: UncertaintyEntry, member) -> FrozenSet[int]:
        return frozenset(t for t, p in zip(entry.successors, member) if p > 0)

    def _polytope_max(self, entry: UncertaintyEntry, usable: FrozenSet[int],
                      hit: FrozenSet[int]) -> Optional[Number]:
        """Maximal mass on ``hit`` over the polytope restricted to ``usable``; ``None`` if empty"""
        positions = [i for i, t in enumerate(entry.successors) if t in usable]
        objective = [1 if entry.successors[i] in hit else 0 for i in positions]
        constraints: List = [([1] * len(positions), Relation.EQ, 1)]
        for row in entry.family.rows:
            constraints.append(([row.coefficients[i] for i in positions], row.relation, row.rhs))
        result = solve_lp(objective, constraints, self.backend)
        if result.status is LpStatus.INFEASIBLE:
            return None
        return result.value


def face_feasible(entry: UncertaintyEntry, face: Iterable[int], backend: FeasibilityBackend = EXACT,
                  stats: Optional[OracleStats] = None) -> bool:
    return UncertaintyOracle(backend, stats).face_feasible(entry, face)


def can_hit(entry: UncertaintyEntry, face: Iterable[int], target: Iterable[int],
            backend: FeasibilityBackend = EXACT, stats: Optional[OracleStats] = None) -> bool:
    return UncertaintyOracle(backend, stats).can_hit(entry, face, target)


def force_agent(model: 'Rmdp', state: int, target: Iterable[int], backend: FeasibilityBackend = EXACT,
                stats: Optional[OracleStats] = None) -> bool:
    return UncertaintyOracle(backend, stats).force_agent(model, state, frozenset(target))


def force_env(model: 'Rmdp', state: int, target: Iterable[int], backend: FeasibilityBackend = EXACT,
              stats: Optional[OracleStats] = None) -> bool:
    return UncertaintyOracle(backend, stats).force_env(model, state, frozenset(target))


def achievable_supports(entry: UncertaintyEntry, face: Iterable[int],
                        support_cap: int = DEFAULT_SUPPORT_CAP,
                        backend: FeasibilityBackend = EXACT) -> Set[FrozenSet[int]]:
    return UncertaintyOracle(backend, support_cap=support_cap).achievable_supports(entry, face)


def uniform_increment_agent_action(model: 'Rmdp', state: int, target: FrozenSet[int]) -> Optional[int]:
    """
    Lowest action forcing ``target`` under the uniform-increment test for
    ball entries (other families use the exact oracle)
    """
    oracle = UncertaintyOracle()
    for action in model.menu(state):
        entry = model.entry(state, action)
        face = model.face(state, action)
        if isinstance(entry.family, LBall):
            forced = uniform_increment_forces(entry, face - target)
        else:
            forced = not oracle.face_feasible(entry, face - target)
        if forced:
            return action
    return None
