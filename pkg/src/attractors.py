"""
Positive attractors of the agent and of the environment

Both are computed as the layered fixpoint: layer ``i`` adds every state
that can force the union of the earlier layers in one step. States are
scanned in ascending id order, which makes ranks and witnesses deterministic.
"""

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Optional, Set

from .logger import SolverLogger
from .oracles import UncertaintyOracle
from .rmdp import ActionId, MemorylessPolicy, Rmdp, StateId
from .stats import OracleStats, check_budget

log = SolverLogger(__name__)

AGENT = "agent"
ENV = "environment"


@dataclass
class AttractorResult:
    """
    Positive attractor of a target set

    Attributes:
        states: The attractor, including the target
        rank: Layer in which each state entered (0 for the target)
        witness: Agent action realizing the force step (agent attractor only)
        hitting: States of the previous layer each environment state can hit
        stats: Oracle calls made by this computation
        layers: Number of non-empty layers added on top of the target
    """
    states: FrozenSet[StateId]
    rank: Dict[StateId, int]
    witness: MemorylessPolicy = field(default_factory=MemorylessPolicy)
    hitting: Dict[StateId, FrozenSet[StateId]] = field(default_factory=dict)
    stats: OracleStats = field(default_factory=OracleStats)
    layers: int = 0


def attractor_budget(n_live: int) -> int:
    return n_live * n_live + n_live


def _predecessors(model: Rmdp) -> Dict[StateId, Set[StateId]]:
    preds: Dict[StateId, Set[StateId]] = {}
    for s, a in model.pairs():
        for t in model.face(s, a):
            preds.setdefault(t, set()).add(s)
    return preds


def _attractor(model: Rmdp, target: Iterable[StateId], player: str,
               oracle: Optional[UncertaintyOracle], assert_budget: bool,
               exclude: Iterable[StateId] = ()) -> AttractorResult:
    oracle = oracle or UncertaintyOracle()
    before = oracle.stats.snapshot()
    target = model.check_live(target, f"{player} attractor")
    exclude = frozenset(exclude)

    current = set(target)
    rank = {t: 0 for t in target}
    witness: Dict[StateId, ActionId] = {}
    hitting: Dict[StateId, FrozenSet[StateId]] = {}
    layers = 0
    predecessors = _predecessors(model)
    candidates = model.live - current - exclude
    while True:
        previous = frozenset(current)
        added = []
        for s in model.ordered(candidates):
            if player == AGENT:
                action = oracle.agent_action(model, s, previous)
                if action is not None:
                    added.append(s)
                    witness[s] = action
            elif oracle.force_env(model, s, previous):
                added.append(s)
                reachable = frozenset().union(*(model.face(s, a) for a in model.menu(s)))
                hitting[s] = reachable & previous
        if not added:
            break
        layers += 1
        for s in added:
            rank[s] = layers
            current.add(s)
        # only states with a face touching the new layer can change their answer
        touched = set().union(*(predecessors.get(s, ()) for s in added))
        candidates = frozenset(touched) - current - exclude

    stats = oracle.stats.since(before)
    if assert_budget:
        check_budget(stats, attractor_budget(len(model.live)), f"{player} attractor")
    log.attractor_computed(player, len(current), layers, stats.force_calls)
    return AttractorResult(
        states=frozenset(current),
        rank=rank,
        witness=MemorylessPolicy(witness),
        hitting=hitting,
        stats=stats,
        layers=layers,
    )


def pattr_agent(model: Rmdp, target: Iterable[StateId], oracle: Optional[UncertaintyOracle] = None,
                assert_budget: bool = True) -> AttractorResult:
    """
    States from which the agent reaches ``target`` with positive probability
    against every environment behaviour

    Args:
        model: Current (sub-)model
        target: Live target states
        oracle: Oracle and statistics collector; a fresh exact one by default
        assert_budget: Fail if more than ``|S|^2 + |S|`` force calls are made

    Returns:
        The attractor with ranks and the rank-decreasing witness actions
    """
    return _attractor(model, target, AGENT, oracle, assert_budget)


def pattr_env(model: Rmdp, target: Iterable[StateId], oracle: Optional[UncertaintyOracle] = None,
              assert_budget: bool = True, exclude: Iterable[StateId] = ()) -> AttractorResult:
    """
    States from which the environment reaches ``target`` with positive
    probability whatever the agent does

    ``exclude`` lists states that never join (absorbing states of the caller's
    objective, such as reached targets).

    Live states with an empty menu join layer 1 even when ``target`` is
    empty: the environment forces vacuously when the agent has no action.
    Their ``hitting`` set is empty.
    """
    return _attractor(model, target, ENV, oracle, assert_budget, exclude)
