"""
Almost-sure reachability and parity solvers

All solvers shrink the model by removing states the opponent wins, until a
fixpoint is reached. Parity is solved by the mutual recursion between the
agent and the environment; the budgeted variant bounds the size of the
opponent regions removed in the outer loops by half of the current budget,
except for a single full-budget step.
"""

from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Iterable, List, Optional, Union

from .attractors import pattr_agent, pattr_env
from .logger import SolverLogger
from .oracles import UncertaintyOracle
from .rmdp import (ActionId, MemorylessPolicy, ModelError, PriorityFunction, Rmdp, StateId,
                   absorb_stuck_states, induce_policy, remove_states, restrict_to)
from .stats import NO_DEADLINE, Deadline, OracleStats, check_budget

log = SolverLogger(__name__)

REACH_BUDGET_FACTOR = 2
PARITY_BUDGET_FACTOR = 4


@dataclass(frozen=True)
class Reach:
    """Eventually visit ``target``"""
    target: FrozenSet[StateId]

    def describe(self, model: Rmdp) -> str:
        return f"reach{{{', '.join(model.names(self.target))}}}"


@dataclass(frozen=True)
class Parity:
    """Maximal priority seen infinitely often is even; ``None`` uses the model's priorities"""
    priorities: Optional[PriorityFunction] = None

    def describe(self, model: Rmdp) -> str:
        return "parity"


Objective = Union[Reach, Parity]


@dataclass
class SolveResult:
    """
    Outcome of a qualitative solve

    Attributes:
        winning: States won almost-surely by the solving player
        policy: Agent policy on ``winning`` (agent solvers only)
        trace: States removed by each outer iteration
        stats: Oracle calls of the whole solve
        policy_stats: Oracle calls of a separate policy pass, kept out of ``stats``
        iterations: Outer iterations, including the final confirming one
        counter_policy: Agent actions on the states an environment solver gave up
        procedure: Name of the solver that produced the result
    """
    winning: FrozenSet[StateId]
    policy: MemorylessPolicy = field(default_factory=MemorylessPolicy)
    trace: List[FrozenSet[StateId]] = field(default_factory=list)
    stats: OracleStats = field(default_factory=OracleStats)
    iterations: int = 0
    counter_policy: MemorylessPolicy = field(default_factory=MemorylessPolicy)
    procedure: str = ""
    policy_stats: OracleStats = field(default_factory=OracleStats)


def as_reach(model: Rmdp, target: Iterable[StateId], oracle: Optional[UncertaintyOracle] = None,
             deadline: Deadline = NO_DEADLINE, assert_budget: bool = True) -> SolveResult:
    """
    States from which the agent reaches ``target`` with probability 1

    Each iteration removes the environment attractor of the states that
    cannot reach the target at all. Reached targets are absorbing, so they
    never join that attractor.

    Args:
        model: Model to solve
        target: Live target states
        oracle: Oracle and statistics collector
        deadline: Checked before every outer iteration
        assert_budget: Fail on more than ``2|S|^3`` force calls

    Returns:
        Winning set, rank-decreasing witness policy and removal trace

    Raises:
        ModelError: if ``target`` contains unknown states
        SolveTimeout: if the deadline passes
    """
    oracle = oracle or UncertaintyOracle()
    before = oracle.stats.snapshot()
    target = model.check_live(target, "as_reach")
    n_states = len(model.live)

    current = model
    trace: List[FrozenSet[StateId]] = []
    iterations = 0
    while True:
        deadline.check("as_reach")
        iterations += 1
        log.iteration("as_reach", iterations, len(current.live))
        reach = pattr_agent(current, target, oracle, assert_budget)
        blocked = current.live - reach.states
        if not blocked:
            break
        removed = pattr_env(current, blocked, oracle, assert_budget, exclude=target).states
        trace.append(removed)
        log.states_removed("as_reach", current.names(removed))
        current = remove_states(current, removed, oracle)

    choices: Dict[StateId, ActionId] = dict(reach.witness.choices)
    for t in sorted(target):
        if model.menu(t):
            choices[t] = model.menu(t)[0]

    stats = oracle.stats.since(before)
    if assert_budget:
        check_budget(stats, REACH_BUDGET_FACTOR * n_states ** 3, "as_reach")
    log.solve_finished("as_reach", len(current.live), iterations, stats.force_calls)
    return SolveResult(
        winning=current.live,
        policy=MemorylessPolicy(choices),
        trace=trace,
        stats=stats,
        iterations=iterations,
        procedure="as_reach",
    )


@dataclass
class _Level:
    """State of one recursion level of the parity solver"""
    model: Rmdp
    winning: FrozenSet[StateId] = frozenset()
    policy: Dict[StateId, ActionId] = field(default_factory=dict)
    counter: Dict[StateId, ActionId] = field(default_factory=dict)
    trace: List[FrozenSet[StateId]] = field(default_factory=list)
    iterations: int = 0


class ParityEngine:
    """
    Mutual recursion between the agent and the environment parity solvers

    Args:
        priorities: Priority of every state of the model
        oracle: Shared oracle and statistics collector
        deadline: Checked before every round at every level
        budgeted: Use the halved-budget three-phase loop
        collect_policy: Assemble the agent policy and environment counter-policy
        assert_budget: Pass budget assertions down to the attractors
    """

    def __init__(self, priorities: PriorityFunction, oracle: UncertaintyOracle,
                 deadline: Deadline = NO_DEADLINE, budgeted: bool = False,
                 collect_policy: bool = True, assert_budget: bool = True):
        self.priorities = priorities
        self.oracle = oracle
        self.deadline = deadline
        self.budgeted = budgeted
        self.collect_policy = collect_policy
        self.assert_budget = assert_budget

    def _top(self, model: Rmdp, d: int) -> FrozenSet[StateId]:
        return frozenset(s for s in model.live if self.priorities[s] == d)

    def agent(self, model: Rmdp, d: int, ms_agent: int, ms_env: int) -> _Level:
        """Agent almost-sure parity on ``model`` with maximal priority ``d``"""
        if d % 2:
            d += 1
        level = _Level(model=model)
        if not model.live or ms_agent <= 0:
            return level
        if self.budgeted:
            self._agent_rounds(level, d, ms_env // 2, ms_agent, repeat=True)
            self._agent_rounds(level, d, ms_env, ms_agent, repeat=False)
            self._agent_rounds(level, d, ms_env // 2, ms_agent, repeat=True)
        else:
            self._agent_rounds(level, d, ms_env, ms_agent, repeat=True)
        level.winning = level.model.live
        return level

    def env(self, model: Rmdp, d: int, ms_env: int, ms_agent: int) -> _Level:
        """Environment almost-sure parity (the agent loses a.s.) with maximal priority ``d``"""
        if d % 2 == 0:
            d += 1
        level = _Level(model=model)
        if not model.live or ms_env <= 0:
            return level
        if self.budgeted:
            self._env_rounds(level, d, ms_agent // 2, ms_env, repeat=True)
            self._env_rounds(level, d, ms_agent, ms_env, repeat=False)
            self._env_rounds(level, d, ms_agent // 2, ms_env, repeat=True)
        else:
            self._env_rounds(level, d, ms_agent, ms_env, repeat=True)
        level.winning = level.model.live
        return level

    def _agent_rounds(self, level: _Level, d: int, ms_sub: int, ms_agent: int, repeat: bool):
        while True:
            self.deadline.check("parity (agent)")
            level.iterations += 1
            current = level.model
            if not current.live:
                return
            top = self._top(current, d)
            attr = pattr_agent(current, top, self.oracle, self.assert_budget)
            sub = restrict_to(current, current.live - attr.states, self.oracle)
            opponent = self.env(sub, d - 1, ms_sub, ms_agent)
            if opponent.winning:
                removed = pattr_env(current, opponent.winning, self.oracle, self.assert_budget).states
                level.trace.append(removed)
                level.model = remove_states(current, removed, self.oracle)
            elif self.collect_policy:
                level.policy = self._agent_policy(current, top, attr.witness, opponent)
            if not (repeat and opponent.winning):
                return

    def _env_rounds(self, level: _Level, d: int, ms_sub: int, ms_env: int, repeat: bool):
        while True:
            self.deadline.check("parity (environment)")
            level.iterations += 1
            current = level.model
            if not current.live:
                return
            top = self._top(current, d)
            attr = pattr_env(current, top, self.oracle, self.assert_budget)
            sub = remove_states(current, attr.states, self.oracle)
            opponent = self.agent(sub, d - 1, ms_sub, ms_env)
            if opponent.winning:
                gained = pattr_agent(current, opponent.winning, self.oracle, self.assert_budget)
                if self.collect_policy:
                    level.counter.update(gained.witness.choices)
                    level.counter.update(opponent.policy)
                level.trace.append(gained.states)
                level.model = restrict_to(current, current.live - gained.states, self.oracle)
            if not (repeat and opponent.winning):
                return

    @staticmethod
    def _agent_policy(model: Rmdp, top: FrozenSet[StateId], witness: MemorylessPolicy,
                      opponent: _Level) -> Dict[StateId, ActionId]:
        # attractor witness off the top priority, any surviving action on it,
        # the sub-game policy below
        policy = dict(opponent.counter)
        policy.update(witness.choices)
        for s in sorted(top):
            if model.menu(s):
                policy[s] = model.menu(s)[0]
        return policy


def _prepare_parity(model: Rmdp, priorities: Optional[PriorityFunction]) -> Rmdp:
    priorities = priorities if priorities is not None else model.priorities
    if priorities is None:
        raise ModelError("Parity objective needs priorities")
    missing = [s for s in model.ordered() if s not in priorities.values]
    if missing:
        raise ModelError(f"Missing priorities for states {model.names(missing)}")
    return absorb_stuck_states(replace(model, priorities=priorities))


def _parity_result(level: _Level, procedure: str, stats: OracleStats,
                   policy: Optional[Dict[StateId, ActionId]] = None) -> SolveResult:
    log.solve_finished(procedure, len(level.winning), level.iterations, stats.force_calls)
    return SolveResult(
        winning=level.winning,
        policy=MemorylessPolicy(policy if policy is not None else level.policy),
        trace=level.trace,
        stats=stats,
        iterations=level.iterations,
        counter_policy=MemorylessPolicy(level.counter),
        procedure=procedure,
    )


def _parity_budget(n_states: int, d: int) -> int:
    return PARITY_BUDGET_FACTOR * n_states ** (d + 2)


def as_parity_agent(model: Rmdp, priorities: Optional[PriorityFunction] = None,
                    oracle: Optional[UncertaintyOracle] = None, deadline: Deadline = NO_DEADLINE,
                    assert_budget: bool = True) -> SolveResult:
    """
    States from which the agent satisfies the parity condition with probability 1

    Live states without actions become priority-1 self-loops first. The
    priorities are never modified; ``d`` is raised to the next even number
    inside the call.

    Args:
        model: Model to solve
        priorities: Priority per state; defaults to the model's own

    Returns:
        Winning set with a pure memoryless winning policy

    Raises:
        ModelError: if priorities are missing
        SolveTimeout: if the deadline passes
    """
    oracle = oracle or UncertaintyOracle()
    before = oracle.stats.snapshot()
    prepared = _prepare_parity(model, priorities)
    n_states = len(prepared.live)
    d = prepared.priorities.max_priority(prepared.live)
    d += d % 2

    engine = ParityEngine(prepared.priorities, oracle, deadline, assert_budget=assert_budget)
    level = engine.agent(prepared, d, n_states, n_states)
    stats = oracle.stats.since(before)
    if assert_budget:
        check_budget(stats, _parity_budget(n_states, d), "as_parity_agent")
    return _parity_result(level, "as_parity_agent", stats)


def as_parity_env(model: Rmdp, priorities: Optional[PriorityFunction] = None,
                  oracle: Optional[UncertaintyOracle] = None, deadline: Deadline = NO_DEADLINE,
                  assert_budget: bool = True) -> SolveResult:
    """
    States from which the environment makes the parity condition fail with probability 1

    The result carries no agent policy; ``counter_policy`` holds the agent
    actions on the states the environment gives up.
    """
    oracle = oracle or UncertaintyOracle()
    before = oracle.stats.snapshot()
    prepared = _prepare_parity(model, priorities)
    n_states = len(prepared.live)
    d = prepared.priorities.max_priority(prepared.live)
    d += 1 - d % 2

    engine = ParityEngine(prepared.priorities, oracle, deadline, assert_budget=assert_budget)
    level = engine.env(prepared, d, n_states, n_states)
    stats = oracle.stats.since(before)
    if assert_budget:
        check_budget(stats, _parity_budget(n_states, d), "as_parity_env")
    return _parity_result(level, "as_parity_env", stats, policy={})


def eff_as_parity_agent(model: Rmdp, priorities: Optional[PriorityFunction] = None,
                        ms_agent: Optional[int] = None, ms_env: Optional[int] = None,
                        oracle: Optional[UncertaintyOracle] = None, deadline: Deadline = NO_DEADLINE,
                        assert_budget: bool = True) -> SolveResult:
    """
    Agent parity with output-size budgets (quasi-polynomially many oracle calls)

    Args:
        ms_agent: Bound on the agent region; defaults to the number of states
        ms_env: Bound on the environment regions; defaults to the number of states

    Returns:
        Same winning set as ``as_parity_agent``. The policy is assembled by a
        separate unbudgeted pass over the final sub-model; its oracle calls
        are reported in ``policy_stats`` and never count against the budget.
    """
    oracle = oracle or UncertaintyOracle()
    before = oracle.stats.snapshot()
    prepared = _prepare_parity(model, priorities)
    n_states = len(prepared.live)
    ms_agent = n_states if ms_agent is None else ms_agent
    ms_env = n_states if ms_env is None else ms_env
    d = prepared.priorities.max_priority(prepared.live)
    d += d % 2

    engine = ParityEngine(prepared.priorities, oracle, deadline, budgeted=True,
                          collect_policy=False, assert_budget=assert_budget)
    level = engine.agent(prepared, d, ms_agent, ms_env)
    stats = oracle.stats.since(before)

    policy: Dict[StateId, ActionId] = {}
    policy_oracle = UncertaintyOracle(oracle.backend)
    if level.winning:
        extractor = ParityEngine(prepared.priorities, policy_oracle, deadline, assert_budget=False)
        final = extractor.agent(level.model, d, n_states, n_states)
        if final.winning != level.winning:
            log.warning(f"Policy pass kept {len(final.winning)} of {len(level.winning)} winning states")
        policy = final.policy
    result = _parity_result(level, "eff_as_parity_agent", stats, policy=policy)
    result.policy_stats = policy_oracle.stats.snapshot()
    return result


def eff_as_parity_env(model: Rmdp, priorities: Optional[PriorityFunction] = None,
                      ms_env: Optional[int] = None, ms_agent: Optional[int] = None,
                      oracle: Optional[UncertaintyOracle] = None, deadline: Deadline = NO_DEADLINE,
                      assert_budget: bool = True) -> SolveResult:
    """Environment dual of ``eff_as_parity_agent``; no policies are assembled"""
    oracle = oracle or UncertaintyOracle()
    before = oracle.stats.snapshot()
    prepared = _prepare_parity(model, priorities)
    n_states = len(prepared.live)
    ms_env = n_states if ms_env is None else ms_env
    ms_agent = n_states if ms_agent is None else ms_agent
    d = prepared.priorities.max_priority(prepared.live)
    d += 1 - d % 2

    engine = ParityEngine(prepared.priorities, oracle, deadline, budgeted=True,
                          collect_policy=False, assert_budget=assert_budget)
    level = engine.env(prepared, d, ms_env, ms_agent)
    return _parity_result(level, "eff_as_parity_env", oracle.stats.since(before), policy={})


def solve(model: Rmdp, objective: Objective, efficient: bool = False,
          oracle: Optional[UncertaintyOracle] = None, deadline: Deadline = NO_DEADLINE,
          assert_budget: bool = True) -> SolveResult:
    """Dispatch an objective to the matching agent solver"""
    if isinstance(objective, Reach):
        return as_reach(model, objective.target, oracle, deadline, assert_budget)
    if efficient:
        return eff_as_parity_agent(model, objective.priorities, oracle=oracle, deadline=deadline,
                                   assert_budget=assert_budget)
    return as_parity_agent(model, objective.priorities, oracle, deadline, assert_budget)


def verify_policy(model: Rmdp, policy: MemorylessPolicy, objective: Objective,
                  oracle: Optional[UncertaintyOracle] = None) -> bool:
    """
    Check that ``policy`` alone wins from every state of its domain

    The agent's choice is fixed on the policy domain and the solver is rerun
    on the induced model.

    Raises:
        ModelError: if the policy picks an inadmissible action
    """
    induced = induce_policy(model, policy)
    result = solve(induced, objective, oracle=oracle, assert_budget=False)
    lost = policy.domain - result.winning
    if lost:
        log.warning(f"Policy loses at {model.names(lost)}")
    return not lost
