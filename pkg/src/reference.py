"""
Brute-force reference solver over achievable supports

Qualitative outcomes only depend on which supports the environment can
realize, so a model reduces to a finite turn-based stochastic game: the agent
picks an action, the environment picks an achievable support, and a uniform
random move picks the successor. The game is solved with classical positive
attractors and a recursion that starts from an even top priority, written
independently of the oracle-based solvers.
"""

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Set, Tuple

from .arith import EXACT, FeasibilityBackend
from .logger import SolverLogger
from .oracles import DEFAULT_SUPPORT_CAP, UncertaintyOracle
from .rmdp import ActionId, ModelError, Rmdp, StateId
from .stats import NO_DEADLINE, Deadline

log = SolverLogger(__name__)

AGENT, ENV, RANDOM = 0, 1, 2
SINK_PRIORITY = 1


@dataclass
class SupportGame:
    """
    Finite game induced by a model

    Attributes:
        states: Agent nodes (the model's live states)
        choices: Choice nodes ``(s, a)`` of each agent node
        supports: Achievable supports of each choice node, one random node each
        priorities: Priority of each agent node, when the model has them
        state_names: Names of the original states
    """
    states: FrozenSet[StateId]
    choices: Dict[StateId, List[Tuple[StateId, ActionId]]]
    supports: Dict[Tuple[StateId, ActionId], List[FrozenSet[StateId]]]
    priorities: Optional[Mapping[StateId, int]] = None
    state_names: Tuple[str, ...] = ()

    @property
    def n_env_nodes(self) -> int:
        return sum(len(s) for s in self.supports.values())


def reduce(model: Rmdp, support_cap: int = DEFAULT_SUPPORT_CAP,
           backend: FeasibilityBackend = EXACT, deadline: Deadline = NO_DEADLINE) -> SupportGame:
    """
    Build the support game of ``model``

    Raises:
        SupportCapExceeded: if a face is larger than ``support_cap``
    """
    oracle = UncertaintyOracle(backend, support_cap=support_cap)
    choices: Dict[StateId, List[Tuple[StateId, ActionId]]] = {}
    supports: Dict[Tuple[StateId, ActionId], List[FrozenSet[StateId]]] = {}
    for s in sorted(model.live):
        deadline.check("support game construction")
        choices[s] = []
        for a in model.menu(s):
            found = oracle.achievable_supports(model.entry(s, a), model.face(s, a))
            choices[s].append((s, a))
            supports[(s, a)] = sorted(found, key=lambda t: sorted(t))
    priorities = dict(model.priorities.values) if model.priorities is not None else None
    game = SupportGame(frozenset(model.live), choices, supports, priorities, model.state_names)
    log.debug(f"Support game: {len(game.states)} states, {len(supports)} choices, "
              f"{game.n_env_nodes} supports")
    return game


@dataclass
class _Graph:
    owner: List[int] = field(default_factory=list)
    succ: List[List[int]] = field(default_factory=list)
    color: List[int] = field(default_factory=list)

    def add(self, owner: int, color: int = 0) -> int:
        self.owner.append(owner)
        self.succ.append([])
        self.color.append(color)
        return len(self.owner) - 1


def _build_graph(game: SupportGame, absorbing: FrozenSet[StateId] = frozenset(),
                 with_colors: bool = False) -> Tuple[_Graph, Dict[StateId, int]]:
    graph = _Graph()
    node_of: Dict[StateId, int] = {}
    for s in sorted(game.states):
        color = game.priorities[s] if with_colors else 0
        node_of[s] = graph.add(AGENT, color)

    sink = None
    for s in sorted(game.states):
        v = node_of[s]
        if s in absorbing:
            graph.succ[v].append(v)
            continue
        if not game.choices[s]:
            if sink is None:
                sink = graph.add(AGENT, SINK_PRIORITY)
                graph.succ[sink].append(sink)
            graph.succ[v].append(sink)
            continue
        for pair in game.choices[s]:
            choice = graph.add(ENV)
            graph.succ[v].append(choice)
            for support in game.supports[pair]:
                spread = graph.add(RANDOM)
                graph.succ[choice].append(spread)
                graph.succ[spread].extend(node_of[t] for t in sorted(support) if t in node_of)
    return graph, node_of


def _attractor(graph: _Graph, region: Set[int], target: Set[int], player: int) -> Set[int]:
    """Positive attractor of ``player`` inside the subgraph induced by ``region``"""
    attr = set(target) & region
    changed = True
    while changed:
        changed = False
        for v in region - attr:
            succ = [u for u in graph.succ[v] if u in region]
            if graph.owner[v] == player or graph.owner[v] == RANDOM:
                joins = any(u in attr for u in succ)
            else:
                joins = all(u in attr for u in succ)
            if joins:
                attr.add(v)
                changed = True
    return attr


def _as_reach(graph: _Graph, target: Set[int], deadline: Deadline) -> Set[int]:
    region = set(range(len(graph.owner)))
    while True:
        deadline.check("reference reachability")
        reach = _attractor(graph, region, target, AGENT)
        lost = region - reach
        if not lost:
            return region
        region -= _attractor(graph, region, lost, ENV)


def _agent_wins(graph: _Graph, region: Set[int], d: int, deadline: Deadline) -> Set[int]:
    """Agent almost-sure region of ``region`` whose colors are at most the even ``d``"""
    region = set(region)
    if d <= 0:
        return region
    while region:
        deadline.check("reference parity (agent)")
        top = {v for v in region if graph.color[v] == d}
        attr = _attractor(graph, region, top, AGENT)
        lost = _env_wins(graph, region - attr, d - 1, deadline)
        if not lost:
            return region
        region -= _attractor(graph, region, lost, ENV)
    return region


def _env_wins(graph: _Graph, region: Set[int], d: int, deadline: Deadline) -> Set[int]:
    """Environment region of ``region`` (agent loses a.s.) whose colors are at most the odd ``d``"""
    region = set(region)
    while region:
        deadline.check("reference parity (environment)")
        top = {v for v in region if graph.color[v] == d}
        attr = _attractor(graph, region, top, ENV)
        won = _agent_wins(graph, region - attr, d - 1, deadline)
        if not won:
            return region
        region -= _attractor(graph, region, won, AGENT)
    return region


def game_as_reach(game: SupportGame, target: Iterable[StateId],
                  deadline: Deadline = NO_DEADLINE) -> FrozenSet[StateId]:
    """States from which the agent reaches ``target`` almost surely in the support game"""
    target = frozenset(target) & game.states
    graph, node_of = _build_graph(game, absorbing=target)
    winning = _as_reach(graph, {node_of[t] for t in target}, deadline)
    return frozenset(s for s, v in node_of.items() if v in winning)


def game_as_parity(game: SupportGame, priorities: Optional[Mapping[StateId, int]] = None,
                   deadline: Deadline = NO_DEADLINE) -> FrozenSet[StateId]:
    """States from which the agent wins the parity condition almost surely in the support game"""
    if priorities is not None:
        game = SupportGame(game.states, game.choices, game.supports, dict(priorities), game.state_names)
    if game.priorities is None or any(s not in game.priorities for s in game.states):
        raise ModelError("Parity objective needs a priority for every state")
    graph, node_of = _build_graph(game, with_colors=True)
    d = max(graph.color, default=0)
    d += d % 2
    agent_won = _agent_wins(graph, set(range(len(graph.owner))), d, deadline)
    return frozenset(s for s, v in node_of.items() if v in agent_won)
