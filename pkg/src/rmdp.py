"""
Immutable robust MDP model and its sub-model operations

A sub-model keeps the full state and action tables of its parent and shares
the uncertainty entries; only the live state set, the action menus and the
admissible successor face of each (state, action) pair change. Conditioning an
uncertainty set on a face keeps every oracle applicable to sub-models.
"""

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

from .logger import SolverLogger
from .oracles import UncertaintyOracle
from .uncertainty import LBall, TransitionTemplate, UncertaintyEntry

log = SolverLogger(__name__)

StateId = int
ActionId = int
Pair = Tuple[StateId, ActionId]

STUCK_ACTION = "__stuck__"
STUCK_PRIORITY = 1


class ModelError(ValueError):
    """Invalid model structure or reference to unknown states/actions"""


@dataclass(frozen=True)
class PriorityFunction:
    """Priority of each state for a parity objective"""
    values: Mapping[StateId, int]

    def __getitem__(self, state: StateId) -> int:
        return self.values[state]

    def max_priority(self, states: Iterable[StateId]) -> int:
        return max((self.values[s] for s in states), default=0)

    def with_state(self, state: StateId, priority: int) -> 'PriorityFunction':
        values = dict(self.values)
        values[state] = priority
        return PriorityFunction(values)


@dataclass(frozen=True)
class MemorylessPolicy:
    """Pure memoryless policy: one action per state of its domain"""
    choices: Mapping[StateId, ActionId] = field(default_factory=dict)

    @property
    def domain(self) -> FrozenSet[StateId]:
        return frozenset(self.choices)

    def __getitem__(self, state: StateId) -> ActionId:
        return self.choices[state]

    def __contains__(self, state: StateId) -> bool:
        return state in self.choices

    def to_names(self, model: 'Rmdp') -> Dict[str, str]:
        return {model.state_names[s]: model.action_names[a] for s, a in sorted(self.choices.items())}

    @classmethod
    def from_names(cls, model: 'Rmdp', mapping: Mapping[str, str]) -> 'MemorylessPolicy':
        choices = {}
        for state, action in mapping.items():
            choices[model.state_id(state)] = model.action_id(action)
        return cls(choices)


@dataclass(frozen=True)
class Rmdp:
    """
    Robust MDP with (state, action)-rectangular uncertainty

    ``menus`` and ``faces`` only carry live states; ``entries`` is shared by
    every sub-model derived from the same input.
    """
    state_names: Tuple[str, ...]
    action_names: Tuple[str, ...]
    live: FrozenSet[StateId]
    menus: Mapping[StateId, Tuple[ActionId, ...]]
    entries: Mapping[Pair, UncertaintyEntry]
    faces: Mapping[Pair, FrozenSet[StateId]]
    labels: Mapping[str, FrozenSet[StateId]] = field(default_factory=dict)
    priorities: Optional[PriorityFunction] = None

    @classmethod
    def build(cls, state_names: Iterable[str], action_names: Iterable[str],
              entries: Mapping[Pair, UncertaintyEntry],
              labels: Optional[Mapping[str, Iterable[StateId]]] = None,
              priorities: Optional[Mapping[StateId, int]] = None) -> 'Rmdp':
        """
        Assemble a full model: every state live, every face the full successor list

        Args:
            state_names: Names indexed by StateId
            action_names: Names indexed by ActionId
            entries: Uncertainty entry per (state, action); defines the menus
            labels: Named state sets
            priorities: Priority per state for parity objectives
        """
        state_names = tuple(state_names)
        menus: Dict[StateId, List[ActionId]] = {s: [] for s in range(len(state_names))}
        for (s, a) in entries:
            if s not in menus:
                raise ModelError(f"Entry for unknown state id {s}")
            menus[s].append(a)
        return cls(
            state_names=state_names,
            action_names=tuple(action_names),
            live=frozenset(range(len(state_names))),
            menus={s: tuple(sorted(acts)) for s, acts in menus.items()},
            entries=dict(entries),
            faces={pair: frozenset(e.successors) for pair, e in entries.items()},
            labels={name: frozenset(states) for name, states in (labels or {}).items()},
            priorities=PriorityFunction(dict(priorities)) if priorities is not None else None,
        )

    # Lookups

    def menu(self, state: StateId) -> Tuple[ActionId, ...]:
        return self.menus.get(state, ())

    def entry(self, state: StateId, action: ActionId) -> UncertaintyEntry:
        return self.entries[(state, action)]

    def face(self, state: StateId, action: ActionId) -> FrozenSet[StateId]:
        return self.faces[(state, action)]

    def pairs(self) -> List[Pair]:
        return [(s, a) for s in sorted(self.live) for a in self.menu(s)]

    @property
    def n_pairs(self) -> int:
        return sum(len(self.menu(s)) for s in self.live)

    def ordered(self, states: Optional[Iterable[StateId]] = None) -> List[StateId]:
        """States in ascending id order (all live states by default)"""
        return sorted(self.live if states is None else states)

    def state_id(self, name: str) -> StateId:
        try:
            return self.state_names.index(name)
        except ValueError:
            raise ModelError(f"Unknown state '{name}'")

    def state_ids(self, names: Iterable[str]) -> FrozenSet[StateId]:
        return frozenset(self.state_id(n) for n in names)

    def action_id(self, name: str) -> ActionId:
        try:
            return self.action_names.index(name)
        except ValueError:
            raise ModelError(f"Unknown action '{name}'")

    def names(self, states: Iterable[StateId]) -> List[str]:
        return [self.state_names[s] for s in sorted(states)]

    def label(self, name: str) -> FrozenSet[StateId]:
        """Live members of a label"""
        if name not in self.labels:
            raise ModelError(f"Unknown label '{name}'")
        return self.labels[name] & self.live

    def structure(self) -> Tuple:
        """Structural identity used for model equality in tests"""
        return (
            self.live,
            tuple((s, self.menu(s)) for s in sorted(self.live)),
            tuple((pair, self.faces[pair]) for pair in self.pairs()),
        )

    def check_live(self, states: Iterable[StateId], what: str) -> FrozenSet[StateId]:
        states = frozenset(states)
        unknown = states - self.live
        if unknown:
            raise ModelError(f"{what}: unknown or removed states {sorted(unknown)}")
        return states


def validate(model: Rmdp) -> List[str]:
    """
    List every type-invariant violation of ``model``

    Returns:
        Violation messages naming the state, action or row; empty iff valid
    """
    violations: List[str] = []
    if len(set(model.state_names)) != len(model.state_names):
        violations.append("duplicate state names")
    if len(set(model.action_names)) != len(model.action_names):
        violations.append("duplicate action names")
    n_states = len(model.state_names)

    for s in model.ordered():
        if s not in range(n_states):
            violations.append(f"live state id {s} out of range")
            continue
        for a in model.menu(s):
            where = f"state {model.state_names[s]}"
            if a not in range(len(model.action_names)):
                violations.append(f"{where}: action id {a} out of range")
                continue
            where += f", action {model.action_names[a]}"
            if (s, a) not in model.entries:
                violations.append(f"{where}: missing uncertainty entry")
                continue
            entry = model.entry(s, a)
            violations.extend(f"{where}: {issue}" for issue in entry.problems())
            if any(t not in range(n_states) for t in entry.successors):
                violations.append(f"{where}: successor id out of range")
            face = model.faces.get((s, a))
            if face is None:
                violations.append(f"{where}: missing face")
                continue
            if not face <= frozenset(entry.successors):
                violations.append(f"{where}: face not inside the successor list")
            if not face <= model.live:
                violations.append(f"{where}: face refers to removed states")

    for name, members in model.labels.items():
        if any(s not in range(n_states) for s in members):
            violations.append(f"label {name}: state id out of range")

    if model.priorities is not None:
        for s in model.ordered():
            value = model.priorities.values.get(s)
            if value is None:
                violations.append(f"state {model.state_names[s]}: missing priority")
            elif value < 0:
                violations.append(f"state {model.state_names[s]}: negative priority {value}")
    return violations


def remove_states(model: Rmdp, removed: Iterable[StateId],
                  oracle: Optional[UncertaintyOracle] = None) -> Rmdp:
    """
    Drop ``removed`` and every action that may lead into it

    An action survives iff no admissible distribution on its face hits
    ``removed``; its face then loses the removed states.

    Raises:
        ModelError: if ``removed`` contains unknown states
    """
    removed = model.check_live(removed, "remove_states")
    if not removed:
        return model
    oracle = oracle or UncertaintyOracle()

    live = model.live - removed
    menus: Dict[StateId, Tuple[ActionId, ...]] = {}
    faces: Dict[Pair, FrozenSet[StateId]] = {}
    for s in sorted(live):
        kept = []
        for a in model.menu(s):
            face = model.face(s, a)
            if not face & removed or not oracle.can_hit(model.entry(s, a), face, removed):
                kept.append(a)
                faces[(s, a)] = face - removed
        menus[s] = tuple(kept)
    return replace(model, live=live, menus=menus, faces=faces)


def restrict_to(model: Rmdp, kept_states: Iterable[StateId],
                oracle: Optional[UncertaintyOracle] = None) -> Rmdp:
    """
    Keep only ``kept_states`` and the actions that can stay inside them

    An action survives iff some admissible distribution on its face puts all
    mass on ``kept_states``; its face is intersected with them.

    Raises:
        ModelError: if ``kept_states`` contains unknown states
    """
    kept_states = model.check_live(kept_states, "restrict_to")
    if kept_states == model.live:
        return model
    oracle = oracle or UncertaintyOracle()

    menus: Dict[StateId, Tuple[ActionId, ...]] = {}
    faces: Dict[Pair, FrozenSet[StateId]] = {}
    for s in sorted(kept_states):
        kept = []
        for a in model.menu(s):
            face = model.face(s, a) & kept_states
            if oracle.face_feasible(model.entry(s, a), face):
                kept.append(a)
                faces[(s, a)] = face
        menus[s] = tuple(kept)
    return replace(model, live=kept_states, menus=menus, faces=faces)


def stuck_states(model: Rmdp) -> FrozenSet[StateId]:
    return frozenset(s for s in model.live if not model.menu(s))


def absorb_stuck_states(model: Rmdp) -> Rmdp:
    """
    Give every live state without actions a deterministic self-loop with
    priority 1, the parity reading of an agent-losing dead end
    """
    stuck = stuck_states(model)
    if not stuck:
        return model

    action_names = model.action_names
    if STUCK_ACTION not in action_names:
        action_names = action_names + (STUCK_ACTION,)
    loop = action_names.index(STUCK_ACTION)

    menus = dict(model.menus)
    entries = dict(model.entries)
    faces = dict(model.faces)
    priorities = model.priorities
    for s in sorted(stuck):
        menus[s] = (loop,)
        entries[(s, loop)] = UncertaintyEntry(
            TransitionTemplate((s,), (Fraction(1),)), LBall(1, Fraction(0))
        )
        faces[(s, loop)] = frozenset({s})
        if priorities is not None:
            priorities = priorities.with_state(s, STUCK_PRIORITY)
    log.debug(f"Absorbed stuck states {model.names(stuck)}")
    return replace(model, action_names=action_names, menus=menus, entries=entries,
                   faces=faces, priorities=priorities)


def induce_policy(model: Rmdp, policy: MemorylessPolicy) -> Rmdp:
    """
    Fix the agent's choice on the policy domain

    Raises:
        ModelError: if the policy names a removed state or an inadmissible action
    """
    model.check_live(policy.domain, "induce_policy")
    menus = dict(model.menus)
    for s, a in policy.choices.items():
        if a not in model.menu(s):
            action = model.action_names[a] if 0 <= a < len(model.action_names) else a
            raise ModelError(
                f"Policy picks inadmissible action '{action}' at state '{model.state_names[s]}'"
            )
        menus[s] = (a,)
    return replace(model, menus=menus)
