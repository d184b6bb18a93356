"""
Benchmark generators and small fixture models

Frozen Lake grids are generated deterministically from their parameters: hole
placement and radii come from a splitmix64 stream seeded by the instance, so the
same spec always yields the same model.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

from .logger import SolverLogger
from .rmdp import Pair, Rmdp, StateId
from .uncertainty import LBall, TransitionTemplate, UncertaintyEntry

log = SolverLogger(__name__)

MASK64 = (1 << 64) - 1
RADIUS_DENOMINATOR = 10 ** 6
THIRD = Fraction(1, 3)

# (row, column) offsets
DIRECTIONS: Dict[str, Tuple[int, int]] = {
    'right': (0, 1),
    'left': (0, -1),
    'up': (-1, 0),
    'down': (1, 0),
}
PERPENDICULAR: Dict[str, Tuple[str, str]] = {
    'right': ('up', 'down'),
    'left': ('up', 'down'),
    'up': ('left', 'right'),
    'down': ('left', 'right'),
}
SEEK_LEFT, SEEK_RIGHT = 'L', 'R'


class SpecError(ValueError):
    """Invalid generator parameters"""


class SplitMix64:
    """splitmix64 pseudo-random stream (portable, fixed output for a seed)"""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Integer in ``[0, bound)``"""
        return self.next() % bound

    def rational_upto(self, upper: Fraction) -> Fraction:
        """Uniform multiple of 1/10^6 in ``[0, upper]``"""
        steps = math.floor(upper * RADIUS_DENOMINATOR)
        return Fraction(self.below(steps + 1), RADIUS_DENOMINATOR)


def _norm_exponent(p_norm: Union[int, float, str]) -> Union[int, float]:
    if p_norm in ('inf', math.inf):
        return math.inf
    try:
        value = int(p_norm)
    except (TypeError, ValueError):
        raise SpecError(f"Invalid norm '{p_norm}', expected 1, 2 or inf")
    if value < 1:
        raise SpecError(f"Invalid norm '{p_norm}', expected 1, 2 or inf")
    return value


@dataclass(frozen=True)
class FrozenLakeSpec:
    """Parameters of a Frozen Lake instance"""
    n: int
    p_norm: Union[int, float] = 1
    r_max: Fraction = Fraction(1)
    seed: int = 0
    hole_density: float = 0.1
    objective: str = 'reach'
    support_restricted: bool = True
    radius_fixed: Optional[Fraction] = None

    def check(self):
        """Raise SpecError on an invalid field"""
        if self.n < 2:
            raise SpecError(f"Grid side must be at least 2, got {self.n}")
        if not 0 <= self.hole_density < 1:
            raise SpecError(f"Hole density must be in [0, 1), got {self.hole_density}")
        if self.r_max < 0:
            raise SpecError(f"Maximal radius must be non-negative, got {self.r_max}")
        if self.radius_fixed is not None and self.radius_fixed < 0:
            raise SpecError(f"Fixed radius must be non-negative, got {self.radius_fixed}")
        if self.objective not in ('reach', 'parity'):
            raise SpecError(f"Objective must be reach or parity, got '{self.objective}'")
        _norm_exponent(self.p_norm)


def _cell_name(cell: Tuple[int, int]) -> str:
    return f"r{cell[0]}c{cell[1]}"


def lake_layout(spec: FrozenLakeSpec) -> Tuple[List[str], Dict[Tuple[int, int], Fraction]]:
    """
    Draw the holes and radii of an instance

    Returns:
        Grid rows (``S`` start, ``G`` goal, ``H`` hole, ``_`` ice) and the
        radius of every non-hole cell
    """
    spec.check()
    rng = SplitMix64(spec.seed)
    threshold = round(spec.hole_density * RADIUS_DENOMINATOR)
    start, goal = (0, 0), (spec.n - 1, spec.n - 1)

    rows = []
    for r in range(spec.n):
        row = ''
        for c in range(spec.n):
            cell = (r, c)
            if cell == start:
                row += 'S'
            elif cell == goal:
                row += 'G'
            else:
                row += 'H' if rng.below(RADIUS_DENOMINATOR) < threshold else '_'
        rows.append(row)

    radii = {}
    for r in range(spec.n):
        for c in range(spec.n):
            if rows[r][c] != 'H':
                drawn = rng.rational_upto(spec.r_max)
                radii[(r, c)] = spec.radius_fixed if spec.radius_fixed is not None else drawn
    return rows, radii


def _slip(rows: List[str], cell: Tuple[int, int], action: str) -> Dict[Tuple[int, int], Fraction]:
    """Nominal successor distribution over cells; blocked moves stay in place"""
    n = len(rows)
    masses: Dict[Tuple[int, int], Fraction] = {}
    for direction in (action,) + PERPENDICULAR[action]:
        dr, dc = DIRECTIONS[direction]
        r, c = cell[0] + dr, cell[1] + dc
        target = (r, c) if 0 <= r < n and 0 <= c < n and rows[r][c] != 'H' else cell
        masses[target] = masses.get(target, Fraction(0)) + THIRD
    return masses


def gen_frozen_lake(spec: FrozenLakeSpec) -> Rmdp:
    """
    Build a Frozen Lake model

    Reach instances label the goal ``target``; parity instances are the
    product with a two-mode monitor that alternates between seeking the
    leftmost and the rightmost column. Monitor states about to flip have
    priority 2, all others 1.

    Raises:
        SpecError: on invalid spec fields
    """
    rows, radii = lake_layout(spec)
    exponent = _norm_exponent(spec.p_norm)
    n = spec.n
    cells = [(r, c) for r in range(n) for c in range(n) if rows[r][c] != 'H']
    goal = (n - 1, n - 1)
    actions = list(DIRECTIONS)

    if spec.objective == 'reach':
        index = {cell: i for i, cell in enumerate(cells)}
        names = [_cell_name(cell) for cell in cells]
        entries: Dict[Pair, UncertaintyEntry] = {}
        for cell in cells:
            for a, action in enumerate(actions):
                if cell == goal:
                    masses = {cell: Fraction(1)}
                    radius = Fraction(0)
                else:
                    masses = _slip(rows, cell, action)
                    radius = radii[cell]
                entries[(index[cell], a)] = _ball_entry(
                    {index[t]: p for t, p in masses.items()}, exponent, radius, spec.support_restricted)
        model = Rmdp.build(names, actions, entries,
                           labels={'target': [index[goal]], 'start': [index[(0, 0)]]})
    else:
        product = [(cell, mode) for cell in cells for mode in (SEEK_LEFT, SEEK_RIGHT)]
        index = {state: i for i, state in enumerate(product)}
        names = [_cell_name(cell) + mode for cell, mode in product]
        entries = {}
        priorities = {}
        for cell, mode in product:
            sought = 0 if mode == SEEK_LEFT else n - 1
            flips = cell[1] == sought
            following = (SEEK_RIGHT if mode == SEEK_LEFT else SEEK_LEFT) if flips else mode
            priorities[index[(cell, mode)]] = 2 if flips else 1
            for a, action in enumerate(actions):
                masses = _slip(rows, cell, action)
                entries[(index[(cell, mode)], a)] = _ball_entry(
                    {index[(t, following)]: p for t, p in masses.items()},
                    exponent, radii[cell], spec.support_restricted)
        model = Rmdp.build(names, actions, entries,
                           labels={'start': [index[((0, 0), SEEK_LEFT)]]}, priorities=priorities)

    log.info(f"Generated frozen lake n={n} ({spec.objective}): {len(model.live)} states")
    return model


def _ball_entry(masses: Dict[StateId, Fraction], exponent: Union[int, float], radius: Fraction,
                support_restricted: bool = False) -> UncertaintyEntry:
    successors = tuple(sorted(masses))
    template = TransitionTemplate(successors, tuple(masses[t] for t in successors))
    return UncertaintyEntry(template, LBall(exponent, radius), support_restricted)


def _ball_chain(names: List[str], radius: Fraction = Fraction(1, 5)) -> Rmdp:
    """
    States ``names[0..k-1]`` each try action ``a`` towards the next state or
    the goal with a 1/2-1/2 centre; all but the last may also self-loop with
    ``b``. The last two names are the sink and the goal.
    """
    *chain, sink, goal = names
    index = {name: i for i, name in enumerate(names)}
    a, b = 0, 1
    entries: Dict[Pair, UncertaintyEntry] = {}
    for i, name in enumerate(chain):
        following = chain[i + 1] if i + 1 < len(chain) else sink
        entries[(index[name], a)] = UncertaintyEntry(
            TransitionTemplate((index[following], index[goal]), (Fraction(1, 2), Fraction(1, 2))),
            LBall(2, radius),
        )
        if i + 1 < len(chain):
            entries[(index[name], b)] = _ball_entry({index[name]: Fraction(1)}, 2, Fraction(0))
    for name in (sink, goal):
        entries[(index[name], b)] = _ball_entry({index[name]: Fraction(1)}, 2, Fraction(0))
    return Rmdp.build(names, ['a', 'b'], entries, labels={'target': [index[goal]]})


def fig1() -> Rmdp:
    """
    Five-state running example: ``s1..s3`` try to reach ``s5`` through an L2
    ball of radius 1/5, ``s4`` is a sink. Priorities are 1 on ``s2`` and
    ``s4`` and 2 elsewhere.
    """
    model = _ball_chain(['s1', 's2', 's3', 's4', 's5'])
    return Rmdp.build(model.state_names, model.action_names, model.entries,
                      labels=model.labels, priorities=fig1_priorities(model))


def fig1_priorities(model: Rmdp) -> Dict[StateId, int]:
    odd = {'s2', 's4'}
    return {s: 1 if model.state_names[s] in odd else 2 for s in range(len(model.state_names))}


def chain(k: int) -> Rmdp:
    """
    ``k`` ball-uncertain states ``c1..ck`` feeding ``goal`` and ``sink``;
    almost-sure reachability of ``goal`` needs exactly ``k + 1`` iterations
    """
    if k < 1:
        raise SpecError(f"Chain length must be positive, got {k}")
    names = [f"c{i}" for i in range(1, k + 1)] + ['sink', 'goal']
    model = _ball_chain(names)
    goal = model.state_id('goal')
    priorities = {s: 2 if s == goal else 1 for s in range(len(names))}
    return Rmdp.build(model.state_names, model.action_names, model.entries,
                      labels=model.labels, priorities=priorities)
