"""
Shared fixtures: the running example, chains and a seeded random model suite
"""

import random
from fractions import Fraction
from typing import Dict, List

import pytest

from src.benchmarks import fig1
from src.rmdp import Pair, Rmdp
from src.uncertainty import (FiniteMenu, LBall, Polytope, PolytopeRow, Relation, TransitionTemplate,
                             UncertaintyEntry)

FAMILIES = ['l1', 'l2', 'linf', 'polytope', 'menu']
RADII = [Fraction(0), Fraction(1, 10), Fraction(1, 5), Fraction(1, 2), Fraction(1)]


def lball(successors, center, exponent=2, radius=Fraction(1, 5), restricted=False) -> UncertaintyEntry:
    """Ball entry from plain lists"""
    return UncertaintyEntry(
        TransitionTemplate(tuple(successors), tuple(Fraction(p) for p in center)),
        LBall(exponent, Fraction(radius)),
        restricted,
    )


def _distribution(rng: random.Random, size: int, support: List[int] = None) -> List[Fraction]:
    positions = support if support is not None else list(range(size))
    weights = [0] * size
    while sum(weights) == 0:
        for i in positions:
            weights[i] = rng.randint(0, 3)
    total = sum(weights)
    return [Fraction(w, total) for w in weights]


def random_entry(rng: random.Random, n_states: int, family: str, restricted: bool) -> UncertaintyEntry:
    size = rng.randint(1, min(4, n_states))
    successors = tuple(sorted(rng.sample(range(n_states), size)))
    center = _distribution(rng, size)
    template = TransitionTemplate(successors, tuple(center))

    if family in ('l1', 'l2', 'linf'):
        exponent = {'l1': 1, 'l2': 2, 'linf': float('inf')}[family]
        return UncertaintyEntry(template, LBall(exponent, rng.choice(RADII)), restricted)

    if family == 'polytope':
        rows = []
        for i, p in enumerate(center):
            unit = [Fraction(0)] * size
            unit[i] = Fraction(1)
            if rng.random() < 0.5:
                rows.append(PolytopeRow(tuple(unit), Relation.LE, p + rng.choice(RADII)))
            if rng.random() < 0.5:
                slack = min(p, rng.choice(RADII))
                rows.append(PolytopeRow(tuple(-a for a in unit), Relation.LE, -(p - slack)))
        if size >= 2 and rng.random() < 0.3:
            pair = [Fraction(1) if i < 2 else Fraction(0) for i in range(size)]
            rows.append(PolytopeRow(tuple(pair), Relation.EQ, center[0] + center[1]))
        return UncertaintyEntry(template, Polytope(tuple(rows)), restricted)

    support = [i for i, p in enumerate(center) if p > 0]
    members = [tuple(center)]
    for _ in range(rng.randint(0, 2)):
        member = tuple(_distribution(rng, size, support if restricted else None))
        if member not in members:
            members.append(member)
    return UncertaintyEntry(template, FiniteMenu(tuple(members)), restricted)


def random_model(seed: int) -> Rmdp:
    """
    Small random model: up to 6 states, 1 to 3 actions each, up to 4
    successors, families and support modes drawn per (state, action)
    """
    rng = random.Random(seed)
    n_states = rng.randint(1, 6)
    entries: Dict[Pair, UncertaintyEntry] = {}
    for s in range(n_states):
        for a in range(rng.randint(1, 3)):
            entries[(s, a)] = random_entry(rng, n_states, rng.choice(FAMILIES), rng.random() < 0.5)
    target = rng.sample(range(n_states), rng.randint(1, min(2, n_states)))
    priorities = {s: rng.randint(0, 3) for s in range(n_states)}
    return Rmdp.build([f"q{s}" for s in range(n_states)], ['a', 'b', 'c'], entries,
                      labels={'target': target}, priorities=priorities)


@pytest.fixture
def fig1_model() -> Rmdp:
    return fig1()


@pytest.fixture
def fig1_ids(fig1_model):
    """Name to id lookup for the running example"""
    return {name: fig1_model.state_id(name) for name in fig1_model.state_names}


@pytest.fixture(scope="session")
def random_suite() -> List[Rmdp]:
    return [random_model(seed) for seed in range(200)]
