"""
Tests for the support-game reference solver and its agreement with the main solvers
"""

import ast
import inspect
import time
from fractions import Fraction

import pytest

from src import reference
from src.oracles import SupportCapExceeded
from src.reference import game_as_parity, game_as_reach, reduce
from src.rmdp import ModelError, Rmdp
from src.solvers import as_parity_agent, as_reach
from src.stats import Deadline, SolveTimeout
from src.uncertainty import FiniteMenu, TransitionTemplate, UncertaintyEntry
from tests.conftest import lball


class TestReduce:
    def test_running_example(self, fig1_model, fig1_ids):
        s = fig1_ids
        game = reduce(fig1_model)
        assert game.supports[(s['s2'], 0)] == [frozenset({s['s3'], s['s5']})]
        assert game.supports[(s['s2'], 1)] == [frozenset({s['s2']})]
        assert game.states == fig1_model.live

    def test_menu_gives_one_node_per_member_support(self):
        half, zero, one = Fraction(1, 2), Fraction(0), Fraction(1)
        menu = FiniteMenu(((half, half), (one, zero), (Fraction(1, 4), Fraction(3, 4))))
        entry = UncertaintyEntry(TransitionTemplate((0, 1), (half, half)), menu)
        model = Rmdp.build(['u', 'v'], ['a'], {(0, 0): entry, (1, 0): lball([1], [1], radius=0)})
        game = reduce(model)
        assert game.supports[(0, 0)] == [frozenset({0}), frozenset({0, 1})]

    def test_deterministic_model(self):
        model = Rmdp.build(['u', 'v'], ['a'], {(0, 0): lball([1], [1], radius=0),
                                               (1, 0): lball([1], [1], radius=0)})
        game = reduce(model)
        assert all(len(supports) == 1 for supports in game.supports.values())

    def test_cap(self):
        size = 4
        center = tuple(Fraction(1, size) for _ in range(size))
        entry = UncertaintyEntry(TransitionTemplate(tuple(range(size)), center),
                                 lball([0], [1]).family)
        entries = {(s, 0): entry for s in range(size)}
        model = Rmdp.build([f"x{i}" for i in range(size)], ['a'], entries)
        with pytest.raises(SupportCapExceeded):
            reduce(model, support_cap=3)


class TestGameSolvers:
    def test_running_example(self, fig1_model, fig1_ids):
        s = fig1_ids
        game = reduce(fig1_model)
        assert game_as_reach(game, {s['s5']}) == frozenset({s['s5']})
        assert game_as_parity(game) == frozenset({s['s1'], s['s5']})

    def test_all_target(self, fig1_model):
        game = reduce(fig1_model)
        assert game_as_reach(game, fig1_model.live) == fig1_model.live

    def test_missing_priorities(self, fig1_model):
        bare = Rmdp.build(fig1_model.state_names, fig1_model.action_names, fig1_model.entries)
        with pytest.raises(ModelError):
            game_as_parity(reduce(bare))

    def test_stuck_states_lose(self):
        model = Rmdp.build(['stuck', 'home'], ['stay'], {(1, 0): lball([1], [1], radius=0)},
                           priorities={0: 2, 1: 2})
        game = reduce(model)
        assert game_as_parity(game) == frozenset({1})
        assert game_as_reach(game, {1}) == frozenset({1})

    def test_odd_top_priority_keeps_attractor_out(self):
        half = Fraction(1, 2)
        model = Rmdp.build(['x', 'y', 'z'], ['a'],
                           {(0, 0): lball([0], [1], radius=0),
                            (1, 0): lball([1], [1], radius=0),
                            (2, 0): lball([0, 1], [half, half], radius=0)},
                           priorities={0: 1, 1: 0, 2: 0})
        game = reduce(model)
        assert game_as_parity(game) == frozenset({1})
        assert as_parity_agent(model).winning == frozenset({1})

    def test_odd_top_priority_three(self):
        half = Fraction(1, 2)
        model = Rmdp.build(['bad', 'good', 'mixed', 'safe'], ['a', 'b'],
                           {(0, 0): lball([0], [1], radius=0),
                            (1, 0): lball([1], [1], radius=0),
                            (2, 0): lball([0, 2], [half, half], radius=0),
                            (2, 1): lball([3], [1], radius=0),
                            (3, 0): lball([1, 3], [half, half], radius=0)},
                           priorities={0: 3, 1: 2, 2: 1, 3: 1})
        game = reduce(model)
        assert game_as_parity(game) == frozenset({1, 2, 3})
        assert as_parity_agent(model).winning == game_as_parity(game)

    def test_expired_deadline(self, fig1_model):
        expired = Deadline(1e-9)
        while not expired.expired:
            pass
        with pytest.raises(SolveTimeout):
            reduce(fig1_model, deadline=expired)
        game = reduce(fig1_model)
        with pytest.raises(SolveTimeout):
            game_as_parity(game, deadline=expired)
        with pytest.raises(SolveTimeout):
            game_as_reach(game, fig1_model.live, deadline=expired)

    def test_independent_of_main_solvers(self):
        tree = ast.parse(inspect.getsource(reference))
        imported = set()
        for node in ast.walk(tree):
            if isinstance(node, ast.ImportFrom):
                imported.add(node.module)
        assert 'attractors' not in imported
        assert 'solvers' not in imported


@pytest.mark.slow
def test_agreement_on_random_suite(random_suite):
    started = time.monotonic()
    for model in random_suite:
        game = reduce(model)
        target = model.label('target')
        assert as_reach(model, target).winning == game_as_reach(game, target)
        assert as_parity_agent(model).winning == game_as_parity(game)
    assert time.monotonic() - started < 300
