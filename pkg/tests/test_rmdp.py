"""
Tests for the model, its validation and sub-model operations
"""

from dataclasses import replace
from fractions import Fraction

import pytest

from src.rmdp import (STUCK_ACTION, MemorylessPolicy, ModelError, Rmdp, absorb_stuck_states,
                      induce_policy, remove_states, restrict_to, stuck_states, validate)
from src.oracles import UncertaintyOracle
from src.uncertainty import Polytope, PolytopeRow, Relation, TransitionTemplate, UncertaintyEntry
from tests.conftest import lball


class TestValidate:
    def test_running_example_is_valid(self, fig1_model):
        assert validate(fig1_model) == []

    def test_center_not_a_distribution(self):
        entry = lball([0, 1], ['1/2', '2/5'])
        model = Rmdp.build(['u', 'v'], ['a'], {(0, 0): entry, (1, 0): lball([1], [1])})
        violations = validate(model)
        assert len(violations) == 1
        assert "center not a distribution" in violations[0]
        assert "state u" in violations[0]

    def test_center_outside_polytope(self):
        row = PolytopeRow((Fraction(1), Fraction(0)), Relation.LE, Fraction(1, 4))
        entry = UncertaintyEntry(TransitionTemplate((0, 1), (Fraction(1, 2), Fraction(1, 2))),
                                 Polytope((row,)))
        model = Rmdp.build(['u', 'v'], ['a'], {(0, 0): entry, (1, 0): lball([1], [1])})
        violations = validate(model)
        assert len(violations) == 1
        assert "center outside polytope" in violations[0]

    def test_missing_priority(self, fig1_model):
        priorities = dict(fig1_model.priorities.values)
        del priorities[0]
        model = Rmdp.build(fig1_model.state_names, fig1_model.action_names, fig1_model.entries,
                           priorities=priorities)
        assert any("missing priority" in v for v in validate(model))

    def test_empty_menus_are_legal(self):
        model = Rmdp.build(['u'], ['a'], {})
        assert validate(model) == []

    def test_random_models_are_valid(self, random_suite):
        for model in random_suite:
            assert validate(model) == []


class TestRemoveStates:
    def test_removal_of_attractor_drops_risky_action(self, fig1_model, fig1_ids):
        s = fig1_ids
        sub = remove_states(fig1_model, {s['s3'], s['s4']})
        assert sub.live == frozenset({s['s1'], s['s2'], s['s5']})
        assert sub.menu(s['s2']) == (1,)
        assert sub.menu(s['s1']) == (0, 1)

    def test_removing_nothing_is_identity(self, fig1_model):
        assert remove_states(fig1_model, set()) is fig1_model

    def test_removing_s2(self, fig1_model, fig1_ids):
        s = fig1_ids
        sub = remove_states(fig1_model, {s['s2']})
        assert sub.menu(s['s1']) == (1,)
        assert sub.face(s['s1'], 1) == frozenset({s['s1']})

    def test_unknown_state(self, fig1_model):
        with pytest.raises(ModelError):
            remove_states(fig1_model, {42})

    def test_surviving_actions_cannot_hit_removed(self, random_suite):
        oracle = UncertaintyOracle()
        for model in random_suite[:60]:
            removed = frozenset(sorted(model.live)[:1])
            sub = remove_states(model, removed)
            assert validate(sub) == []
            for s, a in sub.pairs():
                assert not oracle.can_hit(sub.entry(s, a), sub.face(s, a), removed)
            assert remove_states(sub, set()).structure() == sub.structure()

    def test_sequential_removal_matches_one_shot(self, fig1_model, fig1_ids):
        s = fig1_ids
        two_steps = remove_states(remove_states(fig1_model, {s['s4']}), {s['s3']})
        one_shot = remove_states(fig1_model, {s['s3'], s['s4']})
        assert two_steps.structure() == one_shot.structure()


class TestRestrictTo:
    def test_sink_keeps_its_self_loop(self, fig1_model, fig1_ids):
        s4 = fig1_ids['s4']
        sub = restrict_to(fig1_model, {s4})
        assert sub.live == frozenset({s4})
        assert sub.menu(s4) == (1,)

    def test_full_restriction_is_identity(self, fig1_model):
        assert restrict_to(fig1_model, fig1_model.live) is fig1_model

    def test_ball_cannot_concentrate_on_goal(self, fig1_model, fig1_ids):
        s = fig1_ids
        sub = restrict_to(fig1_model, {s['s3'], s['s5']})
        assert sub.menu(s['s3']) == ()
        assert stuck_states(sub) == frozenset({s['s3']})

    def test_idempotent_and_valid(self, random_suite):
        oracle = UncertaintyOracle()
        for model in random_suite[:60]:
            kept = frozenset(sorted(model.live)[1:])
            sub = restrict_to(model, kept)
            assert validate(sub) == []
            assert restrict_to(sub, kept).structure() == sub.structure()
            for s, a in sub.pairs():
                assert oracle.face_feasible(sub.entry(s, a), sub.face(s, a))


class TestNormalisation:
    def test_absorb_stuck_states(self):
        model = Rmdp.build(['u', 'v'], ['a'], {(1, 0): lball([1], [1])}, priorities={0: 2, 1: 0})
        absorbed = absorb_stuck_states(model)
        loop = absorbed.action_names.index(STUCK_ACTION)
        assert absorbed.menu(0) == (loop,)
        assert absorbed.face(0, loop) == frozenset({0})
        assert absorbed.priorities[0] == 1
        assert model.priorities[0] == 2
        assert validate(absorbed) == []

    def test_induce_policy(self, fig1_model, fig1_ids):
        s1 = fig1_ids['s1']
        induced = induce_policy(fig1_model, MemorylessPolicy({s1: 1}))
        assert induced.menu(s1) == (1,)

    def test_induce_inadmissible_action(self, fig1_model, fig1_ids):
        with pytest.raises(ModelError, match="inadmissible"):
            induce_policy(fig1_model, MemorylessPolicy({fig1_ids['s3']: 1}))

    def test_policy_names(self, fig1_model, fig1_ids):
        policy = MemorylessPolicy.from_names(fig1_model, {'s1': 'b', 's2': 'a'})
        assert policy[fig1_ids['s1']] == 1
        assert policy.to_names(fig1_model) == {'s1': 'b', 's2': 'a'}
        with pytest.raises(ModelError):
            MemorylessPolicy.from_names(fig1_model, {'nowhere': 'a'})

    def test_unknown_label(self, fig1_model):
        with pytest.raises(ModelError):
            fig1_model.label('missing')
        assert fig1_model.label('target') == frozenset({fig1_model.state_id('s5')})

    def test_models_are_frozen(self, fig1_model):
        with pytest.raises(Exception):
            fig1_model.live = frozenset()
        assert replace(fig1_model).structure() == fig1_model.structure()
