"""Arena expansion and the play-set analyses on the expanded state graph."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from spearena import fixtures
from spearena.arena import (
    Arena,
    InfiniteRule,
    Visited,
    achievable_outcomes,
    all_achievable,
    classify_outcome_set,
    expand,
    is_strong_stop,
    is_weak_stop,
    pseudo_leaves,
    reachable_from,
    stop_nodes,
    validate_arena,
)
from spearena.errors import InputError, ResourceCapError


def state_names(expanded, indices):
    return {expanded.state_name(i) for i in indices}


class TestExpansion:
    def test_intro_arena_six_states(self):
        ex = expand(fixtures.intro_arena())
        assert ex.n == 6
        layers = {frozenset(l) for l in ex.layer}
        assert frozenset({"A1"}) in layers
        assert frozenset({"A1", "B1"}) in layers
        assert frozenset({"A1", "B1", "Ty"}) in layers
        assert frozenset({"A1", "B1", "Tz"}) in layers

    def test_single_terminal_root(self):
        ex = expand(fixtures.constant_arena("x"))
        assert ex.n == 1
        assert ex.terminal[0] == "x"

    def test_three_player_cycle_single_nontrivial_layer(self):
        ex = expand(fixtures.three_player_arena())
        cycle_layers = {
            tuple(sorted(ex.layer[i]))
            for i in range(ex.n)
            if ex.terminal[i] is None and i in set().union(*[set(ex.succs[j]) for j in range(ex.n)])
            and any(i in ex.succs[j] and ex.layer[j] == ex.layer[i] for j in range(ex.n))
        }
        assert ("A", "B", "C") in cycle_layers

    def test_state_cap(self):
        with pytest.raises(ResourceCapError):
            expand(fixtures.intro_arena(), cap=3)

    def test_expand_idempotent_in_effect(self):
        # treating states as vertices and re-expanding yields a refinement
        # that projects back onto the original as a bisimulation: every
        # analysis datum (owner, terminal, layer rule, achievable set) is
        # preserved, so the second expansion adds nothing in effect
        from spearena.arena import ProjectedRule

        base = expand(fixtures.intro_arena())
        names = [base.state_name(i) for i in range(base.n)]
        arena2 = Arena(
            vertices=tuple(names),
            root=names[0],
            owner={
                names[i]: base.owner[i]
                for i in range(base.n)
                if base.terminal[i] is None
            },
            edges={
                names[i]: tuple(names[t] for t in base.succs[i]) for i in range(base.n)
            },
            terminal_outcome={
                names[i]: base.terminal[i]
                for i in range(base.n)
                if base.terminal[i] is not None
            },
            infinite_rule=ProjectedRule(
                base=fixtures.intro_arena().infinite_rule,
                projection={
                    names[i]: base.states[i][0] for i in range(base.n)
                },
            ),
        )
        again = expand(arena2)
        base_ach = all_achievable(base)
        again_ach = all_achievable(again)
        index = {names[i]: i for i in range(base.n)}
        seen = set()
        for j in range(again.n):
            i = index[again.states[j][0]]
            seen.add(i)
            assert again.owner[j] == base.owner[i]
            assert again.terminal[j] == base.terminal[i]
            assert again.rule_outcome(j) == base.rule_outcome(i)
            assert again_ach[j] == base_ach[i]
            assert {index[again.states[t][0]] for t in again.succs[j]} == set(
                base.succs[i]
            )
        assert seen == set(range(base.n))

    def test_validation_rejects_unpruned(self):
        with pytest.raises(InputError):
            validate_arena(
                Arena(
                    vertices=("a", "b"),
                    root="a",
                    owner={"a": "p", "b": "p"},
                    edges={"a": ("b",), "b": ()},
                    terminal_outcome={},
                    infinite_rule=InfiniteRule(cases=(), default="x"),
                )
            )


class TestAchievable:
    def test_intro_root(self):
        ex = expand(fixtures.intro_arena())
        assert achievable_outcomes(ex, 0) == frozenset({"x", "y", "z"})

    def test_terminal_state(self):
        ex = expand(fixtures.intro_arena())
        terminals = [i for i in range(ex.n) if ex.terminal[i] == "y"]
        for t in terminals:
            assert achievable_outcomes(ex, t) == frozenset({"y"})

    def test_observation_root_reaches_everything(self):
        ex = expand(fixtures.three_player_arena())
        assert achievable_outcomes(ex, 0) == frozenset({"x", "y", "z", "t"})

    @given(st.integers(0, 10**6))
    @settings(max_examples=80, deadline=None)
    def test_monotone_along_transitions(self, seed):
        rng = random.Random(seed)
        arena = fixtures.random_arena(rng, ("a", "b"), ("x", "y", "z"), max_vertices=6)
        ex = expand(arena)
        ach = all_achievable(ex)
        for s in range(ex.n):
            for t in ex.succs[s]:
                assert ach[t] <= ach[s]

    @given(st.integers(0, 10**6))
    @settings(max_examples=50, deadline=None)
    def test_outcome_assignment_exhaustive(self, seed):
        # every terminal and every intra-layer cycle maps to exactly one outcome
        rng = random.Random(seed)
        arena = fixtures.random_arena(rng, ("a", "b"), ("x", "y", "z"), max_vertices=6)
        ex = expand(arena)
        for i in range(ex.n):
            if ex.terminal[i] is not None:
                assert ex.terminal[i] in arena.outcomes()
            else:
                assert ex.rule_outcome(i) in arena.outcomes()


class TestPseudoLeaves:
    def test_intro_y_leaves(self):
        ex = expand(fixtures.intro_arena())
        assert state_names(ex, pseudo_leaves(ex, "y")) == {"Ty|A1,Ty", "Ty|A1,B1,Ty"}
        assert pseudo_leaves(ex, "x") == ()

    def test_constant_game_root_is_unique_pseudo_leaf(self):
        ex = expand(fixtures.constant_arena("x"))
        assert pseudo_leaves(ex, "x") == (0,)

    def test_edge_restriction_creates_new_pseudo_leaves(self):
        # after fixing b's choice to its stop, new z-determined states appear
        base = fixtures.intro_arena()
        restricted = Arena(
            vertices=base.vertices,
            root=base.root,
            owner=base.owner,
            edges={**base.edges, "B1": ("Tz",)},
            terminal_outcome=base.terminal_outcome,
            infinite_rule=base.infinite_rule,
        )
        before = expand(base)
        after = expand(restricted)
        z_before = state_names(before, pseudo_leaves(before, "z"))
        z_after = state_names(after, pseudo_leaves(after, "z"))
        assert "B1|A1,B1" in z_after
        assert "B1|A1,B1" not in z_before

    @given(st.integers(0, 10**6))
    @settings(max_examples=80, deadline=None)
    def test_pairwise_noncomparable_up_to_shared_entries(self, seed):
        # a pseudo-leaf reachable from another inside the constant region must
        # owe its status to an entry edge from outside that region
        rng = random.Random(seed)
        arena = fixtures.random_arena(rng, ("a", "b"), ("x", "y", "z"), max_vertices=6)
        ex = expand(arena)
        ach = all_achievable(ex)
        view = ex.full_view()
        for x in sorted(arena.outcomes()):
            target = frozenset([x])
            pls = pseudo_leaves(ex, x)
            region = {s for s in range(ex.n) if ach[s] == target}
            for t1 in pls:
                inside = reachable_from(view, t1, region)
                for t2 in pls:
                    if t2 != t1 and t2 in inside:
                        assert any(ach[p] != target for p in ex.preds[t2])


class TestStopNodes:
    def test_intro_a_stop_nodes_for_y(self):
        ex = expand(fixtures.intro_arena())
        assert state_names(ex, stop_nodes(ex, "a", "y")) == {"A1|A1", "A1|A1,B1"}

    def test_no_terminal_successors_empty(self):
        arena = Arena(
            vertices=("u", "v"),
            root="u",
            owner={"u": "a", "v": "b"},
            edges={"u": ("v",), "v": ("u",)},
            terminal_outcome={},
            infinite_rule=InfiniteRule(cases=(), default="x"),
        )
        ex = expand(arena)
        assert stop_nodes(ex, "a", "x") == ()

    def test_hand_labeled_fixture(self):
        # strong-stop shape: both players can stop to their favourite
        arena = Arena(
            vertices=("A", "B", "T1", "T2"),
            root="A",
            owner={"A": "a", "B": "b"},
            edges={"A": ("B", "T1"), "B": ("A", "T2"), "T1": (), "T2": ()},
            terminal_outcome={"T1": "x1", "T2": "x2"},
            infinite_rule=InfiniteRule(cases=(), default="y"),
        )
        ex = expand(arena)
        a_stops = state_names(ex, stop_nodes(ex, "a", "x1"))
        b_stops = state_names(ex, stop_nodes(ex, "b", "x2"))
        assert a_stops == {"A|A", "A|A,B"}
        assert b_stops == {"B|A,B"}


class TestStopGames:
    def test_intro_is_weak_and_strong_stop_for_loop_outcome(self):
        ex = expand(fixtures.intro_arena())
        assert is_weak_stop(ex, "x")
        assert is_strong_stop(ex, "x")

    def test_two_loop_outcomes_break_weak_stop(self):
        ex = expand(fixtures.two_loop_arena())
        assert not is_weak_stop(ex, "x")
        assert not is_weak_stop(ex, "w")

    @given(st.integers(0, 10**6))
    @settings(max_examples=200, deadline=None)
    def test_strong_implies_weak(self, seed):
        rng = random.Random(seed)
        arena = fixtures.random_arena(rng, ("a", "b"), ("x", "y", "z"), max_vertices=6)
        ex = expand(arena)
        for y in sorted(arena.outcomes()):
            if is_strong_stop(ex, y):
                assert is_weak_stop(ex, y)


class TestClassification:
    def test_intro_arena(self):
        ex = expand(fixtures.intro_arena())
        assert classify_outcome_set(ex, "y").classification == "open"
        assert classify_outcome_set(ex, "z").classification == "open"
        assert classify_outcome_set(ex, "x").classification == "closed"

    def test_constant_game_clopen(self):
        ex = expand(fixtures.constant_arena("x"))
        assert classify_outcome_set(ex, "x").classification == "open-and-closed"

    def test_mixed_fixture_strict_union(self):
        ex = expand(fixtures.mixed_open_closed_arena())
        assert classify_outcome_set(ex, "x").classification == "open-union-closed"
        assert classify_outcome_set(ex, "w").classification == "higher"

    @given(st.integers(0, 10**6))
    @settings(max_examples=80, deadline=None)
    def test_open_classification_has_covering_witness(self, seed):
        # every play with the outcome passes a covering pseudo-leaf state:
        # removing the pseudo-leaf states removes every way to get the outcome
        rng = random.Random(seed)
        arena = fixtures.random_arena(rng, ("a", "b"), ("x", "y", "z"), max_vertices=6)
        ex = expand(arena)
        ach = all_achievable(ex)
        view = ex.full_view()
        for x in sorted(arena.outcomes()):
            entry = classify_outcome_set(ex, x)
            if entry.classification != "open":
                continue
            target = frozenset([x])
            residual = {s for s in range(ex.n) if ach[s] != target}
            region = reachable_from(view, ex.root, residual)
            from spearena.arena import cycle_components

            for comp in cycle_components(view, region):
                assert view.rule[comp[0]] != x
