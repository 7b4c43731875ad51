"""Built-in games and deterministic random generators for the test suites."""

from __future__ import annotations

import itertools
import random

from .arena import Arena, InfiniteRule, Visited, validate_arena
from .prefs import (
    LINEAR,
    STRICT_WEAK,
    PARTIAL,
    OutcomeSet,
    PreferenceProfile,
    PreferenceRelation,
    chain_relation,
    class_relation,
    make_relation,
    find_spe_killer,
    validate_relation,
)


def stop_game_arena(
    stop_a: str = "y",
    stop_b: str = "z",
    loop_outcome: str = "x",
    player_a: str = "a",
    player_b: str = "b",
) -> Arena:
    """Two players alternately offered the chance to stop; looping forever
    yields the loop outcome."""
    arena = Arena(
        vertices=("A1", "B1", "Ty", "Tz"),
        root="A1",
        owner={"A1": player_a, "B1": player_b},
        edges={"A1": ("Ty", "B1"), "B1": ("Tz", "A1"), "Ty": (), "Tz": ()},
        terminal_outcome={"Ty": stop_a, "Tz": stop_b},
        infinite_rule=InfiniteRule(cases=(), default=loop_outcome),
    )
    validate_arena(arena)
    return arena


def intro_arena() -> Arena:
    return stop_game_arena()


def intro_killer_profile() -> PreferenceProfile:
    """z <_a y <_a x and x <_b z <_b y: the no-SPE pattern."""
    return PreferenceProfile(
        players=("a", "b"),
        outcomes=OutcomeSet(("x", "y", "z")),
        relations={
            "a": chain_relation(["z", "y", "x"]),
            "b": chain_relation(["x", "z", "y"]),
        },
    )


def intro_antagonist_profile() -> PreferenceProfile:
    """z <_a y <_a x and the exact inverse for b."""
    return PreferenceProfile(
        players=("a", "b"),
        outcomes=OutcomeSet(("x", "y", "z")),
        relations={
            "a": chain_relation(["z", "y", "x"]),
            "b": chain_relation(["x", "y", "z"]),
        },
    )


def three_player_arena() -> Arena:
    """Three players on a stop cycle; looping forever yields x."""
    arena = Arena(
        vertices=("A", "B", "C", "Ty", "Tz", "Tt"),
        root="A",
        owner={"A": "a", "B": "b", "C": "c"},
        edges={
            "A": ("Ty", "B"),
            "B": ("Tz", "C"),
            "C": ("Tt", "A"),
            "Ty": (),
            "Tz": (),
            "Tt": (),
        },
        terminal_outcome={"Ty": "y", "Tz": "z", "Tt": "t"},
        infinite_rule=InfiniteRule(cases=(), default="x"),
    )
    validate_arena(arena)
    return arena


def three_player_profile() -> PreferenceProfile:
    """Killer-free strict weak orders for which the cycle game has no SPE."""
    return PreferenceProfile(
        players=("a", "b", "c"),
        outcomes=OutcomeSet(("x", "y", "z", "t")),
        relations={
            "a": class_relation((("z",), ("y", "t"), ("x",))),
            "b": class_relation((("t",), ("z", "x"), ("y",))),
            "c": class_relation((("x", "z"), ("t",), ("y",))),
        },
    )


def swo_lin_ext_profile() -> PreferenceProfile:
    """z,t below x,y for a; y < z < x < t for b.  Killer-free as strict weak
    orders, but every pair of linear extensions contains the killer."""
    return PreferenceProfile(
        players=("a", "b"),
        outcomes=OutcomeSet(("x", "y", "z", "t")),
        relations={
            "a": class_relation((("z", "t"), ("x", "y"))),
            "b": chain_relation(["y", "z", "x", "t"]),
        },
    )


PO_OUTCOMES = ("x", "y", "z", "al", "be", "ga")


def po_pattern_relations() -> tuple[PreferenceRelation, PreferenceRelation]:
    """The two six-outcome partial orders: two disjoint chains per player."""
    rel_a = make_relation(
        [("ga", "y"), ("y", "x"), ("z", "be"), ("be", "al")], PARTIAL
    )
    rel_b = make_relation(
        [("x", "z"), ("z", "y"), ("al", "ga"), ("ga", "be")], PARTIAL
    )
    return rel_a, rel_b


def po_pattern_profile() -> PreferenceProfile:
    rel_a, rel_b = po_pattern_relations()
    return PreferenceProfile(
        players=("a", "b"),
        outcomes=OutcomeSet(PO_OUTCOMES),
        relations={"a": rel_a, "b": rel_b},
    )


def po_pattern_arena() -> Arena:
    """Six-outcome alternation exercising the full choose/ignore pipeline:
    both x and al occur at terminals, the loop yields y."""
    arena = Arena(
        vertices=("P1", "P2", "P3", "P4", "P5", "P6", "Tx", "Tal", "Tz", "Tga", "Tbe", "Ty2"),
        root="P1",
        owner={"P1": "a", "P2": "b", "P3": "a", "P4": "b", "P5": "a", "P6": "b"},
        edges={
            "P1": ("Tx", "P2"),
            "P2": ("Tal", "P3"),
            "P3": ("Tz", "P4"),
            "P4": ("Tga", "P5"),
            "P5": ("Tbe", "P6"),
            "P6": ("Ty2", "P1"),
            "Tx": (),
            "Tal": (),
            "Tz": (),
            "Tga": (),
            "Tbe": (),
            "Ty2": (),
        },
        terminal_outcome={
            "Tx": "x",
            "Tal": "al",
            "Tz": "z",
            "Tga": "ga",
            "Tbe": "be",
            "Ty2": "y",
        },
        infinite_rule=InfiniteRule(cases=(), default="y"),
    )
    validate_arena(arena)
    return arena


def po_pattern_xfree_arena() -> Arena:
    """Variant of the po fixture in which outcome x never occurs."""
    arena = Arena(
        vertices=("P2", "P3", "P4", "Tal", "Tz", "Tga"),
        root="P2",
        owner={"P2": "b", "P3": "a", "P4": "b"},
        edges={
            "P2": ("Tal", "P3"),
            "P3": ("Tz", "P4"),
            "P4": ("Tga", "P2"),
            "Tal": (),
            "Tz": (),
            "Tga": (),
        },
        terminal_outcome={"Tal": "al", "Tz": "z", "Tga": "ga"},
        infinite_rule=InfiniteRule(cases=(), default="be"),
    )
    validate_arena(arena)
    return arena


def constant_arena(outcome: str = "x") -> Arena:
    arena = Arena(
        vertices=("T",),
        root="T",
        owner={},
        edges={"T": ()},
        terminal_outcome={"T": outcome},
        infinite_rule=InfiniteRule(cases=(), default=outcome),
    )
    validate_arena(arena)
    return arena


def mixed_open_closed_arena() -> Arena:
    """The x-play-set is a strict union of an open part and a closed part:
    x occurs at a terminal (clopen balls) and as the outcome of the inner
    undecided loop, while the outer loop through C yields w with x still
    achievable, so the x-set is neither open nor closed on its own."""
    arena = Arena(
        vertices=("A1", "B1", "C", "Tx", "Ty"),
        root="A1",
        owner={"A1": "a", "B1": "b", "C": "a"},
        edges={
            "A1": ("Ty", "B1"),
            "B1": ("Tx", "C", "A1"),
            "C": ("A1",),
            "Tx": (),
            "Ty": (),
        },
        terminal_outcome={"Tx": "x", "Ty": "y"},
        infinite_rule=InfiniteRule(cases=((Visited("C"), "w"),), default="x"),
    )
    validate_arena(arena)
    return arena


def two_loop_arena() -> Arena:
    """Two distinct loop outcomes reachable without any separating pseudo-leaf:
    weak-stop fails for either loop outcome."""
    arena = Arena(
        vertices=("A1", "B1", "C1", "Ty"),
        root="A1",
        owner={"A1": "a", "B1": "b", "C1": "a"},
        edges={
            "A1": ("B1", "C1"),
            "B1": ("A1", "Ty"),
            "C1": ("A1",),
            "Ty": (),
        },
        terminal_outcome={"Ty": "y"},
        infinite_rule=InfiniteRule(
            cases=((Visited("C1"), "w"),),
            default="x",
        ),
    )
    validate_arena(arena)
    return arena


# ---------------------------------------------------------------------------
# Random generators (deterministic under a seeded Random)


def random_arena(
    rng: random.Random,
    players,
    outcomes,
    max_vertices: int = 6,
    max_degree: int = 3,
    rule_cases: int = 1,
) -> Arena:
    players = tuple(players)
    outcomes = tuple(outcomes)
    n = rng.randint(1, max_vertices)
    names = [f"v{i}" for i in range(n)]
    if n == 1 and rng.random() < 0.3:
        return Arena(
            vertices=(names[0],),
            root=names[0],
            owner={},
            edges={names[0]: ()},
            terminal_outcome={names[0]: rng.choice(outcomes)},
            infinite_rule=InfiniteRule(cases=(), default=rng.choice(outcomes)),
        )
    terminal_count = rng.randint(0, max(0, n - 1))
    terminals = set(rng.sample(names[1:], terminal_count)) if terminal_count else set()
    non_terminals = [v for v in names if v not in terminals]
    owner = {v: rng.choice(players) for v in non_terminals}
    edges: dict = {v: () for v in terminals}
    for v in non_terminals:
        degree = rng.randint(1, min(max_degree, n))
        targets = rng.sample(names, degree)
        edges[v] = tuple(dict.fromkeys(targets))
    # patch reachability from the root
    while True:
        seen = {names[0]}
        queue = [names[0]]
        while queue:
            v = queue.pop()
            for w in edges[v]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        missing = [v for v in names if v not in seen]
        if not missing:
            break
        carrier = rng.choice([v for v in non_terminals if v in seen])
        edges[carrier] = edges[carrier] + (missing[0],)
    cases = []
    for _ in range(rng.randint(0, rule_cases)):
        cases.append((Visited(rng.choice(names)), rng.choice(outcomes)))
    arena = Arena(
        vertices=tuple(names),
        root=names[0],
        owner=owner,
        edges=edges,
        terminal_outcome={v: rng.choice(outcomes) for v in names if v in terminals},
        infinite_rule=InfiniteRule(cases=tuple(cases), default=rng.choice(outcomes)),
    )
    validate_arena(arena)
    return arena


def arena_family(
    seed: int,
    count: int,
    players,
    outcomes,
    max_vertices: int = 6,
    profile_space_cap: int = 20000,
) -> list:
    """Fixed family of small arenas whose expanded positional profile space is
    exhaustively enumerable (so the oracle can cross-check every instance)."""
    from .arena import expand
    from .oracle import profile_space_size

    rng = random.Random(seed)
    family = []
    while len(family) < count:
        arena = random_arena(rng, players, outcomes, max_vertices=max_vertices)
        if profile_space_size(expand(arena)) <= profile_space_cap:
            family.append(arena)
    return family


def random_linear_relation(rng: random.Random, outcomes) -> PreferenceRelation:
    order = list(outcomes)
    rng.shuffle(order)
    return chain_relation(order)


def random_swo_relation(rng: random.Random, outcomes) -> PreferenceRelation:
    pool = list(outcomes)
    rng.shuffle(pool)
    classes = []
    while pool:
        size = rng.randint(1, len(pool))
        classes.append(tuple(pool[:size]))
        pool = pool[size:]
    return class_relation(tuple(classes))


def random_linear_profile(
    rng: random.Random, players, outcomes
) -> PreferenceProfile:
    outs = OutcomeSet(tuple(outcomes))
    return PreferenceProfile(
        players=tuple(players),
        outcomes=outs,
        relations={p: random_linear_relation(rng, outcomes) for p in players},
    )


def random_killer_free_swo_pair(
    rng: random.Random, outcomes, max_tries: int = 1000
) -> PreferenceProfile:
    outs = OutcomeSet(tuple(outcomes))
    for _ in range(max_tries):
        profile = PreferenceProfile(
            players=("a", "b"),
            outcomes=outs,
            relations={
                "a": random_swo_relation(rng, outcomes),
                "b": random_swo_relation(rng, outcomes),
            },
        )
        if find_spe_killer(profile) is None:
            return profile
    raise RuntimeError("could not sample a killer-free pair")


def random_disjoint_swo_pair(
    rng: random.Random, outcomes, max_tries: int = 2000
) -> tuple[PreferenceRelation, PreferenceRelation]:
    outs = OutcomeSet(tuple(outcomes))
    for _ in range(max_tries):
        rel_a = random_swo_relation(rng, outcomes)
        rel_b = random_swo_relation(rng, outcomes)
        if not (rel_a.pairs & rel_b.pairs):
            assert validate_relation(rel_a, outs) and validate_relation(rel_b, outs)
            return rel_a, rel_b
    raise RuntimeError("could not sample a disjoint pair")


def all_linear_profiles(players, outcomes):
    """Every assignment of a linear order per player (exhaustive suites)."""
    outs = OutcomeSet(tuple(outcomes))
    orders = [chain_relation(list(perm)) for perm in itertools.permutations(outcomes)]
    for combo in itertools.product(orders, repeat=len(players)):
        yield PreferenceProfile(
            players=tuple(players),
            outcomes=outs,
            relations=dict(zip(players, combo)),
        )
