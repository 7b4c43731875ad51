"""Strategy profiles, induced plays, equilibrium checks, and quasi-profile
decomposition on expanded arenas.

Profiles are positional on the expanded arena: one successor per
(vertex, visited-set) state.  Deviation analysis freezes every other
player's choices and computes the deviator's reachable outcome set over the
original edges, which is sound and complete for outcome-based preferences:
a strictly preferred reachable outcome exists iff a profitable deviation
(of any memory) exists.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .arena import ExpandedArena, GameView, achievable_sets, all_achievable
from .errors import InputError
from .prefs import PreferenceProfile, pareto_optimal


@dataclass(frozen=True)
class StrategyProfile:
    """Successor choice per non-terminal expanded state."""

    choice: dict = field(compare=False)  # state index -> successor index

    def __hash__(self):
        return hash(tuple(sorted(self.choice.items())))

    def __eq__(self, other):
        return isinstance(other, StrategyProfile) and self.choice == other.choice


@dataclass(frozen=True)
class QuasiProfile:
    """Non-empty allowed successor subset per non-terminal expanded state."""

    allowed: dict = field(compare=False)  # state index -> tuple of successor indices


@dataclass(frozen=True)
class PlayTrace:
    stem: tuple  # states from the start state, inclusive
    cycle: tuple  # looping part; empty iff the play ends at a terminal
    outcome: str


@dataclass(frozen=True)
class Piece:
    root: int
    states: tuple  # piece state set (partition cell)


@dataclass(frozen=True)
class Decomposition:
    pieces: tuple  # tuple[Piece, ...]


def validate_profile(expanded: ExpandedArena, profile: StrategyProfile) -> None:
    for s in expanded.non_terminal_states():
        if s not in profile.choice:
            raise InputError(f"profile misses a choice at state {expanded.state_name(s)}")
        if profile.choice[s] not in expanded.succs[s]:
            raise InputError(
                f"profile chooses a non-successor at state {expanded.state_name(s)}"
            )


def validate_quasi(expanded: ExpandedArena, quasi: QuasiProfile) -> None:
    for s in expanded.non_terminal_states():
        allowed = quasi.allowed.get(s)
        if not allowed:
            raise InputError(f"quasi profile empty at state {expanded.state_name(s)}")
        if not set(allowed) <= set(expanded.succs[s]):
            raise InputError(f"quasi profile leaves successors at {expanded.state_name(s)}")


def full_quasi(expanded: ExpandedArena) -> QuasiProfile:
    return QuasiProfile(
        allowed={s: tuple(expanded.succs[s]) for s in expanded.non_terminal_states()}
    )


def induced_play(expanded: ExpandedArena, profile: StrategyProfile, state: int) -> PlayTrace:
    """Follow the profile until a terminal or the first state repetition."""
    seen = {}
    path = []
    current = state
    while True:
        if expanded.terminal[current] is not None:
            path.append(current)
            return PlayTrace(stem=tuple(path), cycle=(), outcome=expanded.terminal[current])
        if current in seen:
            start = seen[current]
            cycle = tuple(path[start:])
            return PlayTrace(
                stem=tuple(path[:start]),
                cycle=cycle,
                outcome=expanded.rule_outcome(current),
            )
        seen[current] = len(path)
        path.append(current)
        current = profile.choice[current]


def induced_outcomes(expanded: ExpandedArena, profile: StrategyProfile) -> list:
    """Induced outcome at every state (functional-graph resolution)."""
    outcome = [None] * expanded.n
    for s in range(expanded.n):
        if outcome[s] is not None:
            continue
        path = []
        position = {}
        current = s
        while True:
            if outcome[current] is not None:
                result = outcome[current]
                break
            if expanded.terminal[current] is not None:
                result = expanded.terminal[current]
                outcome[current] = result
                break
            if current in position:
                result = expanded.rule_outcome(current)
                break
            position[current] = len(path)
            path.append(current)
            current = profile.choice[current]
        for v in path:
            outcome[v] = result
    return outcome


def deviation_view(
    expanded: ExpandedArena, profile: StrategyProfile, player: str
) -> GameView:
    """One-player graph: the deviator keeps all edges, everyone else is frozen."""
    succs = []
    for s in range(expanded.n):
        if expanded.terminal[s] is not None:
            succs.append(())
        elif expanded.owner[s] == player:
            succs.append(tuple(expanded.succs[s]))
        else:
            succs.append((profile.choice[s],))
    return GameView(
        n=expanded.n,
        root=expanded.root,
        succs=succs,
        leaf=list(expanded.terminal),
        rule=[expanded.rule_outcome(i) for i in range(expanded.n)],
    )


def deviation_outcomes(
    expanded: ExpandedArena, profile: StrategyProfile, state: int, player: str
) -> frozenset:
    """Outcomes the player can force from state with all others frozen."""
    return achievable_sets(deviation_view(expanded, profile, player))[state]


def is_nash(
    expanded: ExpandedArena,
    profile: StrategyProfile,
    state: int,
    prefs: PreferenceProfile,
) -> bool:
    induced = induced_play(expanded, profile, state).outcome
    for player in prefs.players:
        for alt in deviation_outcomes(expanded, profile, state, player):
            if prefs.prec(player, induced, alt):
                return False
    return True


def is_spe(
    expanded: ExpandedArena, profile: StrategyProfile, prefs: PreferenceProfile
) -> bool:
    """Nash in every subgame, i.e. at every expanded state."""
    induced = induced_outcomes(expanded, profile)
    for player in prefs.players:
        dev = achievable_sets(deviation_view(expanded, profile, player))
        for s in range(expanded.n):
            base = induced[s]
            for alt in dev[s]:
                if prefs.prec(player, base, alt):
                    return False
    return True


def is_gp_spe(
    expanded: ExpandedArena, profile: StrategyProfile, prefs: PreferenceProfile
) -> bool:
    """SPE whose induced outcome is Pareto-optimal among the outcomes
    occurring in every subgame."""
    if not is_spe(expanded, profile, prefs):
        return False
    induced = induced_outcomes(expanded, profile)
    ach = all_achievable(expanded)
    cache: dict = {}
    for s in range(expanded.n):
        key = ach[s]
        if key not in cache:
            cache[key] = set(pareto_optimal(tuple(sorted(key)), prefs))
        if induced[s] not in cache[key]:
            return False
    return True


def spe_violations(
    expanded: ExpandedArena, profile: StrategyProfile, prefs: PreferenceProfile
) -> list:
    """All (state, player, induced, better) counterexamples; [] iff SPE."""
    induced = induced_outcomes(expanded, profile)
    found = []
    for player in prefs.players:
        dev = achievable_sets(deviation_view(expanded, profile, player))
        for s in range(expanded.n):
            for alt in dev[s]:
                if prefs.prec(player, induced[s], alt):
                    found.append((s, player, induced[s], alt))
    return found


def decompose(expanded: ExpandedArena, quasi: QuasiProfile) -> Decomposition:
    """Split the state set along the quasi-profile's excluded edges.

    Piece roots are the game root plus every state excluded somewhere; a
    piece owns the states reachable from its root along allowed edges
    without passing another root, with earlier roots taking precedence so
    that the pieces partition the full state set.
    """
    validate_quasi(expanded, quasi)
    excluded = set()
    for s in expanded.non_terminal_states():
        allowed = set(quasi.allowed[s])
        for t in expanded.succs[s]:
            if t not in allowed:
                excluded.add(t)
    roots = [expanded.root] + sorted(excluded - {expanded.root})
    root_set = set(roots)
    assigned: dict = {}
    pieces = []
    for r in roots:
        if r in assigned:
            pieces.append(Piece(root=r, states=()))
            continue
        members = [r]
        assigned[r] = r
        queue = [r]
        while queue:
            s = queue.pop()
            if expanded.terminal[s] is not None:
                continue
            for t in quasi.allowed[s]:
                if t in root_set or t in assigned:
                    continue
                assigned[t] = r
                members.append(t)
                queue.append(t)
        pieces.append(Piece(root=r, states=tuple(sorted(members))))
    leftover = [s for s in range(expanded.n) if s not in assigned]
    if leftover:
        raise InputError(f"decomposition failed to cover states {leftover}")
    return Decomposition(pieces=tuple(pieces))


def glue(
    expanded: ExpandedArena, decomposition: Decomposition, piece_profiles
) -> StrategyProfile:
    """Combine one total profile per piece into a profile of the whole game."""
    if len(piece_profiles) != len(decomposition.pieces):
        raise InputError(
            f"expected {len(decomposition.pieces)} piece profiles, "
            f"got {len(piece_profiles)}"
        )
    choice: dict = {}
    for piece, fragment in zip(decomposition.pieces, piece_profiles):
        mapping = fragment.choice if isinstance(fragment, StrategyProfile) else fragment
        for s in piece.states:
            if expanded.terminal[s] is not None:
                continue
            if s not in mapping:
                raise InputError(
                    f"piece at root {piece.root} misses a choice for state {s}"
                )
            choice[s] = mapping[s]
    profile = StrategyProfile(choice=choice)
    validate_profile(expanded, profile)
    return profile
