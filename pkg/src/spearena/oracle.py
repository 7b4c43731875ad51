"""Ground truth by exhaustion: positional and bounded-memory profile searches,
extension enumeration, and the built-in counterexample corpus.

Nonexistence verdicts are scoped: a zero count certifies absence of equilibria
within the searched class (positional profiles, or memory-m profiles over
canonically enumerated update structures), not over all strategy profiles.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .arena import (
    Arena,
    ExpandedArena,
    ProjectedRule,
    expand,
    strongly_connected_components,
)
from .errors import InputError, ResourceCapError
from .prefs import (
    LINEAR,
    STRICT_WEAK,
    OutcomeSet,
    PreferenceProfile,
    PreferenceRelation,
    chain_relation,
    find_spe_killer,
    make_relation,
    pareto_optimal,
    validate_relation,
)
from .profiles import StrategyProfile
from . import fixtures

MODES = ("ne", "spe", "gp-spe")

DEFAULT_PROFILE_CAP = 10**7
EXTENSION_BOUND = 7


@dataclass(frozen=True)
class SearchReport:
    game_id: str
    profile_space: int
    memory_bound: int
    counts: dict = field(compare=False)  # mode -> exact count within the class
    exemplars: dict = field(compare=False)  # mode -> tuple of serialized profiles
    scope: str = "positional"


# ---------------------------------------------------------------------------
# Fast bitmask game representation


class FastGame:
    """Bit-level mirror of an expanded arena for profile-space sweeps."""

    def __init__(self, expanded: ExpandedArena, prefs: PreferenceProfile):
        self.expanded = expanded
        self.n = expanded.n
        self.succs = [tuple(s) for s in expanded.succs]
        self.players = list(prefs.players)
        outcomes = list(prefs.outcomes.outcomes)
        extra = sorted(set(expanded.arena.outcomes()) - set(outcomes))
        if extra:
            raise InputError(f"arena outcomes missing from the profile: {extra}")
        self.outcomes = outcomes
        self.oindex = {o: k for k, o in enumerate(outcomes)}
        self.owner = list(expanded.owner)
        self.leaf_idx = [
            None if expanded.terminal[i] is None else self.oindex[expanded.terminal[i]]
            for i in range(self.n)
        ]
        self.rule_idx = [self.oindex[expanded.rule_outcome(i)] for i in range(self.n)]
        # better[p][o] = bitmask of outcomes strictly preferred to o by p
        self.better = {}
        for p in self.players:
            rel = prefs.rel(p)
            self.better[p] = [
                sum(1 << self.oindex[y] for y in outcomes if rel.prec(o, y))
                for o in outcomes
            ]
        self.non_terminal = [i for i in range(self.n) if self.leaf_idx[i] is None]
        self.ach_bits = self._achievable_bits(self.succs)
        self.pareto_bits = {}
        for bits in set(self.ach_bits):
            subset = tuple(o for o in outcomes if bits >> self.oindex[o] & 1)
            po = pareto_optimal(subset, prefs)
            self.pareto_bits[bits] = sum(1 << self.oindex[o] for o in po)

    def _achievable_bits(self, succs) -> list:
        seeds = [0] * self.n
        for i in range(self.n):
            if self.leaf_idx[i] is not None:
                seeds[i] |= 1 << self.leaf_idx[i]
        for comp in strongly_connected_components(self.n, succs):
            cyclic = len(comp) > 1 or comp[0] in succs[comp[0]]
            if cyclic:
                for s in comp:
                    seeds[s] |= 1 << self.rule_idx[s]
        ach = list(seeds)
        changed = True
        while changed:
            changed = False
            for i in range(self.n - 1, -1, -1):
                acc = ach[i]
                for t in succs[i]:
                    acc |= ach[t]
                if acc != ach[i]:
                    ach[i] = acc
                    changed = True
        return ach

    def induced_indices(self, choice: dict) -> list:
        out = [None] * self.n
        for s in range(self.n):
            if out[s] is not None:
                continue
            path = []
            onpath = set()
            cur = s
            while True:
                if out[cur] is not None:
                    res = out[cur]
                    break
                if self.leaf_idx[cur] is not None:
                    res = self.leaf_idx[cur]
                    out[cur] = res
                    break
                if cur in onpath:
                    res = self.rule_idx[cur]
                    break
                onpath.add(cur)
                path.append(cur)
                cur = choice[cur]
            for v in path:
                out[v] = res
        return out

    def deviation_bits(self, choice: dict, player: str) -> list:
        succs = [
            ()
            if self.leaf_idx[i] is not None
            else (self.succs[i] if self.owner[i] == player else (choice[i],))
            for i in range(self.n)
        ]
        return self._achievable_bits(succs)

    def classify(self, choice: dict, need_gp: bool) -> tuple:
        """(ne_at_root, spe, gp_spe) for a positional choice map."""
        induced = self.induced_indices(choice)
        ne_root = True
        spe = True
        for p in self.players:
            dev = self.deviation_bits(choice, p)
            better = self.better[p]
            if dev[0] & better[induced[0]]:
                ne_root = False
                spe = False
                break
            for s in range(self.n):
                if dev[s] & better[induced[s]]:
                    spe = False
                    break
            if not spe:
                break
        gp = False
        if spe and need_gp:
            gp = all(
                self.pareto_bits[self.ach_bits[s]] >> induced[s] & 1
                for s in range(self.n)
            )
        return ne_root, spe, gp


def profile_space_size(expanded: ExpandedArena) -> int:
    size = 1
    for s in expanded.non_terminal_states():
        size *= len(expanded.succs[s])
    return size


def serialize_choice(expanded: ExpandedArena, choice: dict) -> dict:
    return {
        expanded.state_name(s): expanded.state_name(t) for s, t in sorted(choice.items())
    }


def exhaustive_search(
    expanded: ExpandedArena,
    prefs: PreferenceProfile,
    mode: str = "spe",
    cap: int = DEFAULT_PROFILE_CAP,
    game_id: str = "game",
    exemplar_limit: int = 3,
) -> SearchReport:
    """Enumerate every positional profile and classify it exactly."""
    if mode not in MODES:
        raise InputError(f"unknown search mode {mode!r}")
    space = profile_space_size(expanded)
    if space > cap:
        raise ResourceCapError(
            f"profile space {space} exceeds cap {cap}; "
            "consider a memory-bounded search or a larger --cap"
        )
    fast = FastGame(expanded, prefs)
    non_term = fast.non_terminal
    counts = {"ne": 0, "spe": 0, "gp-spe": 0}
    exemplars: dict = {"ne": [], "spe": [], "gp-spe": []}
    for combo in itertools.product(*(fast.succs[s] for s in non_term)):
        choice = dict(zip(non_term, combo))
        ne_root, spe, gp = fast.classify(choice, need_gp=True)
        for key, hit in (("ne", ne_root), ("spe", spe), ("gp-spe", gp)):
            if hit:
                counts[key] += 1
                if len(exemplars[key]) < exemplar_limit:
                    exemplars[key].append(serialize_choice(expanded, choice))
    return SearchReport(
        game_id=game_id,
        profile_space=space,
        memory_bound=1,
        counts=counts,
        exemplars={k: tuple(v) for k, v in exemplars.items()},
        scope="positional",
    )


def positional_spe_profiles(
    expanded: ExpandedArena, prefs: PreferenceProfile, mode: str = "spe"
):
    """Yield every positional profile passing the mode check (oracle route)."""
    fast = FastGame(expanded, prefs)
    non_term = fast.non_terminal
    for combo in itertools.product(*(fast.succs[s] for s in non_term)):
        choice = dict(zip(non_term, combo))
        ne_root, spe, gp = fast.classify(choice, need_gp=(mode == "gp-spe"))
        hit = {"ne": ne_root, "spe": spe, "gp-spe": gp}[mode]
        if hit:
            yield StrategyProfile(choice=dict(choice))


def root_outcome_agreement(
    expanded: ExpandedArena,
    prefs: PreferenceProfile,
    root_outcome: str,
    mode: str = "spe",
) -> str:
    """Check a solver's root outcome against the enumerated equilibrium set.

    Returns "found" as soon as some enumerated profile of the mode induces the
    given outcome at the root, "empty" when the class has no such profile at
    all, and "absent" when equilibria exist but none induces the outcome.
    """
    fast = FastGame(expanded, prefs)
    non_term = fast.non_terminal
    any_hit = False
    for combo in itertools.product(*(fast.succs[s] for s in non_term)):
        choice = dict(zip(non_term, combo))
        ne_root, spe, gp = fast.classify(choice, need_gp=(mode == "gp-spe"))
        hit = {"ne": ne_root, "spe": spe, "gp-spe": gp}[mode]
        if not hit:
            continue
        any_hit = True
        if fast.outcomes[fast.induced_indices(choice)[0]] == root_outcome:
            return "found"
    return "absent" if any_hit else "empty"


# ---------------------------------------------------------------------------
# Bounded-memory search


def _update_functions(k: int, relevant: list):
    """All update functions (memory, edge) -> memory for |M| = k.

    Isomorphic duplicates are pruned downstream by the product-game signature,
    which is a stronger quotient than renaming memory states.
    """
    slots = [(m, e) for m in range(k) for e in relevant]
    for values in itertools.product(range(k), repeat=len(slots)):
        yield dict(zip(slots, values))


def memory_product_arena(arena: Arena, k: int, delta: dict) -> Arena:
    """Product of the arena with one memory structure (initial memory 0).

    Updates happen on edges into non-terminal vertices; memory after a
    terminal edge is irrelevant because no choice is ever made again.
    """

    def name(v, m):
        return f"{v}#{m}"

    vertices = []
    owner = {}
    edges = {}
    terminal = {}
    projection = {}
    queue = [(arena.root, 0)]
    seen = {(arena.root, 0)}
    while queue:
        v, m = queue.pop(0)
        pv = name(v, m)
        vertices.append(pv)
        projection[pv] = v
        if arena.is_terminal(v):
            terminal[pv] = arena.terminal_outcome[v]
            edges[pv] = ()
            continue
        owner[pv] = arena.owner[v]
        row = []
        for w in arena.successors(v):
            nm = delta.get((m, (v, w)), m)
            row.append(name(w, nm))
            if (w, nm) not in seen:
                seen.add((w, nm))
                queue.append((w, nm))
        edges[pv] = tuple(row)
    return Arena(
        vertices=tuple(vertices),
        root=name(arena.root, 0),
        owner=owner,
        edges=edges,
        terminal_outcome=terminal,
        infinite_rule=ProjectedRule(base=arena.infinite_rule, projection=projection),
    )


def _product_signature(expanded: ExpandedArena, prefs: PreferenceProfile) -> tuple:
    sig = []
    for i in range(expanded.n):
        vertex, _ = expanded.states[i]
        base = vertex.partition("#")[0]
        sig.append(
            (
                base,
                expanded.owner[i],
                expanded.terminal[i],
                expanded.rule_outcome(i),
                expanded.succs[i],
            )
        )
    return tuple(sig)


def bounded_memory_search(
    arena: Arena,
    prefs: PreferenceProfile,
    memory_bound: int,
    mode: str = "spe",
    cap: int = DEFAULT_PROFILE_CAP,
    game_id: str = "game",
    exemplar_limit: int = 3,
) -> SearchReport:
    """Exhaustive positional search on every canonical memory product of size
    at most the bound.  Exact for the memory-bounded class: a memory-m
    strategy profile is positional on the product with its update structure.

    Counts aggregate over canonically enumerated structures with distinct
    product games; duplicates of a smaller memory size are skipped.
    """
    if mode not in MODES:
        raise InputError(f"unknown search mode {mode!r}")
    if memory_bound < 1:
        raise InputError("memory bound must be at least 1")
    relevant = [
        (v, w)
        for v in arena.vertices
        if not arena.is_terminal(v)
        for w in arena.successors(v)
        if not arena.is_terminal(w)
    ]
    counts = {"ne": 0, "spe": 0, "gp-spe": 0}
    exemplars: dict = {"ne": [], "spe": [], "gp-spe": []}
    total_space = 0
    seen_signatures = set()
    for k in range(1, memory_bound + 1):
        for delta in _update_functions(k, relevant):
            product = memory_product_arena(arena, k, delta)
            expanded = expand(product)
            mems_used = {v.partition("#")[2] for v, _ in expanded.states}
            if len(mems_used) < k:
                continue  # behaviour already covered at a smaller bound
            signature = _product_signature(expanded, prefs)
            if signature in seen_signatures:
                continue
            seen_signatures.add(signature)
            space = profile_space_size(expanded)
            total_space += space
            if total_space > cap:
                raise ResourceCapError(
                    f"bounded-memory profile space exceeds cap {cap}"
                )
            fast = FastGame(expanded, prefs)
            non_term = fast.non_terminal
            for combo in itertools.product(*(fast.succs[s] for s in non_term)):
                choice = dict(zip(non_term, combo))
                ne_root, spe, gp = fast.classify(choice, need_gp=True)
                for key, hit in (("ne", ne_root), ("spe", spe), ("gp-spe", gp)):
                    if hit:
                        counts[key] += 1
                        if len(exemplars[key]) < exemplar_limit:
                            exemplars[key].append(serialize_choice(expanded, choice))
    return SearchReport(
        game_id=game_id,
        profile_space=total_space,
        memory_bound=memory_bound,
        counts=counts,
        exemplars={k: tuple(v) for k, v in exemplars.items()},
        scope=f"memory<={memory_bound} over canonical update structures",
    )


# ---------------------------------------------------------------------------
# Extension enumeration


def _ordered_partitions(items: tuple):
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    for sub in _ordered_partitions(rest):
        # first joins an existing block or founds a new one at any position
        for i, block in enumerate(sub):
            yield sub[:i] + ((first,) + block,) + sub[i + 1 :]
        for i in range(len(sub) + 1):
            yield sub[:i] + ((first,),) + sub[i:]


def extension_enumeration(
    rel: PreferenceRelation, target_kind: str, outcomes
) -> list:
    """All strict linear (resp. strict weak) orders over outcomes containing rel."""
    outs = tuple(outcomes)
    if len(outs) > EXTENSION_BOUND:
        raise ResourceCapError(
            f"extension enumeration bounded to {EXTENSION_BOUND} outcomes"
        )
    result = []
    if target_kind == LINEAR:
        for perm in itertools.permutations(outs):
            candidate = chain_relation(list(perm))
            if rel.pairs <= candidate.pairs:
                result.append(candidate)
    elif target_kind == STRICT_WEAK:
        seen = set()
        for partition in _ordered_partitions(outs):
            canon = tuple(tuple(sorted(block)) for block in partition)
            if canon in seen:
                continue
            seen.add(canon)
            candidate = _classes_to_relation(canon)
            if rel.pairs <= candidate.pairs:
                result.append(candidate)
    else:
        raise InputError(f"unsupported extension kind {target_kind!r}")
    return result


def _classes_to_relation(classes) -> PreferenceRelation:
    pairs = set()
    for i in range(len(classes)):
        for j in range(i + 1, len(classes)):
            for x in classes[i]:
                for y in classes[j]:
                    pairs.add((x, y))
    return PreferenceRelation(pairs=frozenset(pairs), kind=STRICT_WEAK)


def _killer_triples_a(rel: PreferenceRelation, outcomes) -> set:
    """Triples (x, y, z) with z < y < x in rel (the a-side of the killer)."""
    return {
        (x, y, z)
        for x in outcomes
        for y in outcomes
        for z in outcomes
        if len({x, y, z}) == 3 and rel.prec(z, y) and rel.prec(y, x)
    }


def _killer_triples_b(rel: PreferenceRelation, outcomes) -> set:
    """Triples (x, y, z) with x < z < y in rel (the b-side of the killer)."""
    return {
        (x, y, z)
        for x in outcomes
        for y in outcomes
        for z in outcomes
        if len({x, y, z}) == 3 and rel.prec(x, z) and rel.prec(z, y)
    }


def every_extension_pair_has_killer(
    rel_a: PreferenceRelation,
    rel_b: PreferenceRelation,
    outcomes,
    target_kind: str,
) -> bool:
    """Exhaustively test the killer in all (ext of rel_a) x (ext of rel_b)."""
    outs = tuple(outcomes)
    exts_a = extension_enumeration(rel_a, target_kind, outs)
    exts_b = extension_enumeration(rel_b, target_kind, outs)
    triple_order = [
        (x, y, z)
        for x in outs
        for y in outs
        for z in outs
        if len({x, y, z}) == 3
    ]
    slot = {t: i for i, t in enumerate(triple_order)}

    def mask_chain(rel):
        return sum(1 << slot[t] for t in _killer_triples_a(rel, outs))

    def mask_cross(rel):
        return sum(1 << slot[t] for t in _killer_triples_b(rel, outs))

    chain_a = [mask_chain(r) for r in exts_a]
    cross_a = [mask_cross(r) for r in exts_a]
    chain_b = [mask_chain(r) for r in exts_b]
    cross_b = [mask_cross(r) for r in exts_b]
    # either player may take the z<y<x role
    return all(
        (chain_a[i] & cross_b[j]) or (chain_b[j] & cross_a[i])
        for i in range(len(exts_a))
        for j in range(len(exts_b))
    )


# ---------------------------------------------------------------------------
# Counterexample corpus


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    description: str
    arena: Arena | None
    profile: PreferenceProfile
    expected: str


def counterexample_corpus() -> list:
    return [
        CorpusEntry(
            name="alternating-stop-killer",
            description=(
                "Two players alternately offered a stop; killer preferences. "
                "No positional SPE; the killer witness is (a, b, x, y, z)."
            ),
            arena=fixtures.intro_arena(),
            profile=fixtures.intro_killer_profile(),
            expected="no-positional-spe;killer=(a,b,x,y,z)",
        ),
        CorpusEntry(
            name="three-player-stop-cycle",
            description=(
                "Killer-free strict weak orders on a three-player stop cycle "
                "with no SPE: the two-player characterization does not lift."
            ),
            arena=fixtures.three_player_arena(),
            profile=fixtures.three_player_profile(),
            expected="no-positional-spe;no-killer",
        ),
        CorpusEntry(
            name="swo-linear-extension-trap",
            description=(
                "Strict weak orders whose every pair of linear extensions "
                "contains the killer, yet the game has an SPE."
            ),
            arena=fixtures.intro_arena(),
            profile=fixtures.swo_lin_ext_profile(),
            expected="killer-in-every-linear-extension;positional-spe-exists",
        ),
        CorpusEntry(
            name="partial-order-pattern",
            description=(
                "Six-outcome partial orders whose every pair of strict weak "
                "order extensions contains the killer, yet games have SPE."
            ),
            arena=fixtures.po_pattern_arena(),
            profile=fixtures.po_pattern_profile(),
            expected="killer-in-every-swo-extension;positional-spe-exists",
        ),
    ]


def run_corpus_entry(entry: CorpusEntry) -> tuple:
    """Machine-check one corpus entry; returns (ok, detail)."""
    killer = find_spe_killer(entry.profile)
    details = []
    ok = True
    if entry.expected.startswith("no-positional-spe"):
        expanded = expand(entry.arena)
        report = exhaustive_search(expanded, entry.profile, game_id=entry.name)
        spe_count = report.counts["spe"]
        details.append(f"positional spe count = {spe_count}")
        ok &= spe_count == 0
        if "killer=" in entry.expected:
            ok &= killer is not None and killer.as_tuple() == ("a", "b", "x", "y", "z")
            details.append(f"killer = {None if killer is None else killer.as_tuple()}")
        if "no-killer" in entry.expected:
            ok &= killer is None
            details.append(f"killer = {None if killer is None else killer.as_tuple()}")
    else:
        kind = LINEAR if "linear-extension" in entry.expected else STRICT_WEAK
        rel_a = entry.profile.rel("a")
        rel_b = entry.profile.rel("b")
        outs = entry.profile.outcomes.outcomes
        all_pairs = every_extension_pair_has_killer(rel_a, rel_b, outs, kind)
        details.append(f"every {kind} extension pair has killer = {all_pairs}")
        ok &= all_pairs
        ok &= killer is None
        details.append("killer in the base relations = none" if killer is None else "unexpected killer")
        expanded = expand(entry.arena)
        report = exhaustive_search(expanded, entry.profile, game_id=entry.name)
        spe_count = report.counts["spe"]
        details.append(f"positional spe count = {spe_count}")
        ok &= spe_count >= 1
    return ok, "; ".join(details)
