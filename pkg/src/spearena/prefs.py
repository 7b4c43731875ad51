"""Preference relations over finite outcome sets and their structure theory.

Relations are stored transitively closed so that pair queries are O(1)
during pattern scans.  The module knows three relation kinds:

* ``linear``      -- strict total order
* ``strict-weak`` -- strict partial order whose complement is transitive
                     (equivalently: incomparability is an equivalence)
* ``partial``     -- any irreflexive transitive relation

The central pattern is the *SPE killer*: players a, b and outcomes x, y, z
with z < y < x for a while b has x < z < y.  Profiles free of it decompose
into ordered interval blocks on which all players agree up to inversion.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import InputError, PreconditionError, InternalSolveError

LINEAR = "linear"
STRICT_WEAK = "strict-weak"
PARTIAL = "partial"

KINDS = (LINEAR, STRICT_WEAK, PARTIAL)


@dataclass(frozen=True)
class OutcomeSet:
    """Finite ordered collection of outcome identifiers.

    The declared order is used only for deterministic tie-breaking,
    never as a preference.
    """

    outcomes: tuple[str, ...]

    def __post_init__(self):
        if not self.outcomes:
            raise InputError("outcome set must be non-empty")
        if len(set(self.outcomes)) != len(self.outcomes):
            raise InputError("outcome set contains duplicates")

    def index(self, outcome: str) -> int:
        return self.outcomes.index(outcome)

    def __contains__(self, outcome: str) -> bool:
        return outcome in self.outcomes

    def __iter__(self):
        return iter(self.outcomes)

    def __len__(self) -> int:
        return len(self.outcomes)


def transitive_closure(pairs: frozenset[tuple[str, str]]) -> frozenset[tuple[str, str]]:
    closure = set(pairs)
    changed = True
    while changed:
        changed = False
        for (x, y), (u, v) in itertools.product(tuple(closure), repeat=2):
            if y == u and (x, v) not in closure:
                closure.add((x, v))
                changed = True
    return frozenset(closure)


@dataclass(frozen=True)
class PreferenceRelation:
    """A binary relation x < y ("y strictly preferred"), transitively closed."""

    pairs: frozenset[tuple[str, str]]
    kind: str

    def prec(self, x: str, y: str) -> bool:
        """True iff x is strictly dispreferred to y."""
        return (x, y) in self.pairs

    def restrict(self, subset) -> "PreferenceRelation":
        keep = frozenset(p for p in self.pairs if p[0] in subset and p[1] in subset)
        return PreferenceRelation(pairs=keep, kind=self.kind)

    def inverse(self) -> "PreferenceRelation":
        return PreferenceRelation(
            pairs=frozenset((y, x) for (x, y) in self.pairs), kind=self.kind
        )


def make_relation(pairs, kind: str) -> PreferenceRelation:
    """Build a relation from raw (worse, better) pairs; closure is taken here."""
    if kind not in KINDS:
        raise InputError(f"unknown relation kind {kind!r}")
    return PreferenceRelation(pairs=transitive_closure(frozenset(pairs)), kind=kind)


def chain_relation(chain, kind: str = LINEAR) -> PreferenceRelation:
    """Linear relation from a worst-to-best chain, e.g. ['z','y','x'] for z<y<x."""
    pairs = {(chain[i], chain[j]) for i in range(len(chain)) for j in range(i + 1, len(chain))}
    return PreferenceRelation(pairs=frozenset(pairs), kind=kind)


def class_relation(classes, kind: str = STRICT_WEAK) -> PreferenceRelation:
    """Strict weak order from worst-to-best indifference classes."""
    pairs = set()
    for i in range(len(classes)):
        for j in range(i + 1, len(classes)):
            for x in classes[i]:
                for y in classes[j]:
                    pairs.add((x, y))
    return PreferenceRelation(pairs=frozenset(pairs), kind=kind)


@dataclass(frozen=True)
class PreferenceProfile:
    players: tuple[str, ...]
    outcomes: OutcomeSet
    relations: dict[str, PreferenceRelation] = field(compare=False)

    def __post_init__(self):
        if not self.players:
            raise InputError("player list must be non-empty")
        if len(set(self.players)) != len(self.players):
            raise InputError("player list contains duplicates")
        missing = [p for p in self.players if p not in self.relations]
        if missing:
            raise InputError(f"players without a relation: {missing}")

    def rel(self, player: str) -> PreferenceRelation:
        return self.relations[player]

    def prec(self, player: str, x: str, y: str) -> bool:
        return self.relations[player].prec(x, y)


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    axiom: str | None = None
    witness: tuple | None = None

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class SpeKillerWitness:
    """Players (a, b) and outcomes (x, y, z) with z <_a y <_a x and x <_b z <_b y."""

    player_a: str
    player_b: str
    x: str
    y: str
    z: str

    def as_tuple(self) -> tuple[str, str, str, str, str]:
        return (self.player_a, self.player_b, self.x, self.y, self.z)


@dataclass(frozen=True)
class IntervalPartition:
    """Ordered blocks (worst first) with per-player orientation flags.

    ``orientation[player][i]`` is ``"same"`` or ``"inverse"`` relative to the
    reference player's restriction on block i.
    """

    blocks: tuple[tuple[str, ...], ...]
    orientation: dict[str, tuple[str, ...]] = field(compare=False)
    reference: str = ""


def validate_relation(rel: PreferenceRelation, outcomes: OutcomeSet) -> ValidationReport:
    """Check the axioms of rel.kind; report the failing axiom and a witness."""
    for (x, y) in rel.pairs:
        if x not in outcomes or y not in outcomes:
            raise InputError(f"relation mentions unknown outcome in pair ({x!r}, {y!r})")
    # Asymmetry of the closure subsumes irreflexivity of the raw pairs.
    for (x, y) in sorted(rel.pairs, key=lambda p: (outcomes.index(p[0]), outcomes.index(p[1]))):
        if x == y:
            return ValidationReport(False, "irreflexivity", (x, y))
        if (y, x) in rel.pairs:
            return ValidationReport(False, "asymmetry", (x, y))
    if rel.kind == LINEAR:
        for x, y in itertools.combinations(outcomes, 2):
            if not rel.prec(x, y) and not rel.prec(y, x):
                return ValidationReport(False, "totality", (x, y))
    elif rel.kind == STRICT_WEAK:
        for x, y, z in itertools.product(outcomes, repeat=3):
            if not rel.prec(x, y) and not rel.prec(y, z) and rel.prec(x, z):
                return ValidationReport(False, "complement-transitivity", (x, y, z))
    return ValidationReport(True)


def incomparability_is_equivalence(rel: PreferenceRelation, outcomes: OutcomeSet) -> bool:
    """Alternative strict-weak test: incomparability must be an equivalence."""

    def incomp(x, y):
        return not rel.prec(x, y) and not rel.prec(y, x)

    for x, y, z in itertools.product(outcomes, repeat=3):
        if incomp(x, y) and incomp(y, z) and not incomp(x, z):
            return False
    return True


def indifference_classes(rel: PreferenceRelation, subset) -> list[tuple[str, ...]]:
    """Worst-to-best incomparability classes of a strict weak order on subset."""
    subset = tuple(subset)
    classes: list[list[str]] = []
    for x in subset:
        for cls in classes:
            if not rel.prec(x, cls[0]) and not rel.prec(cls[0], x):
                cls.append(x)
                break
        else:
            classes.append([x])
    # below[i] counts elements strictly worse than class i
    def below(cls):
        return sum(1 for y in subset if rel.prec(y, cls[0]))

    classes.sort(key=below)
    return [tuple(c) for c in classes]


def validate_profile(profile: PreferenceProfile) -> dict[str, ValidationReport]:
    return {p: validate_relation(profile.rel(p), profile.outcomes) for p in profile.players}


def find_spe_killer(profile: PreferenceProfile) -> SpeKillerWitness | None:
    """Naive scan for the killer pattern; first witness in declared order."""
    outs = profile.outcomes.outcomes
    for a in profile.players:
        ra = profile.rel(a)
        for b in profile.players:
            if a == b:
                continue
            rb = profile.rel(b)
            for x in outs:
                for y in outs:
                    if y == x or not ra.prec(y, x):
                        continue
                    for z in outs:
                        if z == x or z == y:
                            continue
                        if (
                            ra.prec(z, y)
                            and rb.prec(x, z)
                            and rb.prec(z, y)
                        ):
                            return SpeKillerWitness(a, b, x, y, z)
    return None


class KillerPresentError(PreconditionError):
    def __init__(self, witness: SpeKillerWitness):
        super().__init__(f"SPE killer present: {witness.as_tuple()}")
        self.witness = witness


def interval_partition(profile: PreferenceProfile) -> IntervalPartition:
    """Decompose a killer-free linear profile into ordered agreement blocks.

    Blocks are the classes of x ~ y iff some player weakly prefers y and some
    other weakly prefers x; they are ordered worst-first, and on each block
    every player's order equals the reference player's or its inverse.
    """
    witness = find_spe_killer(profile)
    if witness is not None:
        raise KillerPresentError(witness)
    for p in profile.players:
        if profile.rel(p).kind != LINEAR:
            raise PreconditionError(f"interval_partition requires linear relations ({p})")
        report = validate_relation(profile.rel(p), profile.outcomes)
        if not report:
            raise PreconditionError(f"invalid relation for {p}: {report.axiom} {report.witness}")

    outs = profile.outcomes.outcomes

    def related(x, y):
        if x == y:
            return True
        up = any(profile.prec(a, x, y) for a in profile.players)
        down = any(profile.prec(b, y, x) for b in profile.players)
        return up and down

    # Union-find over ~; killer-freeness makes ~ transitive.
    parent = {x: x for x in outs}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for x, y in itertools.combinations(outs, 2):
        if related(x, y):
            rx, ry = find(x), find(y)
            if rx != ry:
                parent[ry] = rx

    classes: dict[str, list[str]] = {}
    for x in outs:
        classes.setdefault(find(x), []).append(x)

    for members in classes.values():
        for x, y in itertools.combinations(members, 2):
            if not related(x, y):
                raise InternalSolveError(
                    f"agreement relation not transitive on {members} despite killer-freeness"
                )

    ref = profile.players[0]
    ref_rel = profile.rel(ref)

    def sort_block(members):
        snapshot = tuple(members)
        return tuple(
            sorted(snapshot, key=lambda x: sum(1 for y in snapshot if ref_rel.prec(y, x)))
        )

    blocks = [sort_block(m) for m in classes.values()]
    blocks.sort(key=lambda blk: sum(1 for y in outs if ref_rel.prec(y, blk[0])))
    blocks = tuple(blocks)

    orientation: dict[str, tuple[str, ...]] = {}
    for p in profile.players:
        flags = []
        for blk in blocks:
            if len(blk) == 1:
                flags.append("same")
                continue
            same = all(
                profile.prec(p, x, y) == ref_rel.prec(x, y)
                for x, y in itertools.permutations(blk, 2)
            )
            inverse = all(
                profile.prec(p, x, y) == ref_rel.prec(y, x)
                for x, y in itertools.permutations(blk, 2)
            )
            if same:
                flags.append("same")
            elif inverse:
                flags.append("inverse")
            else:
                raise InternalSolveError(
                    f"block {blk} is neither aligned nor inverted for player {p}"
                )
        orientation[p] = tuple(flags)

    result = IntervalPartition(blocks=blocks, orientation=orientation, reference=ref)
    if not check_partition(profile, result):
        raise InternalSolveError("constructed interval partition failed its own check")
    return result


def check_partition(profile: PreferenceProfile, partition: IntervalPartition) -> bool:
    """Verify ordering condition (a) and orientation condition (b)."""
    outs = set(profile.outcomes.outcomes)
    covered = [x for blk in partition.blocks for x in blk]
    if sorted(covered) != sorted(outs) or len(covered) != len(set(covered)):
        return False
    ref = partition.reference or profile.players[0]
    ref_rel = profile.rel(ref)
    for i, blk_i in enumerate(partition.blocks):
        for blk_j in partition.blocks[i + 1 :]:
            for x in blk_i:
                for y in blk_j:
                    if not all(profile.prec(a, x, y) for a in profile.players):
                        return False
    for p in profile.players:
        flags = partition.orientation.get(p)
        if flags is None or len(flags) != len(partition.blocks):
            return False
        for blk, flag in zip(partition.blocks, flags):
            for x, y in itertools.permutations(blk, 2):
                expected = ref_rel.prec(x, y) if flag == "same" else ref_rel.prec(y, x)
                if profile.prec(p, x, y) != expected:
                    return False
    return True


def two_block_split(
    prec_a: PreferenceRelation,
    prec_b: PreferenceRelation,
    outcomes,
) -> tuple[tuple[str, ...], tuple[str, ...]] | None:
    """Smallest upper block O_u such that no upper outcome is dispreferred to a
    lower one by either player; ties broken by declared outcome order."""
    outs = tuple(outcomes)
    n = len(outs)
    for size in range(1, n):
        for idxs in itertools.combinations(range(n), size):
            upper = tuple(outs[i] for i in idxs)
            lower = tuple(outs[i] for i in range(n) if i not in idxs)
            if all(
                not prec_a.prec(u, l) and not prec_b.prec(u, l)
                for u in upper
                for l in lower
            ):
                return upper, lower
    return None


def antagonistic_extension(
    prec_a: PreferenceRelation,
    prec_b: PreferenceRelation,
    outcomes,
) -> PreferenceRelation:
    """Linear extension < of prec_a with prec_b contained in the inverse of <.

    Construction: repeatedly place an element that is prec_b-minimal among the
    prec_a-maximal remaining elements at the top.
    """
    common = prec_a.pairs & prec_b.pairs
    if common:
        pair = min(common)
        raise PreconditionError(f"relations are not disjoint; common pair {pair}")
    outs = list(outcomes)
    top_down: list[str] = []
    remaining = list(outs)
    while remaining:
        maximal = [x for x in remaining if not any(prec_a.prec(x, y) for y in remaining)]
        minimal_b = [x for x in maximal if not any(prec_b.prec(y, x) for y in maximal)]
        pick = minimal_b[0] if minimal_b else maximal[0]
        top_down.append(pick)
        remaining.remove(pick)
    chain = list(reversed(top_down))  # worst first
    result = chain_relation(chain)
    for (x, y) in prec_a.pairs:
        if not result.prec(x, y):
            raise InternalSolveError("antagonistic extension does not extend prec_a")
    for (x, y) in prec_b.pairs:
        if not result.prec(y, x):
            raise InternalSolveError("antagonistic extension does not invert prec_b")
    return result


def pareto_optimal(subset, profile: PreferenceProfile) -> tuple[str, ...]:
    """Outcomes in subset such that every player-improving move hurts someone."""
    subset = tuple(subset)
    if not subset:
        raise PreconditionError("pareto_optimal requires a non-empty subset")
    ordered = [x for x in profile.outcomes.outcomes if x in subset]
    result = []
    for x in ordered:
        dominated = False
        for y in ordered:
            if y == x:
                continue
            improvers = [a for a in profile.players if profile.prec(a, x, y)]
            if improvers and not any(profile.prec(b, y, x) for b in profile.players):
                dominated = True
                break
        if not dominated:
            result.append(x)
    return tuple(result)
