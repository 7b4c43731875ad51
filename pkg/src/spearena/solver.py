"""Constructive equilibrium solvers.

The solvers share one mutable :class:`WorkGame`: an expanded arena plus an
edge-allowance mask (the current quasi-profile), accumulated profile choices,
and a set of "decided" states that act as leaves labeled with the raw outcome
their already-fixed choices induce.  Every transformation either removes
allowed edges, fixes choices, or decides a region, so a simple step cap
guards the rewrite loops.

Collapsing a set of outcomes to a fresh worst outcome is done through an
*outcome view*, a raw-to-viewed name map applied whenever a leaf value or a
layer rule is read; fresh names carry a reserved prefix and never appear in
certificates, whose induced outcomes are always recomputed from the final
profile on the raw arena.

Every public solver re-verifies its certificate (equilibrium property, and
Pareto or suitability side conditions) before returning it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .arena import (
    Arena,
    ExpandedArena,
    GameView,
    RESERVED_PREFIX,
    achievable_sets,
    classify_play_set,
    cycle_components,
    expand,
    strongly_connected_components,
    weak_stop,
    CLASS_HIGHER,
)
from .errors import (
    InputError,
    InternalSolveError,
    PreconditionError,
    UnsupportedError,
)
from .prefs import (
    LINEAR,
    STRICT_WEAK,
    OutcomeSet,
    PreferenceProfile,
    PreferenceRelation,
    SpeKillerWitness,
    antagonistic_extension,
    chain_relation,
    class_relation,
    find_spe_killer,
    indifference_classes,
    interval_partition,
    make_relation,
    two_block_split,
    validate_relation,
)
from .profiles import StrategyProfile, induced_outcomes, is_gp_spe, is_spe, spe_violations
from . import fixtures

MODE_GP_SPE = "gp-spe"
MODE_SPE_SUITABILITY = "spe-with-suitability"
MODE_SPE = "spe"

TRANSFORMATION_KINDS = ("T1", "T2", "T3", "T4", "T5", "collapse", "cut-top-block")


@dataclass(frozen=True)
class TransformationRecord:
    kind: str
    location: str
    effect: str


@dataclass(frozen=True)
class SolveCertificate:
    profile: StrategyProfile
    induced: dict = field(compare=False)  # state index -> raw outcome
    mode: str = MODE_SPE
    suitability: dict | None = field(default=None, compare=False)  # state -> top block size index
    trace: tuple = ()

    def root_outcome(self) -> str:
        return self.induced[0]


@dataclass(frozen=True)
class Rejection:
    reason: str
    witness: SpeKillerWitness | None = None


# ---------------------------------------------------------------------------
# WorkGame


class WorkGame:
    """Mutable solving state over one expanded arena."""

    def __init__(self, expanded: ExpandedArena):
        self.expanded = expanded
        self.allowed = [list(s) for s in expanded.succs]
        self.decided: dict = {}  # state -> raw induced outcome
        self.choice: dict = {}  # state -> chosen successor
        self.trace: list = []
        self._fresh_counter = 0

    # -- basic state queries

    def live(self, s: int) -> bool:
        return self.expanded.terminal[s] is None and s not in self.decided

    def leaf_outcome_raw(self, s: int) -> str | None:
        if self.expanded.terminal[s] is not None:
            return self.expanded.terminal[s]
        return self.decided.get(s)

    def fresh_outcome(self) -> str:
        self._fresh_counter += 1
        return f"{RESERVED_PREFIX}{self._fresh_counter}"

    def record(self, kind: str, location: int | str, effect: str) -> None:
        name = (
            self.expanded.state_name(location)
            if isinstance(location, int)
            else str(location)
        )
        self.trace.append(TransformationRecord(kind=kind, location=name, effect=effect))

    # -- views

    def game_view(self, view: dict) -> GameView:
        n = self.expanded.n
        succs = []
        leaf = []
        rule = []
        for s in range(n):
            raw = self.leaf_outcome_raw(s)
            if raw is None:
                succs.append(tuple(self.allowed[s]))
                leaf.append(None)
            else:
                succs.append(())
                leaf.append(view.get(raw, raw))
            r = self.expanded.rule_outcome(s)
            rule.append(view.get(r, r))
        return GameView(n=n, root=self.expanded.root, succs=succs, leaf=leaf, rule=rule)

    def live_region(self, roots) -> list:
        """Live states reachable from roots along allowed edges (sorted)."""
        seen = set()
        stack = [r for r in roots if self.live(r)]
        seen.update(stack)
        while stack:
            s = stack.pop()
            for t in self.allowed[s]:
                if t not in seen and self.live(t):
                    seen.add(t)
                    stack.append(t)
        return sorted(seen)

    # -- choice bookkeeping

    def refresh_decided(self, states) -> None:
        """Mark states decided with the raw outcome their fixed choices induce."""
        for s in states:
            if s in self.decided or self.expanded.terminal[s] is not None:
                continue
            path = []
            onpath = {}
            cur = s
            while True:
                term = self.expanded.terminal[cur]
                if term is not None:
                    result = term
                    break
                if cur in self.decided:
                    result = self.decided[cur]
                    break
                if cur in onpath:
                    result = self.expanded.rule_outcome(cur)
                    break
                if cur not in self.choice:
                    raise InternalSolveError(
                        f"state {self.expanded.state_name(cur)} lacks a choice during paste"
                    )
                onpath[cur] = True
                path.append(cur)
                cur = self.choice[cur]
            for v in path:
                self.decided[v] = result

    def decide_constant_region(self, view: dict, root: int) -> list:
        """Fix first-allowed choices on a region whose viewed future is a single
        outcome; any profile of a constant game is an equilibrium."""
        region = self.live_region([root])
        for s in region:
            self.choice[s] = self.allowed[s][0]
        self.refresh_decided(region)
        return region

    def commit_toward(self, view: dict, ach, target: str, members) -> None:
        """Fix choices so every member's play reaches the target outcome:
        rank moves toward target-constant states, loop on target-rule cycles."""
        member_set = set(members)
        target_states = {
            t
            for t in range(self.expanded.n)
            if ach[t] == frozenset([target]) and t not in member_set
        }
        rank = {t: 0 for t in target_states}
        # cycles among members whose layer rule is already the target
        remap = sorted(member_set)
        idx = {s: k for k, s in enumerate(remap)}
        sub_succs = [
            tuple(idx[t] for t in self.allowed[s] if t in member_set) for s in remap
        ]
        for comp in strongly_connected_components(len(remap), sub_succs):
            states = [remap[k] for k in comp]
            cyclic = len(states) > 1 or idx[states[0]] in sub_succs[comp[0]]
            r = self.expanded.rule_outcome(states[0])
            if cyclic and view.get(r, r) == target:
                comp_set = set(states)
                for s in states:
                    nxt = next(t for t in self.allowed[s] if t in comp_set)
                    self.choice[s] = nxt
                    rank[s] = 0
        changed = True
        while changed:
            changed = False
            for s in remap:
                if s in rank:
                    continue
                best = None
                for t in self.allowed[s]:
                    if t in rank:
                        best = t
                        break
                if best is not None:
                    rank[s] = 1 + rank[best]
                    self.choice[s] = best
                    changed = True
        missing = [s for s in member_set if s not in rank]
        if missing:
            raise InternalSolveError(
                f"cannot route {len(missing)} states toward {target!r}"
            )
        self.refresh_decided(sorted(member_set))


# ---------------------------------------------------------------------------
# Pseudo-leaf and stop-node queries on a work view


def _region_ach(work: WorkGame, view: dict):
    wv = work.game_view(view)
    return wv, achievable_sets(wv)


def _pseudo_leaf_targets(work: WorkGame, ach, scope, x: str) -> list:
    """States (leaf or live) whose viewed future is exactly {x}, entered from a
    live scope state with a larger future; plus live entry states with no live
    predecessor at all (roots of their piece)."""
    target = frozenset([x])
    onlyx = [t for t in range(work.expanded.n) if ach[t] == target]
    out = []
    scope_set = set(scope)
    for t in onlyx:
        preds = [
            p
            for p in scope_set
            if t in work.allowed[p] and work.live(p)
        ]
        if any(ach[p] != target for p in preds):
            out.append(t)
        elif not preds and work.live(t) and t in scope_set:
            out.append(t)
    return out


def _is_stop_to(work: WorkGame, ach, u: int, w: str) -> bool:
    """u has an allowed successor whose whole future is w while u still has
    alternatives (the parent-of-a-pseudo-leaf test)."""
    target = frozenset([w])
    if ach[u] == target:
        return False
    return any(ach[t] == target for t in work.allowed[u])


def _stop_outcomes(work: WorkGame, ach, u: int, exclude=()) -> set:
    out = set()
    for t in work.allowed[u]:
        if len(ach[t]) == 1:
            w = next(iter(ach[t]))
            if w not in exclude and ach[u] != ach[t]:
                out.add(w)
    return out


# ---------------------------------------------------------------------------
# Antagonist solver: layered backward induction with threshold games


def _antagonist_solve(
    work: WorkGame,
    roots,
    view: dict,
    order,
    maximizers,
) -> None:
    """Fix value-optimal choices on the live region of roots.

    ``order`` lists viewed outcomes from worst to best for the maximizing
    camp; every owner not in ``maximizers`` minimizes.  Within each layer,
    values come from threshold games against the stay-forever outcome of the
    layer; cross-layer successors are solved first (the layer DAG is acyclic).
    """
    wv, ach = _region_ach(work, view)
    scope = work.live_region(roots)
    if not scope:
        return
    rank_of = {o: k for k, o in enumerate(order)}

    def leaf_value(t: int) -> str:
        raw = work.leaf_outcome_raw(t)
        return view.get(raw, raw)

    val: dict = {}
    layers: dict = {}
    for s in scope:
        layers.setdefault(work.expanded.layer[s], []).append(s)
    for layer_key in sorted(layers, key=lambda L: (-len(L), tuple(sorted(L)))):
        states = layers[layer_key]
        in_layer = set(states)
        # staying forever is possible only if the layer sustains a cycle
        remap = {s: k for k, s in enumerate(states)}
        sub = [
            tuple(remap[t] for t in work.allowed[s] if t in in_layer) for s in states
        ]
        has_cycle = any(
            len(c) > 1 or c[0] in sub[c[0]]
            for c in strongly_connected_components(len(states), sub)
        )
        if has_cycle:
            stay_raw = work.expanded.arena.infinite_rule.outcome_for(layer_key)
            stay = view.get(stay_raw, stay_raw)
        else:
            stay = None

        def exit_value(t: int) -> str:
            if t in val:
                return val[t]
            if work.live(t):
                raise InternalSolveError("cross-layer successor not yet valued")
            return leaf_value(t)

        candidates = {stay} if stay is not None else set()
        for s in states:
            for t in work.allowed[s]:
                if t not in in_layer:
                    candidates.add(exit_value(t))
        for o in candidates:
            if o not in rank_of:
                raise InternalSolveError(f"outcome {o!r} missing from antagonist order")
        ordered_candidates = sorted(candidates, key=lambda o: -rank_of[o])

        def attractor(threshold: str, for_max: bool):
            """Reach a good exit (>= threshold for max, <= for min); returns
            rank map over in-layer states or None marks non-membership."""
            good = (
                lambda t: rank_of[exit_value(t)] >= rank_of[threshold]
                if for_max
                else rank_of[exit_value(t)] <= rank_of[threshold]
            )
            rank = {}
            changed = True
            rounds = 1
            while changed:
                changed = False
                settled = set(rank)  # freeze the round so ranks strictly decrease
                for s in states:
                    if s in rank:
                        continue
                    mine = work.expanded.owner[s] in maximizers
                    controls = mine if for_max else not mine
                    ok_edge = (
                        lambda t: (t not in in_layer and good(t))
                        or (t in in_layer and t in settled)
                    )
                    if controls:
                        hit = any(ok_edge(t) for t in work.allowed[s])
                    else:
                        hit = all(ok_edge(t) for t in work.allowed[s])
                    if hit:
                        rank[s] = rounds
                        changed = True
                rounds += 1
            return rank

        def safety(threshold: str, for_max: bool):
            """Never take an exit worse than threshold; returns surviving set."""
            bad = (
                lambda t: rank_of[exit_value(t)] < rank_of[threshold]
                if for_max
                else rank_of[exit_value(t)] > rank_of[threshold]
            )
            lost = set()
            changed = True
            while changed:
                changed = False
                for s in states:
                    if s in lost:
                        continue
                    mine = work.expanded.owner[s] in maximizers
                    adversary = not mine if for_max else mine
                    bad_edge = (
                        lambda t: (t not in in_layer and bad(t))
                        or (t in in_layer and t in lost)
                    )
                    if adversary:
                        hit = any(bad_edge(t) for t in work.allowed[s])
                    else:
                        hit = all(bad_edge(t) for t in work.allowed[s])
                    if hit:
                        lost.add(s)
                        changed = True
            return in_layer - lost

        # values: best threshold the maximizer can force
        pending = set(states)
        for o in ordered_candidates:
            if not pending:
                break
            if stay is None or rank_of[o] > rank_of[stay]:
                members = set(attractor(o, for_max=True))
            else:
                members = safety(o, for_max=True)
            for s in sorted(pending & members):
                val[s] = o
            pending -= members
        if pending:
            raise InternalSolveError("antagonist value computation left states unvalued")

        # choices
        attr_cache: dict = {}
        for s in states:
            o_star = val[s]
            mine = work.expanded.owner[s] in maximizers
            if stay is None:
                reach_mode = True
            elif mine:
                reach_mode = rank_of[o_star] > rank_of[stay]
            else:
                reach_mode = rank_of[o_star] < rank_of[stay]
            chosen = None
            if reach_mode:
                key = (o_star, mine)
                if key not in attr_cache:
                    attr_cache[key] = attractor(o_star, for_max=mine)
                ranks = attr_cache[key]
                my_rank = ranks.get(s)
                if my_rank is None:
                    raise InternalSolveError("reach-mode state outside its attractor")
                for t in work.allowed[s]:
                    if t not in in_layer:
                        r = rank_of[exit_value(t)]
                        good = r >= rank_of[o_star] if mine else r <= rank_of[o_star]
                        if good:
                            chosen = t
                            break
                    elif ranks.get(t, my_rank) < my_rank:
                        chosen = t
                        break
            else:
                for t in work.allowed[s]:
                    v = exit_value(t) if t not in in_layer else val[t]
                    if v == o_star:
                        chosen = t
                        break
            if chosen is None:
                raise InternalSolveError("no admissible antagonist move found")
            work.choice[s] = chosen
    work.refresh_decided(scope)
    for s in scope:
        got = view.get(work.decided[s], work.decided[s])
        if got != val[s]:
            raise InternalSolveError(
                f"antagonist strategy induces {got!r} instead of value {val[s]!r} "
                f"at {work.expanded.state_name(s)}"
            )


# ---------------------------------------------------------------------------
# The stop-game transformation engine (quasi-antagonist machinery)


class _EngineContext:
    """Per-call parameters of the transformation engine.

    camp_a owns the "a" role (prefers the top of the chain, tolerates losing
    access to x_n); everyone else is in the "b" role (x_n is their best).
    solve_yfree resolves a live region free of y; solve_residual resolves a
    region after x_n has been cut away.
    """

    def __init__(self, work, view, y, x_n, camp_a, solve_yfree, solve_residual):
        self.work = work
        self.view = view
        self.y = y
        self.x_n = x_n
        self.camp_a = camp_a
        self.solve_yfree = solve_yfree
        self.solve_residual = solve_residual

    def in_camp_a(self, s: int) -> bool:
        return self.work.expanded.owner[s] in self.camp_a


def _try_t1(ctx: _EngineContext, ach, scope) -> int | None:
    for s in scope:
        if ctx.work.live(s) and ctx.y not in ach[s] and len(ach[s]) >= 2:
            return s
    return None


def _apply_t1(ctx: _EngineContext, s: int) -> None:
    ctx.work.record("T1", s, "solve y-free subgame, relabel it constant")
    ctx.solve_yfree(s)


def _try_t2(ctx: _EngineContext, ach, scope) -> int | None:
    pls = _pseudo_leaf_targets(ctx.work, ach, scope, ctx.y)
    return pls[0] if pls else None


def _apply_t2(ctx: _EngineContext, ach, scope, t: int) -> None:
    work = ctx.work
    cut = 0
    for p in scope:
        if not work.live(p) or t not in work.allowed[p]:
            continue
        if ach[p] == frozenset([ctx.y]):
            continue
        work.allowed[p] = [u for u in work.allowed[p] if u != t]
        if not work.allowed[p]:
            raise InternalSolveError("T2 emptied an allowance")
        cut += 1
    if work.live(t):
        work.decide_constant_region(ctx.view, t)
    work.record("T2", t, f"ignore y-pseudo-leaf ({cut} edges cut)")


def _try_t3(ctx: _EngineContext, ach, scope) -> tuple | None:
    target = frozenset([ctx.x_n])
    for s in scope:
        if not ctx.work.live(s) or ctx.in_camp_a(s):
            continue
        if len(ctx.work.allowed[s]) < 2 or ach[s] == target:
            continue
        for t in ctx.work.allowed[s]:
            if ach[t] == target:
                return s, t
    return None


def _apply_t3(ctx: _EngineContext, s: int, t: int) -> None:
    ctx.work.allowed[s] = [t]
    ctx.work.record("T3", s, f"fix choice to x_n-pseudo-leaf {ctx.work.expanded.state_name(t)}")


def _region_condition_t4(ctx: _EngineContext, ach, region) -> bool:
    work = ctx.work
    for u in region:
        if not ctx.in_camp_a(u) and _stop_outcomes(work, ach, u, exclude=(ctx.y,)):
            return False  # a b-stop node exists
    for u in region:
        if ctx.y not in ach[u]:
            continue
        sub = work.live_region([u])
        if not any(
            ctx.in_camp_a(w)
            and _stop_outcomes(work, ach, w, exclude=(ctx.y, ctx.x_n))
            for w in sub
        ):
            return False
    return True


def _try_t4(ctx: _EngineContext, ach, scope) -> int | None:
    for s in scope:
        if not ctx.work.live(s) or ctx.y not in ach[s]:
            continue
        region = ctx.work.live_region([s])
        if _region_condition_t4(ctx, ach, region):
            return s
    return None


def _cut_camp_a_xn_edges(ctx: _EngineContext, ach, region) -> int:
    work = ctx.work
    target = frozenset([ctx.x_n])
    cut = 0
    for u in region:
        if not work.live(u) or not ctx.in_camp_a(u) or ach[u] == target:
            continue
        keep = [t for t in work.allowed[u] if ach[t] != target]
        if len(keep) != len(work.allowed[u]):
            if not keep:
                raise InternalSolveError("x_n cut emptied an allowance")
            cut += len(work.allowed[u]) - len(keep)
            work.allowed[u] = keep
    return cut


def _decide_singleton_regions(ctx: _EngineContext, region) -> None:
    work = ctx.work
    while True:
        _, ach = _region_ach(work, ctx.view)
        rest = [u for u in region if work.live(u) and len(ach[u]) == 1]
        if not rest:
            return
        work.decide_constant_region(ctx.view, rest[0])


def _apply_t4(ctx: _EngineContext, ach, s: int) -> None:
    work = ctx.work
    region = work.live_region([s])
    cut = _cut_camp_a_xn_edges(ctx, ach, region)
    work.record("T4", s, f"camp a ignores x_n below ({cut} edges cut); recurse on residue")
    # orphaned x_n regions are constant games
    _, ach2 = _region_ach(work, ctx.view)
    for u in region:
        if work.live(u) and ach2[u] == frozenset([ctx.x_n]):
            work.decide_constant_region(ctx.view, u)
    ctx.solve_residual([u for u in region if work.live(u)])


def _try_t5(ctx: _EngineContext, ach, scope) -> int | None:
    work = ctx.work
    for s in scope:
        if not work.live(s) or ctx.y not in ach[s]:
            continue
        region = work.live_region([s])
        ok = True
        for u in region:
            if ctx.y not in ach[u]:
                continue
            sub = work.live_region([u])
            has_a_xn = any(
                ctx.in_camp_a(w) and ctx.x_n in _stop_outcomes(work, ach, w, exclude=(ctx.y,))
                for w in sub
            )
            has_a_other = any(
                ctx.in_camp_a(w)
                and _stop_outcomes(work, ach, w, exclude=(ctx.y, ctx.x_n))
                for w in sub
            )
            if not has_a_xn or has_a_other:
                ok = False
                break
        if ok:
            return s
    return None


def _apply_t5(ctx: _EngineContext, s: int) -> None:
    work = ctx.work
    region = work.live_region([s])
    work.record("T5", s, "camp a chooses x_n throughout the region")
    _decide_singleton_regions(ctx, region)
    _, ach = _region_ach(work, ctx.view)
    members = [u for u in region if work.live(u)]
    for u in members:
        if ctx.x_n not in ach[u]:
            raise InternalSolveError("T5 region lost access to x_n")
    if members:
        work.commit_toward(ctx.view, ach, ctx.x_n, members)


def _engine_loop(ctx: _EngineContext, roots) -> None:
    work = ctx.work
    snapshot = work.live_region(roots)
    edge_count = sum(len(work.allowed[s]) for s in snapshot)
    outcome_count = len(set(ctx.work.expanded.arena.outcomes())) + 2
    cap = 10 * max(1, edge_count) * outcome_count
    steps = 0
    while True:
        scope = [s for s in snapshot if work.live(s)]
        if not scope:
            return
        steps += 1
        if steps > cap:
            raise InternalSolveError("transformation scheduler exceeded its step cap")
        wv, ach = _region_ach(work, ctx.view)
        s = _try_t1(ctx, ach, scope)
        if s is not None:
            _apply_t1(ctx, s)
            continue
        t = _try_t2(ctx, ach, scope)
        if t is not None:
            _apply_t2(ctx, ach, scope, t)
            continue
        hit = _try_t3(ctx, ach, scope)
        if hit is not None:
            _apply_t3(ctx, *hit)
            continue
        s = _try_t4(ctx, ach, scope)
        if s is not None:
            _apply_t4(ctx, ach, s)
            continue
        s = _try_t5(ctx, ach, scope)
        if s is not None:
            _apply_t5(ctx, s)
            continue
        break
    # quiescent: final global step on the remaining scope
    scope = [s for s in snapshot if work.live(s)]
    if not scope:
        return
    _decide_singleton_regions(ctx, scope)
    scope = [s for s in snapshot if work.live(s)]
    if not scope:
        return
    _, ach = _region_ach(work, ctx.view)
    cut = _cut_camp_a_xn_edges(ctx, ach, scope)
    work.record(
        "T4",
        scope[0],
        f"final step: camp a ignores every x_n-pseudo-leaf ({cut} edges cut)",
    )
    _, ach2 = _region_ach(work, ctx.view)
    for u in scope:
        if work.live(u) and ach2[u] == frozenset([ctx.x_n]):
            work.decide_constant_region(ctx.view, u)
    ctx.solve_residual([u for u in scope if work.live(u)])


# ---------------------------------------------------------------------------
# Quasi-antagonist stop games (linear chains)


def _qas_base(work: WorkGame, roots, view: dict, y: str, xs) -> None:
    """Chains of length <= 1: both players want x_1 over y, so seek it."""
    snapshot = work.live_region(roots)
    guard = 0
    while True:
        live = [s for s in snapshot if work.live(s)]
        if not live:
            return
        guard += 1
        if guard > len(snapshot) + 2:
            raise InternalSolveError("base case failed to converge")
        _, ach = _region_ach(work, view)
        if xs:
            members = [s for s in live if xs[0] in ach[s]]
            if members:
                work.commit_toward(view, ach, xs[0], members)
                continue
        s0 = live[0]
        if len(ach[s0]) != 1:
            raise InternalSolveError(
                f"unexpected multi-outcome state in base case: {sorted(ach[s0])}"
            )
        work.decide_constant_region(view, s0)


def _qas_solve(work: WorkGame, roots, view: dict, y: str, xs, camp_a) -> None:
    if len(xs) <= 1:
        _qas_base(work, roots, view, y, xs)
        return
    order = [y] + list(reversed(xs))  # worst-to-best for camp a

    def solve_yfree(s):
        _antagonist_solve(work, [s], view, order, camp_a)

    def solve_residual(sub_roots):
        _qas_solve(work, sub_roots, view, y, xs[:-1], camp_a)

    ctx = _EngineContext(work, view, y, xs[-1], camp_a, solve_yfree, solve_residual)
    _engine_loop(ctx, roots)


def _souc_solve(work: WorkGame, roots, view: dict, y: str, xs, camp_a) -> None:
    """Open-union-closed reduction: strip the open part of y, solve the y-free
    antagonist pieces, then run the stop-game machinery on the rest."""
    order = [y] + list(reversed(xs))
    guard = 0
    while True:
        guard += 1
        if guard > 4 * work.expanded.n + 4:
            raise InternalSolveError("open-part removal failed to converge")
        scope = work.live_region(roots)
        if not scope:
            return
        _, ach = _region_ach(work, view)
        pls = _pseudo_leaf_targets(work, ach, scope, y)
        if not pls:
            break
        ctx = _EngineContext(work, view, y, xs[-1] if xs else y, camp_a, None, None)
        _apply_t2(ctx, ach, scope, pls[0])
    scope = work.live_region(roots)
    while True:
        _, ach = _region_ach(work, view)
        yfree = [s for s in scope if work.live(s) and y not in ach[s]]
        if not yfree:
            break
        work.record("T1", yfree[0], "antagonist piece without y")
        _antagonist_solve(work, [yfree[0]], view, order, camp_a)
    _qas_solve(work, [s for s in scope if work.live(s)], view, y, xs, camp_a)


def _sdr_solve(work: WorkGame, roots, view: dict, y: str, xs, camp_a) -> None:
    """Difference-hierarchy recursion: if the y-set is already open-union-closed
    solve directly, otherwise paste recursively solved deeper-layer subgames and
    finish on the then-flat remainder."""
    for r in sorted(roots):
        if not work.live(r):
            continue
        wv, ach = _region_ach(work, view)
        entry = classify_play_set(
            GameView(n=wv.n, root=r, succs=wv.succs, leaf=wv.leaf, rule=wv.rule),
            y,
            ach,
        )
        if entry.classification != CLASS_HIGHER:
            _souc_solve(work, [r], view, y, xs, camp_a)
            continue
        layer0 = work.expanded.layer[r]
        region0 = [
            s
            for s in work.live_region([r])
            if work.expanded.layer[s] == layer0
        ]
        frontier = []
        for s in region0:
            for t in work.allowed[s]:
                if work.live(t) and work.expanded.layer[t] != layer0:
                    frontier.append(t)
        for t in sorted(set(frontier)):
            if work.live(t):
                _sdr_solve(work, [t], view, y, xs, camp_a)
        _souc_solve(work, [r], view, y, xs, camp_a)


def _quasi_antagonist_shape(prefs: PreferenceProfile) -> tuple:
    """Extract (player_a, player_b, y, xs) from chain preferences of the shape
    y < x_n < ... < x_1 for a and y < x_1 < ... < x_n for b."""
    if len(prefs.players) != 2:
        raise PreconditionError("quasi-antagonist preferences need exactly two players")
    pa, pb = prefs.players
    ra, rb = prefs.rel(pa), prefs.rel(pb)
    outs = prefs.outcomes.outcomes
    for rel, p in ((ra, pa), (rb, pb)):
        rep = validate_relation(rel, prefs.outcomes)
        if not rep or rel.kind != LINEAR:
            raise PreconditionError(f"relation of {p} is not a valid linear order")
    worst = [o for o in outs if all(o == w or ra.prec(o, w) for w in outs)]
    worst_b = [o for o in outs if all(o == w or rb.prec(o, w) for w in outs)]
    if not worst or not worst_b or worst[0] != worst_b[0]:
        raise PreconditionError("players do not share a worst outcome")
    y = worst[0]
    xs_desc = sorted(
        [o for o in outs if o != y],
        key=lambda o: sum(1 for w in outs if ra.prec(w, o)),
        reverse=True,
    )  # a-best first
    for x, w in itertools.combinations(xs_desc, 2):
        if not rb.prec(x, w):
            raise PreconditionError("b must invert a on the chain outcomes")
    return pa, pb, y, xs_desc


# ---------------------------------------------------------------------------
# Certificates


def _finish(
    work: WorkGame,
    prefs: PreferenceProfile,
    mode: str,
    suitability_pair=None,
    partition_override=None,
) -> SolveCertificate:
    expanded = work.expanded
    for s in expanded.non_terminal_states():
        if s not in work.choice:
            raise InternalSolveError(
                f"solver left no choice at {expanded.state_name(s)}"
            )
    profile = StrategyProfile(choice=dict(work.choice))
    violations = spe_violations(expanded, profile, prefs)
    if violations:
        s, p, got, alt = violations[0]
        raise InternalSolveError(
            f"certificate fails equilibrium check at {expanded.state_name(s)}: "
            f"player {p} improves {got!r} -> {alt!r}"
        )
    induced = induced_outcomes(expanded, profile)
    suitability = None
    if mode == MODE_GP_SPE:
        if not is_gp_spe(expanded, profile, prefs):
            raise InternalSolveError("certificate fails the global-Pareto check")
    elif mode == MODE_SPE_SUITABILITY:
        rel_a, rel_b = suitability_pair
        suitability = {}
        from .arena import all_achievable

        ach = all_achievable(expanded)
        for s in range(expanded.n):
            if partition_override is not None and s in partition_override:
                blocks = partition_override[s]
            else:
                blocks = suitability_partition_for(
                    tuple(sorted(ach[s], key=prefs.outcomes.index)), rel_a, rel_b
                )
            if induced[s] not in blocks[-1]:
                raise InternalSolveError(
                    f"induced outcome {induced[s]!r} not in the top suitability "
                    f"block {blocks[-1]} at {expanded.state_name(s)}"
                )
            suitability[s] = len(blocks)
    return SolveCertificate(
        profile=profile,
        induced={s: induced[s] for s in range(expanded.n)},
        mode=mode,
        suitability=suitability,
        trace=tuple(work.trace),
    )


def suitability_partition_for(outcomes_ordered, rel_a, rel_b) -> tuple:
    """Finest ordered partition (worst block first) where no later-block
    outcome is dispreferred to an earlier-block one by either player."""
    blocks_topfirst = []
    rest = tuple(outcomes_ordered)
    while rest:
        split = two_block_split(rel_a, rel_b, rest)
        if split is None:
            blocks_topfirst.append(rest)
            break
        upper, lower = split
        blocks_topfirst.append(upper)
        rest = lower
    return tuple(reversed(blocks_topfirst))


def compute_suitability_partition(expanded, state, rel_a, rel_b, outcome_order=None):
    from .arena import achievable_outcomes

    ach = achievable_outcomes(expanded, state)
    if outcome_order is None:
        ordered = tuple(sorted(ach))
    else:
        ordered = tuple(o for o in outcome_order if o in ach)
    return suitability_partition_for(ordered, rel_a, rel_b)


# ---------------------------------------------------------------------------
# Public work-level solvers


def solve_antagonist(
    work: WorkGame, order: PreferenceRelation, prefs: PreferenceProfile
) -> SolveCertificate:
    """Value-optimal equilibrium for two players with inverse linear
    preferences; the first profile player maximizes ``order``."""
    outs = prefs.outcomes.outcomes
    chain = sorted(outs, key=lambda o: sum(1 for w in outs if order.prec(w, o)))
    maximizer = prefs.players[0]
    _antagonist_solve(work, [work.expanded.root], {}, chain, {maximizer})
    # orphan-free: antagonist solving covers the whole reachable region, but
    # masked-away states may remain; give them value-optimal play too
    leftovers = [s for s in work.expanded.non_terminal_states() if s not in work.choice]
    while leftovers:
        _antagonist_solve(work, [leftovers[0]], {}, chain, {maximizer})
        leftovers = [
            s for s in work.expanded.non_terminal_states() if s not in work.choice
        ]
    return _finish(work, prefs, MODE_GP_SPE)


def solve_quasi_antagonist_stop(
    work: WorkGame, prefs: PreferenceProfile
) -> SolveCertificate:
    """Stop-game solver: preferences y < x_n < ... < x_1 and y < x_1 < ... < x_n,
    every undecided infinite play yields y."""
    pa, pb, y, xs = _quasi_antagonist_shape(prefs)
    if not weak_stop(work.game_view({}), y):
        raise PreconditionError("work game is not weak-stop for the common worst outcome")
    _qas_solve(work, [work.expanded.root], {}, y, xs, {pa})
    _mop_up(work, {}, y, xs, {pa})
    return _finish(work, prefs, MODE_GP_SPE)


def solve_open_union_closed(
    work: WorkGame, prefs: PreferenceProfile
) -> SolveCertificate:
    pa, pb, y, xs = _quasi_antagonist_shape(prefs)
    entry = classify_play_set(work.game_view({}), y)
    if entry.classification == CLASS_HIGHER:
        raise PreconditionError(
            "y-play-set lies above open-union-closed; use the difference recursion"
        )
    _souc_solve(work, [work.expanded.root], {}, y, xs, {pa})
    _mop_up(work, {}, y, xs, {pa})
    return _finish(work, prefs, MODE_GP_SPE)


def solve_difference_recursion(
    work: WorkGame, prefs: PreferenceProfile
) -> SolveCertificate:
    pa, pb, y, xs = _quasi_antagonist_shape(prefs)
    _sdr_solve(work, [work.expanded.root], {}, y, xs, {pa})
    _mop_up(work, {}, y, xs, {pa})
    return _finish(work, prefs, MODE_GP_SPE)


def _mop_up(work: WorkGame, view: dict, y: str, xs, camp_a) -> None:
    """Resolve states orphaned by promise cuts (pieces of the decomposition)."""
    guard = 0
    while True:
        leftovers = [
            s
            for s in work.expanded.non_terminal_states()
            if s not in work.choice and work.live(s)
        ]
        if not leftovers:
            return
        guard += 1
        if guard > work.expanded.n + 2:
            raise InternalSolveError("mop-up failed to converge")
        _qas_solve(work, [leftovers[0]], view, y, xs, camp_a)


def apply_transformation(
    work: WorkGame,
    kind: str,
    location: int,
    prefs: PreferenceProfile,
) -> WorkGame:
    """Apply one named stop-game transformation at a state, checking its
    applicability condition first."""
    pa, pb, y, xs = _quasi_antagonist_shape(prefs)
    camp_a = {pa}
    order = [y] + list(reversed(xs))

    def solve_yfree(s):
        _antagonist_solve(work, [s], {}, order, camp_a)

    def solve_residual(sub_roots):
        _qas_solve(work, sub_roots, {}, y, xs[:-1], camp_a)

    ctx = _EngineContext(work, {}, y, xs[-1] if xs else y, camp_a, solve_yfree, solve_residual)
    scope = work.live_region([work.expanded.root])
    _, ach = _region_ach(work, {})
    if kind == "T1":
        if not (work.live(location) and y not in ach[location] and len(ach[location]) >= 2):
            raise PreconditionError(
                "T1 needs a live state whose subgame has several outcomes but not y"
            )
        _apply_t1(ctx, location)
    elif kind == "T2":
        if location not in _pseudo_leaf_targets(work, ach, scope, y):
            raise PreconditionError("T2 needs a y-pseudo-leaf")
        _apply_t2(ctx, ach, scope, location)
    elif kind == "T3":
        hit = _try_t3(ctx, ach, [location])
        if hit is None or hit[0] != location:
            raise PreconditionError(
                "T3 needs a b-owned state with an x_n-pseudo-leaf successor and alternatives"
            )
        _apply_t3(ctx, *hit)
    elif kind == "T4":
        if not (work.live(location) and y in ach[location]):
            raise PreconditionError("T4 needs a live state whose subgame involves y")
        region = work.live_region([location])
        if not _region_condition_t4(ctx, ach, region):
            raise PreconditionError(
                "T4 needs no b-stop nodes and an a_k stop (k < n) in every y-subgame"
            )
        _apply_t4(ctx, ach, location)
    elif kind == "T5":
        if _try_t5(ctx, ach, [location]) != location:
            raise PreconditionError(
                "T5 needs every y-subgame to stop only at a_n nodes"
            )
        _apply_t5(ctx, location)
    else:
        raise InputError(f"unknown transformation kind {kind!r}")
    return work


# ---------------------------------------------------------------------------
# Linear multi-player driver


def solve_linear_multiplayer(
    arena: Arena, prefs: PreferenceProfile, cap: int = 10**6
) -> SolveCertificate | Rejection:
    for p in prefs.players:
        rep = validate_relation(prefs.rel(p), prefs.outcomes)
        if not rep:
            raise InputError(f"invalid relation for {p}: {rep.axiom} at {rep.witness}")
        if prefs.rel(p).kind != LINEAR:
            raise PreconditionError("linear driver requires linear preferences")
    witness = find_spe_killer(prefs)
    if witness is not None:
        return Rejection(reason="the preference profile contains the SPE killer", witness=witness)
    partition = interval_partition(prefs)
    expanded = expand(arena, cap=cap)
    work = WorkGame(expanded)
    _linear_rec(work, [work.expanded.root], prefs, partition)
    # pieces cut away from the root still need equilibrium play
    guard = 0
    while True:
        leftovers = [s for s in expanded.non_terminal_states() if s not in work.choice]
        if not leftovers:
            break
        guard += 1
        if guard > expanded.n + 2:
            raise InternalSolveError("leftover resolution failed to converge")
        _linear_rec(work, [leftovers[0]], prefs, partition)
    return _finish(work, prefs, MODE_GP_SPE)


def _linear_rec(work: WorkGame, roots, prefs: PreferenceProfile, partition) -> None:
    queue = sorted(roots)
    while queue:
        r = queue.pop(0)
        if not work.live(r):
            continue
        snapshot = work.live_region([r])
        _, ach = _region_ach(work, {})
        occ = ach[r]
        top_idx = max(
            i for i, blk in enumerate(partition.blocks) if set(blk) & occ
        )
        top = [o for o in partition.blocks[top_idx] if o in occ or True]
        lower = set().union(*[set(b) for b in partition.blocks[:top_idx]]) if top_idx else set()
        if lower:
            fresh = work.fresh_outcome()
            view = {o: fresh for o in lower}
            cut = 0
            for p in snapshot:
                if not work.live(p) or ach[p] <= lower:
                    continue
                keep = [t for t in work.allowed[p] if not (ach[t] and ach[t] <= lower)]
                if len(keep) != len(work.allowed[p]):
                    if not keep:
                        raise InternalSolveError("top-block cut emptied an allowance")
                    cut += len(work.allowed[p]) - len(keep)
                    work.allowed[p] = keep
            work.record(
                "cut-top-block",
                r,
                f"parents ignore subgames confined to lower blocks ({cut} edges)",
            )
            work.record("collapse", r, f"lower blocks relabeled to fresh worst {fresh!r}")
            y = fresh
        else:
            view = {}
            y = work.fresh_outcome()  # never occurs; pure antagonist case
        ref = partition.reference
        ref_rel = prefs.rel(ref)
        top_sorted = sorted(
            partition.blocks[top_idx],
            key=lambda o: sum(1 for w in partition.blocks[top_idx] if ref_rel.prec(w, o)),
        )
        xs = list(reversed(top_sorted))  # camp-a best first
        camp_a = {
            p
            for p in prefs.players
            if partition.orientation[p][top_idx] == "same"
        }
        _sdr_solve(work, [r], view, y, xs, camp_a)
        _qas_ctx_mop(work, view, y, xs, camp_a, snapshot)
        # anything still live in the snapshot sits inside a cut lower region
        queue.extend([s for s in snapshot if work.live(s)])


def _qas_ctx_mop(work: WorkGame, view, y, xs, camp_a, snapshot) -> None:
    """Within the snapshot, resolve states orphaned by engine cuts that still
    have top-block access (their occurrences are not confined to lower blocks)."""
    guard = 0
    while True:
        _, ach = _region_ach(work, view)
        leftovers = [
            s
            for s in snapshot
            if work.live(s) and any(view.get(o, o) != y for o in ach[s])
        ]
        if not leftovers:
            return
        guard += 1
        if guard > len(snapshot) + 2:
            raise InternalSolveError("orphan resolution failed to converge")
        _sdr_solve(work, [leftovers[0]], view, y, xs, camp_a)


# ---------------------------------------------------------------------------
# Two players with strict weak orders


def solve_two_player_swo(
    arena: Arena,
    rel_a: PreferenceRelation,
    rel_b: PreferenceRelation,
    players=("a", "b"),
    outcome_order=None,
    partition_override=None,
    cap: int = 10**6,
) -> SolveCertificate | Rejection:
    pa, pb = players
    outcomes = OutcomeSet(
        tuple(outcome_order)
        if outcome_order is not None
        else tuple(sorted(arena.outcomes()))
    )
    for rel, p in ((rel_a, pa), (rel_b, pb)):
        rep = validate_relation(rel, outcomes)
        if not rep:
            raise InputError(f"invalid relation for {p}: {rep.axiom} at {rep.witness}")
        if rel.kind == LINEAR:
            pass  # a linear order is a strict weak order
        else:
            swo_ok = validate_relation(
                PreferenceRelation(rel.pairs, STRICT_WEAK), outcomes
            )
            if not swo_ok:
                raise PreconditionError(
                    f"relation of {p} is not a strict weak order: {swo_ok.axiom}"
                )
    prefs = PreferenceProfile(
        players=(pa, pb), outcomes=outcomes, relations={pa: rel_a, pb: rel_b}
    )
    witness = find_spe_killer(prefs)
    if witness is not None:
        return Rejection(reason="the preference pair contains the SPE killer", witness=witness)
    expanded = expand(arena, cap=cap)
    work = WorkGame(expanded)
    state = _SwoState(work, pa, pb, rel_a, rel_b, list(outcomes.outcomes))
    _swo_descend(state, [work.expanded.root], {}, rel_a, rel_b)
    guard = 0
    while True:
        leftovers = [s for s in expanded.non_terminal_states() if s not in work.choice]
        if not leftovers:
            break
        guard += 1
        if guard > expanded.n + 2:
            raise InternalSolveError("leftover resolution failed to converge")
        _swo_descend(state, [leftovers[0]], {}, rel_a, rel_b)
    return _finish(
        work,
        prefs,
        MODE_SPE_SUITABILITY,
        suitability_pair=(rel_a, rel_b),
        partition_override=partition_override,
    )


class _SwoState:
    def __init__(self, work, pa, pb, rel_a, rel_b, outcome_order):
        self.work = work
        self.pa = pa
        self.pb = pb
        self.rel_a = rel_a
        self.rel_b = rel_b
        self.outcome_order = list(outcome_order)

    def order_key(self, o: str) -> int:
        if o in self.outcome_order:
            return self.outcome_order.index(o)
        return len(self.outcome_order)  # fresh collapsed outcomes sort last

    def ordered(self, outcomes) -> tuple:
        return tuple(sorted(outcomes, key=self.order_key))


def _swo_descend(state: _SwoState, roots, view: dict, rel_a, rel_b) -> None:
    """Layer recursion: solve strictly deeper subgames first so the live part
    handed to the flat solver sits in a single layer, where every outcome's
    play-set is a union of an open set and a closed set."""
    work = state.work
    for r in sorted(roots):
        if not work.live(r):
            continue
        layer0 = work.expanded.layer[r]
        region0 = [
            s for s in work.live_region([r]) if work.expanded.layer[s] == layer0
        ]
        frontier = sorted(
            {
                t
                for s in region0
                for t in work.allowed[s]
                if work.live(t) and work.expanded.layer[t] != layer0
            }
        )
        for t in frontier:
            if work.live(t):
                _swo_descend(state, [t], view, rel_a, rel_b)
        _swo_flat(state, [s for s in region0 if work.live(s)], view, rel_a, rel_b)


def _swo_flat(state: _SwoState, roots, view: dict, rel_a, rel_b) -> None:
    """The case tree of the two-player strict-weak-order construction on a
    single-layer live region."""
    work = state.work
    queue = sorted(roots)
    guard = 0
    while queue:
        guard += 1
        if guard > 50 * (work.expanded.n + 4):
            raise InternalSolveError("swo case recursion failed to converge")
        r = queue.pop(0)
        if not work.live(r):
            continue
        _, ach = _region_ach(work, view)
        occ = state.ordered(ach[r])
        if len(occ) <= 1:
            work.decide_constant_region(view, r)
            continue
        ra = rel_a.restrict(occ)
        rb = rel_b.restrict(occ)
        split = two_block_split(ra, rb, occ)
        if split is None:
            _swo_nosplit(state, r, view, rel_a, rel_b, occ)
            continue
        upper, lower = split
        if len(lower) >= 2:
            snapshot = work.live_region([r])
            lower_set = set(lower)
            entries = [
                u
                for u in snapshot
                if work.live(u) and ach[u] and set(ach[u]) <= lower_set
            ]
            for u in entries:
                if work.live(u):
                    _swo_flat(state, [u], view, rel_a, rel_b)
            fresh = work.fresh_outcome()
            view2 = dict(view)
            for raw in list(view2):
                if view2[raw] in lower_set:
                    view2[raw] = fresh
            for o in lower:
                for raw in _raw_preimages(view, o):
                    view2[raw] = fresh
            work.record("collapse", r, f"lower block {lower} relabeled to {fresh!r}")
            rel_a2 = _collapse_relation(rel_a, lower_set, fresh)
            rel_b2 = _collapse_relation(rel_b, lower_set, fresh)
            _swo_flat(state, [r], view2, rel_a2, rel_b2)
        else:
            y_w = lower[0]
            _swo_b2(state, r, view, rel_a, rel_b, upper, y_w)
        queue.extend([s for s in work.live_region([r]) if work.live(s)])


def _raw_preimages(view: dict, viewed: str):
    if view:
        pre = [raw for raw, v in view.items() if v == viewed]
        if pre:
            return pre
    return [viewed]


def _collapse_relation(rel: PreferenceRelation, lower_set, fresh: str) -> PreferenceRelation:
    pairs = {
        (x, y)
        for (x, y) in rel.pairs
        if x not in lower_set and y not in lower_set
    }
    uppers = {x for pair in rel.pairs for x in pair if x not in lower_set}
    pairs |= {(fresh, u) for u in uppers}
    return PreferenceRelation(pairs=frozenset(pairs), kind=STRICT_WEAK)


def _swo_nosplit(state: _SwoState, r, view, rel_a, rel_b, occ) -> None:
    """First main case: the occurring outcomes admit no two-block split."""
    work = state.work
    ra = rel_a.restrict(occ)
    rb = rel_b.restrict(occ)
    classes_a = indifference_classes(ra, occ)
    classes_b = indifference_classes(rb, occ)
    if len(classes_a) >= 3 and len(classes_b) >= 3:
        common = ra.pairs & rb.pairs
        if common:
            raise InternalSolveError(
                "killer-free unsplittable preferences with non-extremal elements "
                f"must be disjoint; common pair {min(common)}"
            )
        linear = antagonistic_extension(ra, rb, occ)
        chain = sorted(occ, key=lambda o: sum(1 for w in occ if linear.prec(w, o)))
        work.record("T1", r, "antagonistic linear extension; value-optimal play")
        _antagonist_solve(work, [r], view, chain, {state.pa})
        return
    if len(classes_a) <= 2:
        ext_role_a = True
        bottom = set(classes_a[0])
        top_other = set(classes_b[-1])
    else:
        ext_role_a = False
        bottom = set(classes_b[0])
        top_other = set(classes_a[-1])
    stars = [o for o in occ if o in bottom and o in top_other]
    if not stars:
        raise InternalSolveError(
            "no jointly extremal outcome in the unsplittable one-sided case"
        )
    y_star = stars[0]
    _swo_nested2(state, r, view, rel_a, rel_b, occ, y_star, ext_role_a)


def _swo_nested2(state, r, view, rel_a, rel_b, occ, y_star, ext_role_a) -> None:
    """One preference has only extremal elements: empty the interior of the
    jointly extremal outcome, solve the parts that avoid it, commit the rest
    to it."""
    work = state.work
    ext_player = state.pa if ext_role_a else state.pb
    ext_rel = rel_a if ext_role_a else rel_b
    snapshot = work.live_region([r])
    work.record(
        "T2",
        r,
        f"empty the interior of {y_star!r} ({ext_player} ignores, the other chooses)",
    )
    guard = 0
    while True:
        guard += 1
        if guard > 4 * work.expanded.n + 8:
            raise InternalSolveError("interior emptying failed to converge")
        scope = [s for s in snapshot if work.live(s)]
        if not scope:
            return
        _, ach = _region_ach(work, view)
        pls = _pseudo_leaf_targets(work, ach, scope, y_star)
        if not pls:
            break
        t = pls[0]
        for p in scope:
            if not work.live(p) or t not in work.allowed[p]:
                continue
            if ach[p] == frozenset([y_star]):
                continue
            if work.expanded.owner[p] == ext_player:
                work.allowed[p] = [u for u in work.allowed[p] if u != t]
                if not work.allowed[p]:
                    raise InternalSolveError("interior emptying emptied an allowance")
            else:
                work.allowed[p] = [t]
        if work.live(t):
            work.decide_constant_region(view, t)
    # alternate: solve pieces that cannot reach y_star, then let the extremal
    # player grab its top class wherever a top-class leaf is adjacent; each
    # commitment may strand further states away from y_star, and those are
    # re-solved with their true remaining options in the next round
    m_top = set(indifference_classes(ext_rel.restrict(occ), occ)[-1])
    guard = 0
    while True:
        guard += 1
        if guard > 6 * work.expanded.n + 12:
            raise InternalSolveError("nested-case phase loop failed to converge")
        _, ach = _region_ach(work, view)
        offs = [u for u in snapshot if work.live(u) and y_star not in ach[u]]
        if offs:
            _swo_flat(state, [offs[0]], view, rel_a, rel_b)
            continue
        scope = [s for s in snapshot if work.live(s)]
        if not scope:
            return
        progressed = False
        for p in scope:
            if not work.live(p) or work.expanded.owner[p] != ext_player:
                continue
            if set(ach[p]) <= m_top:
                continue
            for t in work.allowed[p]:
                if not work.live(t) and ach[t] and set(ach[t]) <= m_top:
                    work.choice[p] = t
                    work.refresh_decided([p])
                    progressed = True
                    break
        if not progressed:
            break
    scope = [s for s in snapshot if work.live(s)]
    if not scope:
        return
    _, ach = _region_ach(work, view)
    members = [s for s in scope if y_star in ach[s]]
    if len(members) != len(scope):
        bad = [s for s in scope if y_star not in ach[s]]
        raise InternalSolveError(
            f"states lost access to {y_star!r} before the final commitment: {bad}"
        )
    work.commit_toward(view, ach, y_star, members)


def _swo_b2(state, r, view, rel_a, rel_b, upper, y_w) -> None:
    """Split with a singleton lower block: the stop-game machinery runs with
    the singleton as the common worst outcome and a jointly extremal upper
    outcome in the x_n role."""
    work = state.work
    ra_u = rel_a.restrict(upper)
    rb_u = rel_b.restrict(upper)
    classes_a = indifference_classes(ra_u, upper)
    classes_b = indifference_classes(rb_u, upper)
    cand_ab = [o for o in upper if o in set(classes_a[0]) and o in set(classes_b[-1])]
    cand_ba = [o for o in upper if o in set(classes_b[0]) and o in set(classes_a[-1])]
    if cand_ab:
        x_n = cand_ab[0]
        camp_a = {state.pa}
    elif cand_ba:
        x_n = cand_ba[0]
        camp_a = {state.pb}
    else:
        raise InternalSolveError(
            "no jointly extremal outcome in an unsplittable upper block"
        )

    def solve_yfree(s):
        _swo_flat(state, [s], view, rel_a, rel_b)

    def solve_residual(sub_roots):
        _swo_flat(state, sub_roots, view, rel_a, rel_b)

    work.record(
        "T3",
        r,
        f"stop-game round: worst {y_w!r}, pivot {x_n!r}, camp a {sorted(camp_a)}",
    )
    ctx = _EngineContext(work, view, y_w, x_n, camp_a, solve_yfree, solve_residual)
    _engine_loop(ctx, [r])


# ---------------------------------------------------------------------------
# The six-outcome partial-order pattern


PO_PATTERN_A = (("ga", "y"), ("y", "x"), ("z", "be"), ("be", "al"))
PO_PATTERN_B = (("x", "z"), ("z", "y"), ("al", "ga"), ("ga", "be"))


def match_po_pattern(rel_a, rel_b, outcomes) -> dict | None:
    """Bijection from pattern names to outcomes making both relations equal to
    the pattern, or None."""
    names = ("x", "y", "z", "al", "be", "ga")
    outs = tuple(outcomes)
    if len(outs) != 6:
        return None
    base_a = frozenset(make_relation(PO_PATTERN_A, "partial").pairs)
    base_b = frozenset(make_relation(PO_PATTERN_B, "partial").pairs)
    for perm in itertools.permutations(outs):
        sigma = dict(zip(names, perm))
        mapped_a = frozenset((sigma[x], sigma[y]) for (x, y) in base_a)
        mapped_b = frozenset((sigma[x], sigma[y]) for (x, y) in base_b)
        if mapped_a == rel_a.pairs and mapped_b == rel_b.pairs:
            return sigma
    return None


def _po_xfree_relations(sigma: dict) -> tuple:
    """Strict weak orders extending the pattern without x: killer-free."""
    rel_a = class_relation(
        ((sigma["z"],), (sigma["ga"], sigma["be"]), (sigma["y"], sigma["al"]))
    )
    rel_b = class_relation(
        ((sigma["z"], sigma["al"]), (sigma["ga"],), (sigma["y"], sigma["be"]))
    )
    return rel_a, rel_b


def _po_alfree_relations(sigma: dict) -> tuple:
    """Strict weak orders extending the pattern without alpha: killer-free."""
    rel_a = class_relation(
        ((sigma["ga"],), (sigma["z"], sigma["y"]), (sigma["be"], sigma["x"]))
    )
    rel_b = class_relation(
        ((sigma["ga"], sigma["x"]), (sigma["z"],), (sigma["be"], sigma["y"]))
    )
    return rel_a, rel_b


def solve_po_pattern(
    arena: Arena,
    rel_a: PreferenceRelation,
    rel_b: PreferenceRelation,
    players=("a", "b"),
    cap: int = 10**6,
) -> SolveCertificate:
    outcomes = tuple(sorted(arena.outcomes() | {x for p in rel_a.pairs | rel_b.pairs for x in p}))
    sigma = match_po_pattern(rel_a, rel_b, outcomes)
    if sigma is None:
        raise PreconditionError(
            "preferences do not match the six-outcome partial-order pattern"
        )
    prefs = PreferenceProfile(
        players=tuple(players),
        outcomes=OutcomeSet(outcomes),
        relations={players[0]: rel_a, players[1]: rel_b},
    )
    def attempt(permissive: bool) -> SolveCertificate:
        expanded = expand(arena, cap=cap)
        work = WorkGame(expanded)
        state = _PoState(work, players[0], players[1], sigma, outcomes, rel_b)
        state.permissive = permissive
        guard = 0
        while True:
            leftovers = [
                s for s in expanded.non_terminal_states() if s not in work.choice
            ]
            if not leftovers:
                break
            guard += 1
            if guard > expanded.n + 2:
                raise InternalSolveError("leftover resolution failed to converge")
            _po_phases(state, leftovers)
        return _finish(work, prefs, MODE_SPE)

    try:
        return attempt(permissive=False)
    except InternalSolveError:
        # a piece straddled both chains beyond the cap-safe cuts; retry with
        # permissive promises -- the certificate is still verified before
        # emission, so an unsound profile can never escape
        return attempt(permissive=True)


class _PoState:
    def __init__(self, work, pa, pb, sigma, outcomes, rel_b):
        self.work = work
        self.pa = pa
        self.pb = pb
        self.sigma = sigma
        self.outcomes = outcomes
        self.x = sigma["x"]
        self.al = sigma["al"]
        # states whose entire unmasked future is a single outcome, plus states
        # committed by a choose/ignore cascade: always-safe cut targets,
        # because pasted pieces may hide better options for a deviator
        from .arena import all_achievable

        self.full_ach = all_achievable(work.expanded)
        self.constant = {s for s, a in enumerate(self.full_ach) if len(a) == 1}
        self.committed = set()
        self.permissive = False
        self.b_minimal = {
            o
            for o in outcomes
            if not any(rel_b.prec(w, o) for w in outcomes)
        }

    def cut_safe(self, t: int, target: str) -> bool:
        """Is ignoring t rational for the non-chooser no matter what the outer
        play induces?  True constant regions and cascade-committed states fetch
        only the target; a pasted piece fetches at most its solve-world cap
        within its true achievable set, which must be minimal for the cutter."""
        if self.permissive:
            return True
        if self.work.live(t) or t in self.constant or t in self.committed:
            return True
        caps = set()
        for world_a, world_b in (
            _po_xfree_relations(self.sigma),
            _po_alfree_relations(self.sigma),
        ):
            covered = {o for pair in world_b.pairs for o in pair}
            if not set(self.full_ach[t]) <= covered:
                continue
            caps |= {
                w for w in self.full_ach[t] if not world_b.prec(target, w)
            }
        return caps <= self.b_minimal


def _po_swo_subsolve(state: _PoState, roots, rels) -> None:
    """Solve live regions with a strict-weak-order extension pair, descending
    the layer structure like the plain two-player solver."""
    rel_a, rel_b = rels
    sub = _SwoState(
        state.work, state.pa, state.pb, rel_a, rel_b, list(state.outcomes)
    )
    for r in sorted(roots):
        if state.work.live(r):
            _swo_descend(sub, [r], {}, rel_a, rel_b)


def _po_choose_ignore(state: _PoState, snapshot, target: str, chooser: str) -> None:
    """Constant-future pseudo-leaves of the target outcome: the chooser commits
    to them, the other player's edges into them are cut.

    Only truly constant regions and states this cascade committed itself are
    eligible targets: a pasted sub-certificate that merely induces the target
    may hide a better fetch for the deviating player, which would make the
    cut promise irrational.
    """
    work = state.work
    guard = 0
    while True:
        guard += 1
        if guard > 4 * work.expanded.n + 8:
            raise InternalSolveError("choose/ignore loop failed to converge")
        scope = [s for s in snapshot if work.live(s)]
        if not scope:
            return
        _, ach = _region_ach(work, {})
        pls = _pseudo_leaf_targets(work, ach, scope, target)
        progressed = False
        for t in pls:
            cuttable = state.cut_safe(t, target)
            if work.live(t):
                for s in work.decide_constant_region({}, t):
                    state.committed.add(s)
                progressed = True
            for p in scope:
                if not work.live(p) or t not in work.allowed[p]:
                    continue
                if ach[p] == frozenset([target]):
                    continue
                if work.expanded.owner[p] == chooser:
                    work.choice[p] = t
                    work.refresh_decided([p])
                    state.committed.add(p)
                    progressed = True
                elif cuttable:
                    work.allowed[p] = [u for u in work.allowed[p] if u != t]
                    if not work.allowed[p]:
                        raise InternalSolveError("choose/ignore emptied an allowance")
                    progressed = True
            if progressed:
                break
        if not progressed:
            return


def _po_phases(state: _PoState, snapshot) -> None:
    """Per-piece dispatch with the degenerate cases first: a piece without x
    (or without alpha) is solved wholesale in one strict-weak-order extension
    world, so the pasted deviation caps compose by complement-transitivity.
    Only pieces carrying both x and alpha run the choose/ignore pipeline."""
    work = state.work
    guard = 0
    while True:
        guard += 1
        if guard > 6 * work.expanded.n + 12:
            raise InternalSolveError("po piece dispatch failed to converge")
        remaining = [s for s in snapshot if work.live(s)]
        if not remaining:
            return
        _, ach = _region_ach(work, {})
        r = remaining[0]
        if state.x not in ach[r]:
            work.record("T1", r, "x absent from the piece: one extension world")
            _po_swo_subsolve(state, [r], _po_xfree_relations(state.sigma))
            continue
        if state.al not in ach[r]:
            work.record("T1", r, "alpha absent from the piece: one extension world")
            _po_swo_subsolve(state, [r], _po_alfree_relations(state.sigma))
            continue
        _po_pipeline(state, work.live_region([r]))


def _po_pipeline(state: _PoState, snapshot) -> None:
    """Full six-outcome pipeline on one piece carrying both x and alpha."""
    work = state.work
    work.record("T5", snapshot[0], "reduce the x-set to closed: a chooses, b ignores")
    _po_choose_ignore(state, snapshot, state.x, chooser=state.pa)
    guard = 0
    while True:
        guard += 1
        if guard > 2 * work.expanded.n + 8:
            raise InternalSolveError("x-free piece loop failed to converge")
        _, ach = _region_ach(work, {})
        offs = [u for u in snapshot if work.live(u) and state.x not in ach[u]]
        if not offs:
            break
        _po_swo_subsolve(state, [offs[0]], _po_xfree_relations(state.sigma))
        # new x-pseudo-leaves may now border live states
        _po_choose_ignore(state, snapshot, state.x, chooser=state.pa)
    work.record("T4", snapshot[0], "eliminate alpha: a chooses its pseudo-leaves, b ignores them")
    _po_choose_ignore(state, snapshot, state.al, chooser=state.pa)
    guard = 0
    while True:
        guard += 1
        if guard > 4 * work.expanded.n + 8:
            raise InternalSolveError("final po dispatch failed to converge")
        _po_choose_ignore(state, snapshot, state.x, chooser=state.pa)
        _po_choose_ignore(state, snapshot, state.al, chooser=state.pa)
        remaining = [s for s in snapshot if work.live(s)]
        if not remaining:
            return
        _, ach = _region_ach(work, {})
        r = remaining[0]
        if state.al not in ach[r]:
            _po_swo_subsolve(state, [r], _po_alfree_relations(state.sigma))
            continue
        if state.x not in ach[r]:
            _po_swo_subsolve(state, [r], _po_xfree_relations(state.sigma))
            continue
        # both x and alpha persist through loop outcomes of different layers:
        # peel strictly deeper layers first, as in the difference recursion
        layer0 = work.expanded.layer[r]
        region0 = [
            s for s in work.live_region([r]) if work.expanded.layer[s] == layer0
        ]
        frontier = sorted(
            {
                t
                for s in region0
                for t in work.allowed[s]
                if work.live(t) and work.expanded.layer[t] != layer0
            }
        )
        frontier = [t for t in frontier if work.live(t)]
        if not frontier:
            raise InternalSolveError(
                "flat region with both x and alpha persistent; no descent possible"
            )
        _po_phases(state, work.live_region(frontier))


# ---------------------------------------------------------------------------
# Dispatcher


def solve(
    arena: Arena,
    prefs: PreferenceProfile,
    mode: str = MODE_GP_SPE,
    cap: int = 10**6,
) -> SolveCertificate | Rejection:
    """Dispatch on player count and preference kinds; certificates are
    re-verified before being returned."""
    missing = sorted(set(arena.outcomes()) - set(prefs.outcomes.outcomes))
    if missing:
        raise InputError(f"arena outcomes missing from the profile: {missing}")
    owners = {arena.owner[v] for v in arena.vertices if not arena.is_terminal(v)}
    stray = sorted(owners - set(prefs.players))
    if stray:
        raise InputError(f"arena owners missing from the player list: {stray}")
    for o in prefs.outcomes.outcomes:
        if o.startswith(RESERVED_PREFIX):
            raise InputError(f"outcome {o!r} uses the reserved prefix")
    kinds = {}
    for p in prefs.players:
        rel = prefs.rel(p)
        rep = validate_relation(rel, prefs.outcomes)
        if not rep:
            raise InputError(f"invalid relation for {p}: {rep.axiom} at {rep.witness}")
        if validate_relation(
            PreferenceRelation(rel.pairs, LINEAR), prefs.outcomes
        ):
            kinds[p] = LINEAR
        elif validate_relation(
            PreferenceRelation(rel.pairs, STRICT_WEAK), prefs.outcomes
        ):
            kinds[p] = STRICT_WEAK
        else:
            kinds[p] = "partial"
    if all(k == LINEAR for k in kinds.values()):
        return solve_linear_multiplayer(arena, prefs, cap=cap)
    if len(prefs.players) == 1:
        p = prefs.players[0]
        return solve_two_player_swo(
            arena,
            prefs.rel(p),
            make_relation([], STRICT_WEAK),
            players=(p, "__opponent"),
            outcome_order=prefs.outcomes.outcomes,
            cap=cap,
        )
    if len(prefs.players) == 2:
        pa, pb = prefs.players
        if all(k in (LINEAR, STRICT_WEAK) for k in kinds.values()):
            return solve_two_player_swo(
                arena,
                prefs.rel(pa),
                prefs.rel(pb),
                players=(pa, pb),
                outcome_order=prefs.outcomes.outcomes,
                cap=cap,
            )
        if match_po_pattern(prefs.rel(pa), prefs.rel(pb), prefs.outcomes.outcomes):
            return solve_po_pattern(
                arena, prefs.rel(pa), prefs.rel(pb), players=(pa, pb), cap=cap
            )
        raise UnsupportedError(
            "two-player partial orders outside the known solvable pattern"
        )
    raise UnsupportedError(
        "three or more players with non-linear preferences: killer-freeness "
        "does not characterize equilibrium existence there (the three-player "
        "stop cycle has none)"
    )
