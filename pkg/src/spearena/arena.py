"""Finite game arenas and their visited-set expansion.

An :class:`Arena` is a finite rooted graph with vertex ownership, terminal
outcomes, and a decision list assigning an outcome to every infinite play
from the set of vertices it visits.  Expanding an arena produces the finite
state graph of (vertex, visited set) pairs that stands in for the infinite
unfolded game tree: the visited set grows monotonically along transitions,
so every cycle of the expansion lies inside a single "layer" (fixed visited
set) and the outcome of an infinite play is the layer rule of the layer it
finally settles in.

The analyses at the bottom of the module (achievable outcomes, pseudo-leaf
states, weak/strong stop tests, topological classification of an outcome's
play-set) operate on a :class:`GameView`, a plain adjacency snapshot, so the
solver can run them on edge-restricted and partially relabeled views as well.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .errors import InputError, ResourceCapError

RESERVED_PREFIX = "__collapsed_"


# ---------------------------------------------------------------------------
# Boolean formulas over "visited(v)" atoms


@dataclass(frozen=True)
class Visited:
    vertex: str


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    args: tuple


@dataclass(frozen=True)
class Or:
    args: tuple


Formula = object  # Visited | Not | And | Or


def eval_formula(formula, occurrence: frozenset) -> bool:
    if isinstance(formula, Visited):
        return formula.vertex in occurrence
    if isinstance(formula, Not):
        return not eval_formula(formula.arg, occurrence)
    if isinstance(formula, And):
        return all(eval_formula(f, occurrence) for f in formula.args)
    if isinstance(formula, Or):
        return any(eval_formula(f, occurrence) for f in formula.args)
    raise InputError(f"unknown formula node {formula!r}")


def formula_vertices(formula) -> set:
    if isinstance(formula, Visited):
        return {formula.vertex}
    if isinstance(formula, Not):
        return formula_vertices(formula.arg)
    if isinstance(formula, (And, Or)):
        out = set()
        for f in formula.args:
            out |= formula_vertices(f)
        return out
    raise InputError(f"unknown formula node {formula!r}")


@dataclass(frozen=True)
class InfiniteRule:
    """Ordered decision list: first case whose formula matches the occurrence
    set decides the outcome of an infinite play; otherwise the default."""

    cases: tuple  # tuple[(Formula, str), ...]
    default: str

    def outcome_for(self, occurrence: frozenset) -> str:
        for formula, outcome in self.cases:
            if eval_formula(formula, occurrence):
                return outcome
        return self.default

    def outcomes(self) -> set:
        return {o for _, o in self.cases} | {self.default}


@dataclass(frozen=True)
class ProjectedRule:
    """Rule evaluated through a vertex projection (memory-product arenas)."""

    base: InfiniteRule
    projection: dict = field(compare=False)

    def outcome_for(self, occurrence: frozenset) -> str:
        return self.base.outcome_for(frozenset(self.projection[v] for v in occurrence))

    def outcomes(self) -> set:
        return self.base.outcomes()


# ---------------------------------------------------------------------------
# Arena


@dataclass(frozen=True)
class Arena:
    vertices: tuple
    root: str
    owner: dict = field(compare=False)  # non-terminal vertex -> player
    edges: dict = field(compare=False)  # vertex -> tuple of successors (empty at terminals)
    terminal_outcome: dict = field(compare=False)  # terminal vertex -> outcome
    infinite_rule: InfiniteRule | ProjectedRule = None

    def successors(self, vertex: str) -> tuple:
        return self.edges.get(vertex, ())

    def is_terminal(self, vertex: str) -> bool:
        return vertex in self.terminal_outcome

    def outcomes(self) -> set:
        return set(self.terminal_outcome.values()) | self.infinite_rule.outcomes()


def validate_arena(arena: Arena) -> None:
    seen = set()
    if len(set(arena.vertices)) != len(arena.vertices):
        raise InputError("duplicate vertex names")
    if arena.root not in arena.vertices:
        raise InputError(f"root {arena.root!r} is not a vertex")
    for v in arena.vertices:
        succs = arena.successors(v)
        terminal = arena.is_terminal(v)
        if terminal and succs:
            raise InputError(f"terminal vertex {v!r} has successors")
        if not terminal and not succs:
            raise InputError(f"non-terminal vertex {v!r} has no successor (arena not pruned)")
        if not terminal and v not in arena.owner:
            raise InputError(f"non-terminal vertex {v!r} has no owner")
        for w in succs:
            if w not in arena.vertices:
                raise InputError(f"edge {v!r} -> {w!r} dangles")
        if len(set(succs)) != len(succs):
            raise InputError(f"duplicate edges out of {v!r}")
    # reachability
    queue = deque([arena.root])
    seen = {arena.root}
    while queue:
        v = queue.popleft()
        for w in arena.successors(v):
            if w not in seen:
                seen.add(w)
                queue.append(w)
    unreachable = [v for v in arena.vertices if v not in seen]
    if unreachable:
        raise InputError(f"vertices unreachable from root: {unreachable}")


# ---------------------------------------------------------------------------
# Expansion


@dataclass
class ExpandedArena:
    """Reachable (vertex, visited-set) states of an arena, BFS-indexed."""

    arena: Arena
    states: list  # list[tuple[str, frozenset]]
    succs: list  # list[tuple[int, ...]]
    preds: list  # list[tuple[int, ...]]
    owner: list  # list[str | None]
    terminal: list  # list[str | None]
    layer: list  # list[frozenset]
    root: int = 0
    _achievable: list | None = None
    _full_view: "GameView | None" = None

    @property
    def n(self) -> int:
        return len(self.states)

    def state_name(self, i: int) -> str:
        vertex, visited = self.states[i]
        return f"{vertex}|{','.join(sorted(visited))}"

    def state_index(self, name: str) -> int:
        vertex, _, visited = name.partition("|")
        key = (vertex, frozenset(v for v in visited.split(",") if v))
        for i, st in enumerate(self.states):
            if st == key:
                return i
        raise InputError(f"unknown state {name!r}")

    def non_terminal_states(self) -> list:
        return [i for i in range(self.n) if self.terminal[i] is None]

    def rule_outcome(self, i: int) -> str:
        return self.arena.infinite_rule.outcome_for(self.layer[i])

    def full_view(self) -> "GameView":
        if self._full_view is None:
            self._full_view = GameView(
                n=self.n,
                root=self.root,
                succs=[tuple(s) for s in self.succs],
                leaf=list(self.terminal),
                rule=[self.rule_outcome(i) for i in range(self.n)],
            )
        return self._full_view


def expand(arena: Arena, cap: int = 10**6) -> ExpandedArena:
    """BFS the (vertex, visited-set) graph from (root, {root})."""
    validate_arena(arena)
    start = (arena.root, frozenset([arena.root]))
    index = {start: 0}
    states = [start]
    succ_lists: list = [None]
    queue = deque([0])
    while queue:
        i = queue.popleft()
        vertex, visited = states[i]
        row = []
        for w in arena.successors(vertex):
            nxt = (w, visited | {w})
            if nxt not in index:
                if len(states) >= cap:
                    raise ResourceCapError(
                        f"expansion exceeds state cap {cap} (increase --cap to override)"
                    )
                index[nxt] = len(states)
                states.append(nxt)
                succ_lists.append(None)
                queue.append(index[nxt])
            row.append(index[nxt])
        succ_lists[i] = tuple(row)
    preds: list = [[] for _ in states]
    for i, row in enumerate(succ_lists):
        for j in row:
            preds[j].append(i)
    return ExpandedArena(
        arena=arena,
        states=states,
        succs=succ_lists,
        preds=[tuple(p) for p in preds],
        owner=[None if arena.is_terminal(v) else arena.owner[v] for v, _ in states],
        terminal=[arena.terminal_outcome.get(v) for v, _ in states],
        layer=[visited for _, visited in states],
    )


# ---------------------------------------------------------------------------
# GameView: adjacency snapshot the graph analyses run on


@dataclass
class GameView:
    """A (possibly edge-restricted, possibly relabeled) finite game graph.

    ``succs[i]`` is empty exactly at leaves; ``leaf[i]`` is the outcome a
    play gets on reaching leaf i; ``rule[i]`` is the outcome of an infinite
    play that finally settles in state i's layer.
    """

    n: int
    root: int
    succs: list
    leaf: list
    rule: list

    def is_leaf(self, i: int) -> bool:
        return self.leaf[i] is not None


def strongly_connected_components(n: int, succs) -> list:
    """Iterative Tarjan; returns SCCs as tuples of state indices."""
    index_counter = [0]
    stack: list = []
    lowlink = [-1] * n
    index = [-1] * n
    on_stack = [False] * n
    result = []

    for start in range(n):
        if index[start] != -1:
            continue
        work = [(start, 0)]
        while work:
            node, pi = work[-1]
            if pi == 0:
                index[node] = index_counter[0]
                lowlink[node] = index_counter[0]
                index_counter[0] += 1
                stack.append(node)
                on_stack[node] = True
            recurse = False
            row = succs[node]
            for offset in range(pi, len(row)):
                succ = row[offset]
                if index[succ] == -1:
                    work[-1] = (node, offset + 1)
                    work.append((succ, 0))
                    recurse = True
                    break
                if on_stack[succ]:
                    lowlink[node] = min(lowlink[node], index[succ])
            if recurse:
                continue
            if lowlink[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == node:
                        break
                result.append(tuple(sorted(comp)))
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[node])
    return result


def cycle_components(view: GameView, members=None) -> list:
    """SCCs that contain at least one cycle, optionally within a member set."""
    if members is None:
        members = range(view.n)
    member_set = set(members)
    remap = {s: k for k, s in enumerate(sorted(member_set))}
    back = sorted(member_set)
    succs = [
        tuple(remap[t] for t in view.succs[s] if t in member_set) for s in back
    ]
    comps = strongly_connected_components(len(back), succs)
    out = []
    for comp in comps:
        states = tuple(back[k] for k in comp)
        if len(states) > 1 or comp[0] in succs[comp[0]]:
            out.append(states)
    return out


def reachable_from(view: GameView, start: int, members=None) -> set:
    """States reachable from start along view edges, staying inside members."""
    member_set = None if members is None else set(members)
    if member_set is not None and start not in member_set:
        return set()
    seen = {start}
    queue = deque([start])
    while queue:
        s = queue.popleft()
        for t in view.succs[s]:
            if t in seen:
                continue
            if member_set is not None and t not in member_set:
                continue
            seen.add(t)
            queue.append(t)
    return seen


def achievable_sets(view: GameView) -> list:
    """Per-state outcome sets: leaf outcomes plus layer rules of settled cycles."""
    ach = [set() for _ in range(view.n)]
    for i in range(view.n):
        if view.leaf[i] is not None:
            ach[i].add(view.leaf[i])
    for comp in cycle_components(view):
        for s in comp:
            ach[s].add(view.rule[s])
    changed = True
    while changed:
        changed = False
        for i in range(view.n - 1, -1, -1):
            before = len(ach[i])
            for t in view.succs[i]:
                ach[i] |= ach[t]
            if len(ach[i]) != before:
                changed = True
    return [frozenset(a) for a in ach]


def pseudo_leaf_states(view: GameView, ach: list, x: str, preds=None) -> tuple:
    """States whose whole future is x, entered from a less determined state.

    A state qualifies if its achievable set is exactly {x} and it is the root,
    has no predecessor at all, or has some predecessor with a larger set.
    """
    if preds is None:
        preds = [[] for _ in range(view.n)]
        for i in range(view.n):
            for t in view.succs[i]:
                preds[t].append(i)
    target = frozenset([x])
    out = []
    for i in range(view.n):
        if ach[i] != target:
            continue
        if i == view.root or not preds[i] or any(ach[p] != target for p in preds[i]):
            out.append(i)
    return tuple(out)


def _undecided_states(view: GameView, ach: list) -> set:
    return {i for i in range(view.n) if len(ach[i]) >= 2}


def weak_stop(view: GameView, y: str, ach: list | None = None) -> bool:
    """Every infinite play that never passes a pseudo-leaf has outcome y."""
    if ach is None:
        ach = achievable_sets(view)
    undecided = _undecided_states(view, ach)
    if view.root not in undecided:
        return True
    region = reachable_from(view, view.root, undecided)
    for comp in cycle_components(view, region):
        if view.rule[comp[0]] != y:
            return False
    return True


def strong_stop(view: GameView, y: str, ach: list | None = None) -> bool:
    """Weak stop, plus: off every y-play one is already under a pseudo-leaf."""
    if ach is None:
        ach = achievable_sets(view)
    if not weak_stop(view, y, ach):
        return False
    undecided = _undecided_states(view, ach)
    if view.root not in undecided:
        return True
    region = reachable_from(view, view.root, undecided)
    return all(y in ach[s] for s in region)


CLASS_OPEN = "open"
CLASS_CLOSED = "closed"
CLASS_CLOPEN = "open-and-closed"
CLASS_OPEN_UNION_CLOSED = "open-union-closed"
CLASS_HIGHER = "higher"


@dataclass(frozen=True)
class OutcomeClassEntry:
    outcome: str
    classification: str
    open_witness: tuple = ()  # covering pseudo-leaf states when open
    closed_witness: tuple = ()  # safety region (x not achievable) when closed


def classify_play_set(view: GameView, x: str, ach: list | None = None) -> OutcomeClassEntry:
    """Place the x-play-set of the unfolding in {open, closed, both, o-u-c, higher}."""
    if ach is None:
        ach = achievable_sets(view)
    preds = [[] for _ in range(view.n)]
    for i in range(view.n):
        for t in view.succs[i]:
            preds[t].append(i)
    pls = pseudo_leaf_states(view, ach, x, preds)
    safety = tuple(i for i in range(view.n) if x not in ach[i])

    target = frozenset([x])
    if ach[view.root] == target:
        return OutcomeClassEntry(x, CLASS_CLOPEN, pls, safety)

    residual = {i for i in range(view.n) if ach[i] != target}
    res_region = reachable_from(view, view.root, residual)

    open_holds = all(
        view.rule[comp[0]] != x for comp in cycle_components(view, res_region)
    )

    closed_holds = True
    full_region = reachable_from(view, view.root)
    for comp in cycle_components(view, full_region):
        if view.rule[comp[0]] != x and x in ach[comp[0]]:
            closed_holds = False
            break

    if open_holds and closed_holds:
        return OutcomeClassEntry(x, CLASS_CLOPEN, pls, safety)
    if open_holds:
        return OutcomeClassEntry(x, CLASS_OPEN, pls, safety)
    if closed_holds:
        return OutcomeClassEntry(x, CLASS_CLOSED, pls, safety)

    # Residual view: delete the subtrees below x-pseudo-leaves, i.e. restrict
    # to states whose future is not yet all-x, and test the leftover x-set
    # for closedness there.
    res_view = GameView(
        n=view.n,
        root=view.root,
        succs=[
            tuple(t for t in view.succs[i] if t in residual) if i in residual else ()
            for i in range(view.n)
        ],
        leaf=[view.leaf[i] if i in residual else None for i in range(view.n)],
        rule=view.rule,
    )
    res_ach = achievable_sets(res_view)
    residual_closed = True
    for comp in cycle_components(res_view, res_region):
        if view.rule[comp[0]] != x and x in res_ach[comp[0]]:
            residual_closed = False
            break
    if residual_closed:
        return OutcomeClassEntry(x, CLASS_OPEN_UNION_CLOSED, pls, safety)
    return OutcomeClassEntry(x, CLASS_HIGHER, pls, safety)


# ---------------------------------------------------------------------------
# Public wrappers on ExpandedArena


def achievable_outcomes(expanded: ExpandedArena, state: int) -> frozenset:
    if expanded._achievable is None:
        expanded._achievable = achievable_sets(expanded.full_view())
    return expanded._achievable[state]


def all_achievable(expanded: ExpandedArena) -> list:
    if expanded._achievable is None:
        expanded._achievable = achievable_sets(expanded.full_view())
    return expanded._achievable


def pseudo_leaves(expanded: ExpandedArena, x: str) -> tuple:
    return pseudo_leaf_states(
        expanded.full_view(), all_achievable(expanded), x, expanded.preds
    )


def stop_nodes(expanded: ExpandedArena, player: str, x: str) -> tuple:
    pls = set(pseudo_leaves(expanded, x))
    return tuple(
        i
        for i in range(expanded.n)
        if expanded.owner[i] == player and any(t in pls for t in expanded.succs[i])
    )


def is_weak_stop(expanded: ExpandedArena, y: str) -> bool:
    return weak_stop(expanded.full_view(), y, all_achievable(expanded))


def is_strong_stop(expanded: ExpandedArena, y: str) -> bool:
    return strong_stop(expanded.full_view(), y, all_achievable(expanded))


def classify_outcome_set(expanded: ExpandedArena, x: str) -> OutcomeClassEntry:
    return classify_play_set(expanded.full_view(), x, all_achievable(expanded))


def classify_all_outcomes(expanded: ExpandedArena) -> dict:
    outcomes = sorted(expanded.arena.outcomes())
    return {x: classify_outcome_set(expanded, x) for x in outcomes}
