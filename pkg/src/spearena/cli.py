"""Command-line interface: game documents in, result documents out.

A game document is one JSON object::

    {
      "players": ["a", "b"],
      "outcomes": ["x", "y", "z"],
      "preferences": {
        "a": {"kind": "linear", "pairs": [["z", "y"], ["y", "x"]]},
        "b": {"kind": "linear", "pairs": [["x", "z"], ["z", "y"]]}
      },
      "arena": {
        "root": "A1",
        "vertices": [
          {"name": "A1", "owner": "a", "edges": ["Ty", "B1"]},
          {"name": "Ty", "outcome": "y"}
        ],
        "infinite_rule": {
          "cases": [{"when": {"op": "visited", "vertex": "B1"}, "outcome": "x"}],
          "default": "x"
        }
      }
    }

Formulas use {"op": "visited", "vertex": v}, {"op": "not", "arg": f} and
{"op": "and"/"or", "args": [...]} over the play's occurrence set.

Exit codes: 0 success, 2 rejection with witness, 3 unsupported combination,
4 input error, 5 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field

from . import fixtures, oracle, solver
from .arena import (
    And,
    Arena,
    ExpandedArena,
    InfiniteRule,
    Not,
    Or,
    RESERVED_PREFIX,
    Visited,
    classify_all_outcomes,
    expand,
    validate_arena,
)
from .errors import (
    EXIT_INPUT,
    EXIT_OK,
    EXIT_REJECTED,
    EXIT_RESOURCE,
    EXIT_UNSUPPORTED,
    InputError,
    ResourceCapError,
    SpearenaError,
    UnsupportedError,
)
from .prefs import (
    KINDS,
    OutcomeSet,
    PreferenceProfile,
    find_spe_killer,
    interval_partition,
    KillerPresentError,
    make_relation,
    validate_profile,
)
from .profiles import StrategyProfile, is_gp_spe, spe_violations, validate_profile as validate_strategy
from .solver import Rejection, SolveCertificate


@dataclass
class GameDocument:
    players: tuple
    outcomes: tuple
    profile: PreferenceProfile = field(compare=False)
    arena: Arena = field(compare=False)


class SchemaErrors:
    def __init__(self):
        self.errors: list = []

    def add(self, path: str, message: str):
        self.errors.append(f"{path}: {message}")

    def raise_if_any(self):
        if self.errors:
            raise InputError("; ".join(self.errors))


def _parse_formula(node, path: str, errs: SchemaErrors):
    if not isinstance(node, dict) or "op" not in node:
        errs.add(path, "formula must be an object with an 'op' field")
        return Visited("?")
    op = node["op"]
    if op == "visited":
        if "vertex" not in node:
            errs.add(path, "visited needs a 'vertex'")
            return Visited("?")
        return Visited(node["vertex"])
    if op == "not":
        return Not(_parse_formula(node.get("arg"), path + ".arg", errs))
    if op in ("and", "or"):
        args = node.get("args")
        if not isinstance(args, list):
            errs.add(path, f"'{op}' needs an 'args' list")
            return Visited("?")
        parsed = tuple(
            _parse_formula(a, f"{path}.args[{i}]", errs) for i, a in enumerate(args)
        )
        return And(parsed) if op == "and" else Or(parsed)
    errs.add(path, f"unknown formula op {op!r}")
    return Visited("?")


def _serialize_formula(f) -> dict:
    if isinstance(f, Visited):
        return {"op": "visited", "vertex": f.vertex}
    if isinstance(f, Not):
        return {"op": "not", "arg": _serialize_formula(f.arg)}
    if isinstance(f, And):
        return {"op": "and", "args": [_serialize_formula(a) for a in f.args]}
    if isinstance(f, Or):
        return {"op": "or", "args": [_serialize_formula(a) for a in f.args]}
    raise InputError(f"unknown formula node {f!r}")


def parse_game(text: str) -> GameDocument:
    """Parse and validate a game document; collects schema errors with paths."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    errs = SchemaErrors()
    if not isinstance(raw, dict):
        raise InputError("top level must be an object")

    players = raw.get("players")
    if not isinstance(players, list) or not players:
        errs.add("players", "must be a non-empty list")
        players = ["?"]
    outcomes = raw.get("outcomes")
    if not isinstance(outcomes, list) or not outcomes:
        errs.add("outcomes", "must be a non-empty list")
        outcomes = ["?"]
    for o in outcomes:
        if isinstance(o, str) and o.startswith(RESERVED_PREFIX):
            errs.add("outcomes", f"{o!r} uses the reserved prefix {RESERVED_PREFIX!r}")
    for p in players:
        if isinstance(p, str) and p.startswith(RESERVED_PREFIX):
            errs.add("players", f"{p!r} uses the reserved prefix {RESERVED_PREFIX!r}")

    prefs_raw = raw.get("preferences")
    relations = {}
    if not isinstance(prefs_raw, dict):
        errs.add("preferences", "must be an object keyed by player")
    else:
        for p in players:
            spec_rel = prefs_raw.get(p)
            if spec_rel is None:
                errs.add(f"preferences.{p}", "missing relation")
                relations[p] = make_relation([], "partial")
                continue
            kind = spec_rel.get("kind", "partial")
            if kind not in KINDS:
                errs.add(f"preferences.{p}.kind", f"unknown kind {kind!r}")
                kind = "partial"
            pairs = spec_rel.get("pairs", [])
            clean = []
            for i, pair in enumerate(pairs):
                if not (isinstance(pair, list) and len(pair) == 2):
                    errs.add(f"preferences.{p}.pairs[{i}]", "must be a [worse, better] pair")
                    continue
                for o in pair:
                    if o not in outcomes:
                        errs.add(
                            f"preferences.{p}.pairs[{i}]",
                            f"unknown outcome {o!r}",
                        )
                clean.append(tuple(pair))
            relations[p] = make_relation(clean, kind)
        for extra in sorted(set(prefs_raw) - set(players)):
            errs.add(f"preferences.{extra}", "relation for unknown player")

    arena_raw = raw.get("arena")
    vertices = []
    owner = {}
    edges = {}
    terminal = {}
    rule = InfiniteRule(cases=(), default=outcomes[0])
    root = "?"
    if not isinstance(arena_raw, dict):
        errs.add("arena", "must be an object")
    else:
        root = arena_raw.get("root", "?")
        vlist = arena_raw.get("vertices")
        if not isinstance(vlist, list) or not vlist:
            errs.add("arena.vertices", "must be a non-empty list")
            vlist = []
        names = set()
        for i, v in enumerate(vlist):
            path = f"arena.vertices[{i}]"
            if not isinstance(v, dict) or "name" not in v:
                errs.add(path, "must be an object with a 'name'")
                continue
            name = v["name"]
            if name in names:
                errs.add(path, f"duplicate vertex {name!r}")
            names.add(name)
            if name.startswith(RESERVED_PREFIX):
                errs.add(path, f"{name!r} uses the reserved prefix")
            vertices.append(name)
            if "outcome" in v:
                if v["outcome"] not in outcomes:
                    errs.add(path + ".outcome", f"unknown outcome {v['outcome']!r}")
                terminal[name] = v["outcome"]
                if v.get("edges"):
                    errs.add(path, "terminal vertex cannot have edges")
                edges[name] = ()
            else:
                if "owner" not in v:
                    errs.add(path, "non-terminal vertex needs an 'owner'")
                elif v["owner"] not in players:
                    errs.add(path + ".owner", f"unknown player {v['owner']!r}")
                else:
                    owner[name] = v["owner"]
                succs = v.get("edges")
                if not isinstance(succs, list) or not succs:
                    errs.add(path + ".edges", "non-terminal vertex needs a non-empty edge list")
                    succs = []
                edges[name] = tuple(succs)
        for name, succs in edges.items():
            for w in succs:
                if w not in names:
                    errs.add("arena.vertices", f"edge {name!r} -> {w!r} dangles")
        if root not in names:
            errs.add("arena.root", f"root {root!r} is not a vertex")
        rule_raw = arena_raw.get("infinite_rule")
        if not isinstance(rule_raw, dict) or "default" not in rule_raw:
            errs.add("arena.infinite_rule", "must be an object with a 'default'")
        else:
            if rule_raw["default"] not in outcomes:
                errs.add("arena.infinite_rule.default", "unknown outcome")
            cases = []
            for i, case in enumerate(rule_raw.get("cases", [])):
                path = f"arena.infinite_rule.cases[{i}]"
                if not isinstance(case, dict) or "when" not in case or "outcome" not in case:
                    errs.add(path, "case needs 'when' and 'outcome'")
                    continue
                if case["outcome"] not in outcomes:
                    errs.add(path + ".outcome", f"unknown outcome {case['outcome']!r}")
                formula = _parse_formula(case["when"], path + ".when", errs)
                for vert in _formula_vertices_safe(formula):
                    if vert not in names:
                        errs.add(path + ".when", f"unknown vertex {vert!r}")
                cases.append((formula, case["outcome"]))
            rule = InfiniteRule(cases=tuple(cases), default=rule_raw.get("default", outcomes[0]))
    errs.raise_if_any()

    arena = Arena(
        vertices=tuple(vertices),
        root=root,
        owner=owner,
        edges=edges,
        terminal_outcome=terminal,
        infinite_rule=rule,
    )
    validate_arena(arena)
    profile = PreferenceProfile(
        players=tuple(players),
        outcomes=OutcomeSet(tuple(outcomes)),
        relations=relations,
    )
    return GameDocument(
        players=tuple(players), outcomes=tuple(outcomes), profile=profile, arena=arena
    )


def _formula_vertices_safe(f) -> set:
    from .arena import formula_vertices

    try:
        return formula_vertices(f)
    except InputError:
        return set()


def serialize_game(doc: GameDocument) -> str:
    """Canonical text form; parse(serialize(doc)) reproduces doc."""
    raw = {
        "players": list(doc.players),
        "outcomes": list(doc.outcomes),
        "preferences": {
            p: {
                "kind": doc.profile.rel(p).kind,
                "pairs": sorted([list(pair) for pair in doc.profile.rel(p).pairs]),
            }
            for p in doc.players
        },
        "arena": {
            "root": doc.arena.root,
            "vertices": [
                (
                    {"name": v, "outcome": doc.arena.terminal_outcome[v]}
                    if doc.arena.is_terminal(v)
                    else {
                        "name": v,
                        "owner": doc.arena.owner[v],
                        "edges": list(doc.arena.successors(v)),
                    }
                )
                for v in doc.arena.vertices
            ],
            "infinite_rule": {
                "cases": [
                    {"when": _serialize_formula(f), "outcome": o}
                    for f, o in doc.arena.infinite_rule.cases
                ],
                "default": doc.arena.infinite_rule.default,
            },
        },
    }
    return json.dumps(raw, indent=2, sort_keys=False) + "\n"


# ---------------------------------------------------------------------------
# Result documents


def serialize_certificate(expanded: ExpandedArena, cert: SolveCertificate) -> dict:
    return {
        "mode": cert.mode,
        "profile": {
            "choices": {
                expanded.state_name(s): expanded.state_name(t)
                for s, t in sorted(cert.profile.choice.items())
            }
        },
        "induced": {
            expanded.state_name(s): o for s, o in sorted(cert.induced.items())
        },
        "root_outcome": cert.root_outcome(),
        "suitability": (
            None
            if cert.suitability is None
            else {expanded.state_name(s): n for s, n in sorted(cert.suitability.items())}
        ),
        "trace": [
            {"kind": t.kind, "location": t.location, "effect": t.effect}
            for t in cert.trace
        ],
    }


def parse_profile_document(expanded: ExpandedArena, text: str) -> StrategyProfile:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    choices = raw.get("profile", raw).get("choices") if isinstance(raw, dict) else None
    if not isinstance(choices, dict):
        raise InputError("profile document needs a 'choices' object")
    mapping = {}
    for sname, tname in choices.items():
        mapping[expanded.state_index(sname)] = expanded.state_index(tname)
    profile = StrategyProfile(choice=mapping)
    validate_strategy(expanded, profile)
    return profile


def emit(document: dict, stream=None) -> None:
    json.dump(document, stream or sys.stdout, indent=2, sort_keys=False)
    (stream or sys.stdout).write("\n")


def _result(verdict: str, started: float, **fields) -> dict:
    doc = {"verdict": verdict}
    doc.update(fields)
    doc["timing_seconds"] = round(time.time() - started, 6)
    return doc


# ---------------------------------------------------------------------------
# Commands


def cmd_analyze(doc: GameDocument, args, started: float) -> tuple:
    reports = {}
    from .prefs import validate_relation

    for p in doc.players:
        rep = validate_relation(doc.profile.rel(p), doc.profile.outcomes)
        reports[p] = {
            "kind": doc.profile.rel(p).kind,
            "valid": bool(rep),
            "violation": None if rep else {"axiom": rep.axiom, "witness": list(rep.witness)},
        }
    killer = find_spe_killer(doc.profile)
    partition = None
    partition_error = None
    if all(r["valid"] and r["kind"] == "linear" for r in reports.values()):
        try:
            part = interval_partition(doc.profile)
            partition = {
                "blocks": [list(b) for b in part.blocks],
                "orientation": {p: list(part.orientation[p]) for p in doc.players},
                "reference": part.reference,
            }
        except KillerPresentError as exc:
            partition_error = f"killer present: {exc.witness.as_tuple()}"
    return EXIT_OK, _result(
        "analyzed",
        started,
        relations=reports,
        killer=None if killer is None else list(killer.as_tuple()),
        partition=partition,
        partition_error=partition_error,
    )


def cmd_solve(doc: GameDocument, args, started: float) -> tuple:
    result = solver.solve(doc.arena, doc.profile, cap=args.cap)
    if isinstance(result, Rejection):
        return EXIT_REJECTED, _result(
            "rejected",
            started,
            reason=result.reason,
            witness=None if result.witness is None else list(result.witness.as_tuple()),
        )
    if args.mode == "gp-spe" and result.mode != "gp-spe":
        raise UnsupportedError(
            f"solver produced a {result.mode} certificate; a global-Pareto "
            "guarantee needs linear preferences"
        )
    expanded = expand(doc.arena, cap=args.cap)
    payload = serialize_certificate(expanded, result)
    if not args.trace:
        payload.pop("trace")
    return EXIT_OK, _result("solved", started, certificate=payload)


def cmd_verify(doc: GameDocument, args, started: float) -> tuple:
    expanded = expand(doc.arena, cap=args.cap)
    with open(args.profile, "r", encoding="utf-8") as handle:
        profile = parse_profile_document(expanded, handle.read())
    violations = spe_violations(expanded, profile, doc.profile)
    if violations:
        s, p, got, alt = violations[0]
        return EXIT_REJECTED, _result(
            "not-an-equilibrium",
            started,
            witness={
                "state": expanded.state_name(s),
                "player": p,
                "induced": got,
                "improvement": alt,
            },
            violations=len(violations),
        )
    if args.mode == "gp-spe" and not is_gp_spe(expanded, profile, doc.profile):
        return EXIT_REJECTED, _result(
            "not-global-pareto",
            started,
            detail="profile is a subgame perfect equilibrium but not global-Pareto",
        )
    return EXIT_OK, _result("valid", started, mode=args.mode)


def cmd_classify(doc: GameDocument, args, started: float) -> tuple:
    expanded = expand(doc.arena, cap=args.cap)
    table = {}
    for outcome, entry in classify_all_outcomes(expanded).items():
        table[outcome] = {
            "classification": entry.classification,
            "open_witness": [expanded.state_name(s) for s in entry.open_witness],
            "closed_witness": [expanded.state_name(s) for s in entry.closed_witness],
        }
    return EXIT_OK, _result("classified", started, outcomes=table)


def cmd_oracle(doc: GameDocument, args, started: float) -> tuple:
    if args.memory > 1:
        report = oracle.bounded_memory_search(
            doc.arena, doc.profile, args.memory, mode=args.mode_oracle, cap=args.cap
        )
    else:
        expanded = expand(doc.arena, cap=args.cap)
        report = oracle.exhaustive_search(
            expanded, doc.profile, mode=args.mode_oracle, cap=args.cap
        )
    return EXIT_OK, _result(
        "searched",
        started,
        profile_space=report.profile_space,
        memory_bound=report.memory_bound,
        scope=report.scope,
        counts=report.counts,
        exemplars={k: list(v) for k, v in report.exemplars.items()},
    )


def cmd_corpus(args, started: float) -> tuple:
    entries = []
    all_ok = True
    for entry in oracle.counterexample_corpus():
        ok, detail = oracle.run_corpus_entry(entry)
        all_ok &= ok
        entries.append(
            {
                "name": entry.name,
                "expected": entry.expected,
                "passed": ok,
                "detail": detail,
            }
        )
    verdict = "corpus-passed" if all_ok else "corpus-failed"
    return (EXIT_OK if all_ok else 1), _result(verdict, started, entries=entries)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spearena",
        description="Solve, verify and brute-force subgame perfect equilibria "
        "on finite game arenas.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_game=True):
        if needs_game:
            p.add_argument("game", help="path to a game document (JSON), '-' for stdin")
        p.add_argument("--cap", type=int, default=10**6, help="state/profile cap")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized suites")
        p.add_argument("--trace", action="store_true", help="include transformation traces")

    p = sub.add_parser("analyze", help="preference report: kinds, killer, partition")
    add_common(p)
    p = sub.add_parser("solve", help="construct an equilibrium certificate")
    add_common(p)
    p.add_argument("--mode", choices=["gp-spe", "spe"], default="spe")
    p = sub.add_parser("verify", help="check a supplied profile")
    add_common(p)
    p.add_argument("--profile", required=True, help="path to a profile document")
    p.add_argument("--mode", choices=["gp-spe", "spe"], default="spe")
    p = sub.add_parser("classify", help="topological classification of outcome play-sets")
    add_common(p)
    p = sub.add_parser("oracle", help="exhaustive positional / bounded-memory search")
    add_common(p)
    p.add_argument("--mode", dest="mode_oracle", choices=["ne", "spe", "gp-spe"], default="spe")
    p.add_argument("--memory", type=int, default=1, help="memory bound (1 = positional)")
    p = sub.add_parser("corpus", help="run the built-in counterexample corpus")
    add_common(p, needs_game=False)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.time()
    try:
        if args.command == "corpus":
            code, doc = cmd_corpus(args, started)
            emit(doc)
            return code
        if args.game == "-":
            text = sys.stdin.read()
        else:
            with open(args.game, "r", encoding="utf-8") as handle:
                text = handle.read()
        game = parse_game(text)
        handler = {
            "analyze": cmd_analyze,
            "solve": cmd_solve,
            "verify": cmd_verify,
            "classify": cmd_classify,
            "oracle": cmd_oracle,
        }[args.command]
        code, doc = handler(game, args, started)
        emit(doc)
        return code
    except UnsupportedError as exc:
        emit(_result("unsupported", started, reason=str(exc)))
        return EXIT_UNSUPPORTED
    except ResourceCapError as exc:
        emit(_result("resource-cap", started, reason=str(exc)))
        return EXIT_RESOURCE
    except InputError as exc:
        emit(_result("input-error", started, errors=str(exc).split("; ")))
        return EXIT_INPUT
    except FileNotFoundError as exc:
        emit(_result("input-error", started, errors=[str(exc)]))
        return EXIT_INPUT
    except SpearenaError as exc:
        emit(_result("error", started, reason=str(exc)))
        return 1


if __name__ == "__main__":
    sys.exit(main())
