"""Reduction: redex search up to structural congruence, stepping, substitution."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterator

from .spawn import InvalidBinding, independent, merge
from .syntax import (
    Branch, Close, Cut, Fwd, Input, Name, Output, Process, SelL, SelR, Spawn, SpawnBinding,
    Supply, Wait, all_names, alpha_key, free_names, rename, rename_apart, show,
)

RULES = (
    "red-comm-r", "red-comm-l", "red-unit-r", "red-unit-l", "red-case", "red-fwd-r",
    "red-fwd-l", "red-spawn", "red-spawn-r", "red-spawn-l", "red-spawn-merge",
)
COMM_RULES = frozenset(RULES[:7])
SPAWN_RULES = frozenset(RULES[7:])


class StaleRedex(ValueError):
    pass


@dataclass(frozen=True)
class Redex:
    rule: str
    path: tuple[int, ...]
    witness: tuple = ()
    result: Process | None = field(default=None, compare=False, repr=False)

    def to_json(self) -> dict:
        return {"rule": self.rule, "path": list(self.path),
                "congruence_witness": [[r, list(p)] for r, p in self.witness]}


# ---------------------------------------------------------------- positions


def subterm(p: Process, path) -> Process:
    for i in path:
        match p:
            case Cut(_, P, Q):
                p = (P, Q)[i]
            case Spawn(_, P):
                p = P
            case Output(_, _, P, Q) | Branch(_, P, Q):
                p = (P, Q)[i]
            case Input(_, _, P) | Wait(_, P) | SelL(_, P) | SelR(_, P):
                p = P
            case _:
                raise IndexError(path)
    return p


def replace_at(p: Process, path, new: Process) -> Process:
    if not path:
        return new
    i, rest = path[0], path[1:]
    match p:
        case Cut(x, P, Q):
            return Cut(x, replace_at(P, rest, new), Q) if i == 0 else Cut(x, P, replace_at(Q, rest, new))
        case Spawn(s, P):
            return Spawn(s, replace_at(P, rest, new))
        case Output(x, y, P, Q):
            return Output(x, y, replace_at(P, rest, new), Q) if i == 0 else Output(x, y, P, replace_at(Q, rest, new))
        case Branch(x, P, Q):
            return Branch(x, replace_at(P, rest, new), Q) if i == 0 else Branch(x, P, replace_at(Q, rest, new))
        case Input(x, y, P):
            return Input(x, y, replace_at(P, rest, new))
        case Wait(x, P):
            return Wait(x, replace_at(P, rest, new))
        case SelL(x, P):
            return SelL(x, replace_at(P, rest, new))
        case SelR(x, P):
            return SelR(x, replace_at(P, rest, new))
    raise IndexError(path)


def eval_positions(p: Process, prefix=()) -> Iterator[tuple[tuple, Process]]:
    """Evaluation-context addresses: through cuts (both sides) and spawns."""
    yield prefix, p
    match p:
        case Cut(_, P, Q):
            yield from eval_positions(P, prefix + (0,))
            yield from eval_positions(Q, prefix + (1,))
        case Spawn(_, P):
            yield from eval_positions(P, prefix + (0,))


def all_positions(p: Process, prefix=()) -> Iterator[tuple[tuple, Process]]:
    yield prefix, p
    match p:
        case Cut(_, P, Q) | Output(_, _, P, Q) | Branch(_, P, Q):
            yield from all_positions(P, prefix + (0,))
            yield from all_positions(Q, prefix + (1,))
        case Spawn(_, P) | Input(_, _, P) | Wait(_, P) | SelL(_, P) | SelR(_, P):
            yield from all_positions(P, prefix + (0,))


def spawn_depth(p: Process, path) -> int:
    """Number of spawn prefixes crossed on the way to path."""
    d = 0
    for i in path:
        if isinstance(p, Spawn):
            d += 1
        p = subterm(p, (i,))
    return d


# ---------------------------------------------------------------- congruence


def cong_rewrites_at(p: Process) -> Iterator[tuple[str, Process]]:
    match p:
        case Cut(x, P, Cut(y, Q, R)):
            fP = free_names(P)
            if y not in fP:
                if x not in free_names(Q):
                    yield "cong-assoc-l", Cut(y, Q, Cut(x, P, R))
                if x not in free_names(R):
                    yield "cong-assoc-r", Cut(y, Cut(x, P, Q), R)
    match p:
        case Cut(y, Cut(x, P, Q), R):
            if x not in free_names(R) and y not in free_names(P):
                yield "cong-assoc-r-inv", Cut(x, P, Cut(y, Q, R))
        case Spawn(s1, Spawn(s2, Q)):
            if independent(s1, s2) and s1 != s2:
                yield "cong-spawn-swap", Spawn(s2, Spawn(s1, Q))


def apply_rewrite(p: Process, rule: str, path) -> Process:
    node = subterm(p, path)
    for r, new in cong_rewrites_at(node):
        if r == rule:
            return replace_at(p, path, new)
    raise StaleRedex(f"{rule} does not apply at {list(path)}")


def congruence_class(p: Process, scope: str = "eval", limit: int = 20000) -> dict:
    """Map alpha-key -> (member, witness) for everything congruent to p.

    With scope="eval" rewrites happen only at evaluation-context positions,
    which is enough to expose every redex; scope="all" rewrites anywhere.
    """
    walk = eval_positions if scope == "eval" else all_positions
    start = alpha_key(p)
    seen = {start: (p, ())}
    queue = deque([(p, ())])
    while queue:
        q, wit = queue.popleft()
        for path, node in walk(q):
            for rule, new in cong_rewrites_at(node):
                r = replace_at(q, path, new)
                k = alpha_key(r)
                if k not in seen:
                    seen[k] = (r, wit + ((rule, path),))
                    if len(seen) > limit:
                        raise RuntimeError("congruence class exceeds limit")
                    queue.append((r, wit + ((rule, path),)))
    return seen


def congruent(p: Process, q: Process) -> bool:
    if alpha_key(p) == alpha_key(q):
        return True
    return alpha_key(q) in congruence_class(p, scope="all")


def class_key(p: Process, scope: str = "eval"):
    """A representative key of the congruence class of p."""
    return min(congruence_class(p, scope), key=repr)


# ---------------------------------------------------------------- substitution and renaming


def substitute(p: Process, x: Name, y: Name) -> Process:
    """Capture-avoiding renaming of free x to y."""
    if x == y:
        return p
    from .syntax import bound_names
    if y in bound_names(p):
        p = rename_apart(p, avoid={y})
    return rename(p, {x: y})


def indexed_renaming(p: Process, i: int, supply: Supply | None = None,
                     fixed: dict | None = None) -> tuple[Process, dict]:
    """Replace every free name by a fresh i-th copy; returns (P', map)."""
    if supply is None:
        supply = Supply.above(all_names(p))
    theta = dict(fixed or {})
    for a in sorted(free_names(p)):
        if a not in theta:
            theta[a] = supply.fresh(a)
    return rename(p, theta), theta


# ---------------------------------------------------------------- rules


def match_rules(node: Process, supply: Supply) -> Iterator[tuple[str, Process]]:
    match node:
        case Spawn(s1, Spawn(s2, P)):
            try:
                yield "red-spawn-merge", Spawn(merge(s1, s2), P)
            except InvalidBinding:
                pass
        case Cut(x, P, Q):
            yield from _cut_rules(x, P, Q, supply)


def _cut_rules(x, P, Q, supply):
    match P, Q:
        case Input(a, y, Q0), Output(b, y2, P1, P2) if a == x == b:
            yield "red-comm-r", Cut(x, Cut(y2, P1, rename(Q0, {y: y2})), P2)
        case Output(a, y2, P1, P2), Input(b, y, Q0) if a == x == b:
            yield "red-comm-l", Cut(x, P2, Cut(y2, P1, rename(Q0, {y: y2})))
        case Wait(a, Q0), Close(b) if a == x == b:
            yield "red-unit-r", Q0
        case Close(a), Wait(b, Q0) if a == x == b:
            yield "red-unit-l", Q0
        case SelL(a, P0), Branch(b, Ql, _) if a == x == b:
            yield "red-case", Cut(x, P0, Ql)
        case SelR(a, P0), Branch(b, _, Qr) if a == x == b:
            yield "red-case", Cut(x, P0, Qr)
    if isinstance(Q, Fwd) and Q.y == x and Q.x != x and Q.x not in free_names(P):
        yield "red-fwd-r", rename(P, {x: Q.x})
    if isinstance(P, Fwd) and P.x == x and P.y != x and P.y not in free_names(Q):
        yield "red-fwd-l", rename(Q, {x: P.y})
    if isinstance(Q, Spawn):
        s, Q0 = Q.binding, Q.P
        if x in s:
            res = _spawn_step(x, P, s, Q0, supply)
            if res is not None:
                yield "red-spawn", res
        else:
            yield "red-spawn-r", Spawn(s, Cut(x, P, Q0))
    if isinstance(P, Spawn) and x not in P.binding:
        yield "red-spawn-l", Spawn(P.binding, Cut(x, P.P, Q))


def _spawn_step(x, P, s, Q0, supply):
    copies = sorted(s[x])
    others = sorted(free_names(P) - {x})
    if any(z in s for z in others):
        return None  # the new binding would not be a function
    new_images = {z: [] for z in others}
    renamed = []
    for xi in copies:
        Pi, theta = indexed_renaming(P, 0, supply, fixed={x: xi})
        for z in others:
            new_images[z].append(theta[z])
        renamed.append((xi, Pi))
    body = Q0
    for xi, Pi in reversed(renamed):
        body = Cut(xi, Pi, body)
    s2 = {k: v for k, v in s.items() if k != x}
    s2.update(new_images)
    return Spawn(SpawnBinding(s2), body)


# ---------------------------------------------------------------- redexes and stepping


def redexes(p: Process, congruence: bool = True, modulo: str = "alpha",
            rules: frozenset | None = None) -> list[Redex]:
    """All redexes of p, each carrying its contractum.

    Redexes are matched at evaluation-context positions of every member of
    the congruence class of p.  Results equal modulo alpha (or, with
    modulo="congruence", modulo structural congruence) are collapsed.
    """
    members = congruence_class(p).values() if congruence else [(p, ())]
    out: list[Redex] = []
    seen = set()
    base_supply = Supply.above(all_names(p))
    for q, wit in members:
        for path, node in eval_positions(q):
            for rule, res in match_rules(node, base_supply):
                if rules is not None and rule not in rules:
                    continue
                full = rename_apart(replace_at(q, path, res), Supply(base_supply.next))
                base_supply.reserve(all_names(full))
                k = class_key(full) if modulo == "congruence" else alpha_key(full)
                if k in seen:
                    continue
                seen.add(k)
                out.append(Redex(rule, path, wit, full))
    return out


def step(p: Process, r: Redex, supply: Supply | None = None) -> Process:
    """Replay the congruence witness, then contract the redex at its path."""
    q = p
    for rule, path in r.witness:
        q = apply_rewrite(q, rule, path)
    if supply is None:
        supply = Supply.above(all_names(p))
    node = subterm(q, r.path)
    for rule, res in match_rules(node, supply):
        if rule == r.rule:
            return rename_apart(replace_at(q, r.path, res), supply)
    raise StaleRedex(f"{r.rule} does not match at {list(r.path)} of {show(q)}")


def is_normal(p: Process) -> bool:
    return not redexes(p)


def trace_record(i: int, r: Redex, before: Process, after: Process) -> dict:
    return {"step": i, "rule": r.rule, "path": list(r.path),
            "congruence_witness": [[w, list(pp)] for w, pp in r.witness],
            "before": show(before), "after": show(after)}


def reachable(p: Process, depth: int, limit: int = 5000) -> dict:
    """States reachable in at most ``depth`` steps, keyed by congruence class.

    Returns key -> (process, distance).
    """
    seen = {class_key(p): (p, 0)}
    frontier = [p]
    for d in range(1, depth + 1):
        nxt = []
        for q in frontier:
            for r in redexes(q, modulo="congruence"):
                k = class_key(r.result)
                if k not in seen:
                    seen[k] = (r.result, d)
                    nxt.append(r.result)
                    if len(seen) > limit:
                        raise RuntimeError("reduction graph exceeds limit")
        frontier = nxt
    return seen
