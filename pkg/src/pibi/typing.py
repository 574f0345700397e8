"""Type checking for processes: Δ ⊢ P :: x : A.

The checker is syntax directed.  The process constructor and the side of the
channel (provided or used) pick the rule family; the top connective of the
session type picks between the multiplicative and the additive rule.  The
type of a cut is not written in the process, so it starts as a unification
variable and gets fixed by the rules applied to the provider and the user.
Where the connective is still unknown the search tries both rules.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator

from .bunches import (
    COMMA, SEMI, Bunch, EmptyA, EmptyM, Leaf, bkey, canon, fill, ident, join, lookup,
    map_types, neighbourhoods, positions, positions_with_names, show_bunch, split,
    unit_positions,
)
from .spawn import BindingDerivation, binding_results
from .syntax import (
    Branch, Close, Conj, Cut, Disj, Fwd, Impl, Input, Name, OneA, OneM, Output, Process,
    SelL, SelR, Sep, Spawn, Type, Wait, Wand, free_names, show, show_type,
)

__all__ = ["Judgment", "Derivation", "TypeFailure", "check", "verify_derivation",
           "check_subject_reduction", "TVar"]


# ---------------------------------------------------------------- unification


@dataclass(frozen=True, repr=False)
class TVar(Type):
    id: int

    def __repr__(self):
        return f"?{self.id}"


def _show_tvar(self):
    return f"?{self.id}"


TVar.__str__ = _show_tvar

_BIN = (Sep, Wand, Conj, Impl, Disj)


def resolve(t: Type, s: dict) -> Type:
    while isinstance(t, TVar) and t.id in s:
        t = s[t.id]
    if isinstance(t, _BIN):
        return type(t)(resolve(t.left, s), resolve(t.right, s))
    return t


def _occurs(v: int, t: Type, s: dict) -> bool:
    t = resolve(t, s)
    if isinstance(t, TVar):
        return t.id == v
    if isinstance(t, _BIN):
        return _occurs(v, t.left, s) or _occurs(v, t.right, s)
    return False


def unify(a: Type, b: Type, s: dict) -> dict | None:
    a, b = resolve(a, s), resolve(b, s)
    if a == b:
        return s
    if isinstance(a, TVar):
        return None if _occurs(a.id, b, s) else {**s, a.id: b}
    if isinstance(b, TVar):
        return unify(b, a, s)
    if type(a) is type(b) and isinstance(a, _BIN):
        s2 = unify(a.left, b.left, s)
        return None if s2 is None else unify(a.right, b.right, s2)
    return None


def has_tvars(t: Type) -> bool:
    if isinstance(t, TVar):
        return True
    if isinstance(t, _BIN):
        return has_tvars(t.left) or has_tvars(t.right)
    return False


# ---------------------------------------------------------------- derivations


@dataclass(frozen=True)
class Judgment:
    bunch: Bunch
    process: Process
    channel: Name
    type: Type

    def __str__(self) -> str:
        return f"{show_bunch(self.bunch)} ⊢ {show(self.process)} :: {self.channel} : {show_type(self.type)}"


@dataclass
class Derivation:
    rule: str
    conclusion: Judgment
    premises: list[Derivation] = field(default_factory=list)
    binding: BindingDerivation | None = None
    # rule-specific data: the bunched context of a left rule or cut, the cut type
    context: Bunch | None = None
    cut_type: Type | None = None

    def __bool__(self) -> bool:
        return True

    def nodes(self) -> Iterator[Derivation]:
        yield self
        for p in self.premises:
            yield from p.nodes()

    def pretty(self, indent: int = 0) -> str:
        lines = ["  " * indent + f"{self.rule}: {self.conclusion}"]
        if self.binding is not None:
            for st in self.binding.steps:
                lines.append("  " * (indent + 1) + f"[{st}]")
        for p in self.premises:
            lines.append(p.pretty(indent + 1))
        return "\n".join(lines)

    def to_json(self) -> dict:
        out = {"rule": self.rule, "bunch": show_bunch(self.conclusion.bunch),
               "process": show(self.conclusion.process), "channel": str(self.conclusion.channel),
               "type": show_type(self.conclusion.type),
               "premises": [p.to_json() for p in self.premises]}
        if self.binding is not None:
            out["binding_steps"] = [str(st) for st in self.binding.steps]
        return out


@dataclass
class TypeFailure:
    judgment: Judgment
    rule: str
    reason: str
    depth: int = 0

    def __bool__(self) -> bool:
        return False

    def __str__(self) -> str:
        return f"{self.rule}: {self.reason}\n  at {self.judgment}"


# ---------------------------------------------------------------- search


class _Search:
    def __init__(self, limit: int):
        self.counter = itertools.count(1000)
        self.worst: TypeFailure | None = None
        self.budget = limit

    def fresh(self) -> TVar:
        return TVar(next(self.counter))

    def fail(self, depth, d, P, z, C, s, rule, reason):
        if self.worst is None or depth >= self.worst.depth:
            j = Judgment(_resolve_bunch(d, s), P, z, resolve(C, s))
            self.worst = TypeFailure(j, rule, reason, depth)

    def tick(self):
        self.budget -= 1
        if self.budget < 0:
            raise _Exhausted()

    def derive(self, d: Bunch, P: Process, z: Name, C: Type, s: dict, depth: int = 0):
        """Yield (derivation, substitution) for every way of typing P."""
        self.tick()
        d = canon(_resolve_bunch(d, s))
        names = ident(d)
        fn = free_names(P)
        if z in names or fn != names | {z}:
            self.fail(depth, d, P, z, C, s, "names",
                      f"free names {sorted(map(str, fn))} do not match the bunch and channel")
            return
        j = lambda: Judgment(d, P, z, C)  # noqa: E731
        Cr = resolve(C, s)
        match P:
            case Close(x) if x == z:
                for conn, unit, rule in ((OneM, EmptyM, "Emp-r"), (OneA, EmptyA, "True-r")):
                    s2 = unify(Cr, conn(), s)
                    if s2 is None:
                        continue
                    if d == unit():
                        yield Derivation(rule, j()), s2
                    else:
                        self.fail(depth, d, P, z, C, s, rule, f"bunch is not {show_bunch(unit())}")
                if not isinstance(Cr, (OneM, OneA, TVar)):
                    self.fail(depth, d, P, z, C, s, "Emp-r", f"close cannot provide {show_type(Cr)}")

            case Wait(x, P0) if x != z:
                T = resolve(lookup(d, x), s) if x in names else None
                for conn, unit, rule in ((OneM, EmptyM, "Emp-l"), (OneA, EmptyA, "True-l")):
                    if T is None:
                        break
                    s2 = unify(T, conn(), s)
                    if s2 is None:
                        continue
                    d2 = _replace_leaf(d, x, unit())
                    for sub, s3 in self.derive(d2, P0, z, C, s2, depth + 1):
                        yield Derivation(rule, j(), [sub], context=d2), s3
                if T is None or not isinstance(T, (OneM, OneA, TVar)):
                    self.fail(depth, d, P, z, C, s, "Emp-l", f"cannot wait on {x}")

            case Output(x, y, P1, P2) if x == z:
                want1 = free_names(P1) - {y}
                for conn, op, rule in ((Sep, SEMI, "Sep-r"), (Conj, COMMA, "Conj-r")):
                    A, B = self.fresh(), self.fresh()
                    s2 = unify(Cr, conn(A, B), s)
                    if s2 is None:
                        continue
                    for d1, d2 in split(d, op):
                        if ident(d1) != want1:
                            continue
                        for sub1, s3 in self.derive(d1, P1, y, A, s2, depth + 1):
                            for sub2, s4 in self.derive(d2, P2, x, B, s3, depth + 1):
                                yield Derivation(rule, j(), [sub1, sub2]), s4

            case Output(x, y, P1, P2):
                T = resolve(lookup(d, x), s) if x in names else None
                if T is None:
                    self.fail(depth, d, P, z, C, s, "Wand-l", f"{x} is not in the bunch")
                    return
                want1 = free_names(P1) - {y}
                for conn, op, rule in ((Wand, SEMI, "Wand-l"), (Impl, COMMA, "Impl-l")):
                    A, B = self.fresh(), self.fresh()
                    s2 = unify(T, conn(A, B), s)
                    if s2 is None:
                        continue
                    for ctx, d1, leaf in neighbourhoods(d, x, op):
                        if ident(d1) != want1:
                            continue
                        for sub1, s3 in self.derive(d1, P1, y, A, s2, depth + 1):
                            d2 = fill(ctx, Leaf(x, resolve(B, s3)))
                            for sub2, s4 in self.derive(d2, P2, z, C, s3, depth + 1):
                                yield Derivation(rule, j(), [sub1, sub2], context=ctx), s4
                if not isinstance(T, (Wand, Impl, TVar)):
                    self.fail(depth, d, P, z, C, s, "Wand-l", f"cannot output on {x} : {show_type(T)}")

            case Input(x, y, P0) if x == z:
                for conn, op, rule in ((Wand, SEMI, "Wand-r"), (Impl, COMMA, "Impl-r")):
                    A, B = self.fresh(), self.fresh()
                    s2 = unify(Cr, conn(A, B), s)
                    if s2 is None:
                        continue
                    d2 = join(op, [d, Leaf(y, A)])
                    for sub, s3 in self.derive(d2, P0, x, B, s2, depth + 1):
                        yield Derivation(rule, j(), [sub]), s3
                if not isinstance(Cr, (Wand, Impl, TVar)):
                    self.fail(depth, d, P, z, C, s, "Wand-r", f"input cannot provide {show_type(Cr)}")

            case Input(x, y, P0):
                T = resolve(lookup(d, x), s) if x in names else None
                if T is None:
                    self.fail(depth, d, P, z, C, s, "Sep-l", f"{x} is not in the bunch")
                    return
                for conn, op, rule in ((Sep, SEMI, "Sep-l"), (Conj, COMMA, "Conj-l")):
                    A, B = self.fresh(), self.fresh()
                    s2 = unify(T, conn(A, B), s)
                    if s2 is None:
                        continue
                    d2 = _replace_leaf(d, x, join(op, [Leaf(x, B), Leaf(y, A)]))
                    for sub, s3 in self.derive(d2, P0, z, C, s2, depth + 1):
                        yield Derivation(rule, j(), [sub]), s3
                if not isinstance(T, (Sep, Conj, TVar)):
                    self.fail(depth, d, P, z, C, s, "Sep-l", f"cannot input on {x} : {show_type(T)}")

            case SelL(x, P0) | SelR(x, P0) if x == z:
                left = isinstance(P, SelL)
                A, B = self.fresh(), self.fresh()
                s2 = unify(Cr, Disj(A, B), s)
                rule = "Disj-r-inl" if left else "Disj-r-inr"
                if s2 is None:
                    self.fail(depth, d, P, z, C, s, rule, f"selection cannot provide {show_type(Cr)}")
                    return
                for sub, s3 in self.derive(d, P0, z, A if left else B, s2, depth + 1):
                    yield Derivation(rule, j(), [sub]), s3

            case Branch(x, P1, P2) if x != z:
                T = resolve(lookup(d, x), s) if x in names else None
                A, B = self.fresh(), self.fresh()
                s2 = None if T is None else unify(T, Disj(A, B), s)
                if s2 is None:
                    self.fail(depth, d, P, z, C, s, "Disj-l", f"cannot branch on {x}")
                    return
                for sub1, s3 in self.derive(_replace_leaf(d, x, Leaf(x, A)), P1, z, C, s2, depth + 1):
                    for sub2, s4 in self.derive(_replace_leaf(d, x, Leaf(x, resolve(B, s3))), P2, z, C, s3, depth + 1):
                        yield Derivation("Disj-l", j(), [sub1, sub2]), s4

            case Fwd(a, b) if a == z:
                if isinstance(d, Leaf) and d.name == b:
                    s2 = unify(d.type, Cr, s)
                    if s2 is not None:
                        yield Derivation("Fwd", j()), s2
                        return
                self.fail(depth, d, P, z, C, s, "Fwd", f"bunch must be exactly {b} : {show_type(Cr)}")

            case Cut(x, P1, P2):
                A = self.fresh()
                want = free_names(P1) - {x}
                cands = [(ctx, sub) for ctx, sub in positions_with_names(d, frozenset(want))]
                if not want:
                    cands += [(ctx, EmptyM()) for ctx in unit_positions(d, SEMI)]
                    cands += [(ctx, EmptyA()) for ctx in unit_positions(d, COMMA)]
                seen = set()
                for ctx, sub in cands:
                    key = (bkey(ctx), bkey(sub))
                    if key in seen:
                        continue
                    seen.add(key)
                    for sub1, s2 in self.derive(sub, P1, x, A, s, depth + 1):
                        d2 = fill(ctx, Leaf(x, resolve(A, s2)))
                        for sub2, s3 in self.derive(d2, P2, z, C, s2, depth + 1):
                            yield Derivation("Cut", j(), [sub1, sub2], context=ctx, cut_type=A), s3

            case Spawn(sigma, P0):
                found = False
                for d2, steps in binding_results(sigma, d):
                    for sub, s2 in self.derive(d2, P0, z, C, s, depth + 1):
                        found = True
                        bd = BindingDerivation(sigma, d, d2, steps)
                        yield Derivation("Struct", j(), [sub], binding=bd), s2
                if not found:
                    self.fail(depth, d, P, z, C, s, "Struct", f"no binding derivation for {sigma} fits")

            case _:
                self.fail(depth, d, P, z, C, s, "syntax", "no rule applies to this process on this channel")


class _Exhausted(Exception):
    pass


def _replace_leaf(d: Bunch, x: Name, new: Bunch) -> Bunch:
    for ctx, leaf in positions(d, want=lambda b: isinstance(b, Leaf) and b.name == x,
                               prune=lambda c: x in ident(c)):
        return fill(ctx, new)
    raise KeyError(x)


def _resolve_bunch(d: Bunch, s: dict) -> Bunch:
    if not s:
        return d
    return map_types(d, lambda t: resolve(t, s))


def _finalize(der: Derivation, s: dict) -> Derivation:
    """Apply the final substitution everywhere; leftover variables become 1m."""
    leftovers = {}

    def ground(t):
        t = resolve(t, s)
        return _default(t, leftovers)

    def go(n: Derivation) -> Derivation:
        c = n.conclusion
        j = Judgment(canon(map_types(c.bunch, ground)), c.process, c.channel, ground(c.type))
        bd = None
        if n.binding is not None:
            b = n.binding
            steps = [type(st)(st.kind, st.binding, map_types(st.context, ground),
                              canon(map_types(st.before, ground)), canon(map_types(st.after, ground)),
                              st.copies) for st in b.steps]
            bd = BindingDerivation(b.binding, canon(map_types(b.source, ground)),
                                   canon(map_types(b.target, ground)), steps)
        ctx = None if n.context is None else map_types(n.context, ground)
        ct = None if n.cut_type is None else ground(n.cut_type)
        return Derivation(n.rule, j, [go(p) for p in n.premises], bd, ctx, ct)

    return go(der)


def _default(t: Type, leftovers: dict) -> Type:
    if isinstance(t, TVar):
        return OneM()
    if isinstance(t, _BIN):
        return type(t)(_default(t.left, leftovers), _default(t.right, leftovers))
    return t


def derivations(d: Bunch, P: Process, x: Name, A: Type, limit: int = 200000) -> Iterator[Derivation]:
    """Enumerate derivations of the judgment (possibly many)."""
    search = _Search(limit)
    try:
        for der, s in search.derive(canon(d), P, x, A, {}):
            yield _finalize(der, s)
    except _Exhausted:
        return


def check(d: Bunch, P: Process, x: Name, A: Type, limit: int = 200000) -> Derivation | TypeFailure:
    """Search for a derivation of d ⊢ P :: x : A."""
    search = _Search(limit)
    j = Judgment(canon(d), P, x, A)
    if x in ident(d):
        return TypeFailure(j, "names", f"{x} is both provided and used")
    if free_names(P) != ident(d) | {x}:
        return TypeFailure(j, "names", "free names of the process differ from the bunch and channel")
    try:
        for der, s in search.derive(canon(d), P, x, A, {}):
            return _finalize(der, s)
    except _Exhausted:
        return TypeFailure(j, "budget", "search budget exhausted", -1)
    return search.worst if search.worst is not None else TypeFailure(j, "search", "no rule applies")


def typable(d: Bunch, P: Process, x: Name, A: Type) -> bool:
    return bool(check(d, P, x, A))


# ---------------------------------------------------------------- independent verification


def verify_derivation(der: Derivation) -> bool:
    """Re-check every node of a derivation against its rule, without search."""
    try:
        _verify(der)
        return True
    except AssertionError:
        return False


def _leaf_in(d, x):
    return lookup(d, x)


def _verify(n: Derivation):
    c = n.conclusion
    d, P, z, C = canon(c.bunch), c.process, c.channel, c.type
    prem = n.premises
    pj = [p.conclusion for p in prem]
    for p in prem:
        _verify(p)
    assert free_names(P) == ident(d) | {z} and z not in ident(d)
    r = n.rule
    if r in ("Emp-r", "True-r"):
        unit, conn = (EmptyM, OneM) if r == "Emp-r" else (EmptyA, OneA)
        assert P == Close(z) and d == unit() and C == conn() and not prem
    elif r in ("Emp-l", "True-l"):
        unit, conn = (EmptyM, OneM) if r == "Emp-l" else (EmptyA, OneA)
        assert isinstance(P, Wait) and lookup(d, P.x) == conn()
        (q,) = pj
        assert q.process == P.P and q.channel == z and q.type == C
        assert canon(q.bunch) == _replace_leaf(d, P.x, unit())
    elif r in ("Sep-r", "Conj-r"):
        conn, op = (Sep, SEMI) if r == "Sep-r" else (Conj, COMMA)
        assert isinstance(P, Output) and P.x == z and isinstance(C, conn)
        q1, q2 = pj
        assert q1.process == P.P and q1.channel == P.y and q1.type == C.left
        assert q2.process == P.Q and q2.channel == z and q2.type == C.right
        assert canon(join(op, [q1.bunch, q2.bunch])) == d
    elif r in ("Wand-l", "Impl-l"):
        conn, op = (Wand, SEMI) if r == "Wand-l" else (Impl, COMMA)
        assert isinstance(P, Output) and P.x != z
        T = lookup(d, P.x)
        assert isinstance(T, conn)
        q1, q2 = pj
        assert q1.process == P.P and q1.channel == P.y and q1.type == T.left
        assert q2.process == P.Q and q2.channel == z and q2.type == C
        ctx = n.context
        assert fill(ctx, join(op, [q1.bunch, Leaf(P.x, T)])) == d
        assert fill(ctx, Leaf(P.x, T.right)) == canon(q2.bunch)
    elif r in ("Wand-r", "Impl-r"):
        conn, op = (Wand, SEMI) if r == "Wand-r" else (Impl, COMMA)
        assert isinstance(P, Input) and P.x == z and isinstance(C, conn)
        (q,) = pj
        assert q.process == P.P and q.channel == z and q.type == C.right
        assert canon(q.bunch) == join(op, [d, Leaf(P.y, C.left)])
    elif r in ("Sep-l", "Conj-l"):
        conn, op = (Sep, SEMI) if r == "Sep-l" else (Conj, COMMA)
        assert isinstance(P, Input) and P.x != z
        T = lookup(d, P.x)
        assert isinstance(T, conn)
        (q,) = pj
        assert q.process == P.P and q.channel == z and q.type == C
        assert canon(q.bunch) == _replace_leaf(d, P.x, join(op, [Leaf(P.x, T.right), Leaf(P.y, T.left)]))
    elif r in ("Disj-r-inl", "Disj-r-inr"):
        cls = SelL if r == "Disj-r-inl" else SelR
        assert isinstance(P, cls) and P.x == z and isinstance(C, Disj)
        (q,) = pj
        assert q.process == P.P and q.channel == z and canon(q.bunch) == d
        assert q.type == (C.left if cls is SelL else C.right)
    elif r == "Disj-l":
        assert isinstance(P, Branch)
        T = lookup(d, P.x)
        assert isinstance(T, Disj)
        q1, q2 = pj
        assert q1.process == P.P and q2.process == P.Q and q1.type == C == q2.type
        assert canon(q1.bunch) == _replace_leaf(d, P.x, Leaf(P.x, T.left))
        assert canon(q2.bunch) == _replace_leaf(d, P.x, Leaf(P.x, T.right))
    elif r == "Fwd":
        assert isinstance(P, Fwd) and P.x == z and d == Leaf(P.y, C) and not prem
    elif r == "Cut":
        assert isinstance(P, Cut)
        q1, q2 = pj
        A = q1.type
        assert q1.process == P.P and q1.channel == P.x
        assert q2.process == P.Q and q2.channel == z and q2.type == C
        ctx = n.context
        assert fill(ctx, q1.bunch) == d
        assert fill(ctx, Leaf(P.x, A)) == canon(q2.bunch)
    elif r == "Struct":
        assert isinstance(P, Spawn)
        (q,) = pj
        assert q.process == P.P and q.channel == z and q.type == C
        b = n.binding
        assert b is not None and b.binding == P.binding
        assert canon(b.source) == d and canon(b.target) == canon(q.bunch)
        assert b.replay() == canon(q.bunch)
        assert b.merged() == P.binding
        for st in b.steps:
            _verify_binding_step(st)
    else:
        raise AssertionError(f"unknown rule {r}")


def _verify_binding_step(st):
    from .bunches import rename_bunch
    ctx = st.context
    if st.kind == "weaken":
        assert all(not v for _, v in st.binding.items())
        # ctx(sub , 0a) ~> ctx(0a): sub is whatever fills the hole in `before`
        for sub in _hole_fillers(ctx, st.before):
            if ident(sub) == st.binding.dom and fill(ctx, EmptyA()) == canon(st.after):
                return
        raise AssertionError("bad weakening step")
    n = {len(v) for _, v in st.binding.items()}
    assert len(n) == 1 and 0 not in n
    for sub in _hole_fillers(ctx, st.before):
        if ident(sub) != st.binding.dom:
            continue
        copies = [rename_bunch(sub, th) for th in st.copies]
        if fill(ctx, join(COMMA, copies)) == canon(st.after):
            for th in st.copies:
                assert set(th) == st.binding.dom
            for x in st.binding.dom:
                assert {th[x] for th in st.copies} == st.binding[x]
            return
    raise AssertionError("bad contraction step")


def _hole_fillers(ctx, whole):
    for c2, sub in positions(whole):
        if bkey(canon(c2)) == bkey(canon(ctx)):
            yield sub
    for c2 in unit_positions(whole, SEMI):
        if bkey(canon(c2)) == bkey(canon(ctx)):
            yield EmptyM()


# ---------------------------------------------------------------- subject reduction


@dataclass
class SubjectReductionReport:
    judgment: Judgment
    states: int
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_subject_reduction(d: Bunch, P: Process, x: Name, A: Type, steps: int) -> SubjectReductionReport:
    """Explore the reduction graph to ``steps`` and re-check every state."""
    from .reduction import reachable

    states = reachable(P, steps)
    report = SubjectReductionReport(Judgment(d, P, x, A), len(states))
    for key, (Q, dist) in states.items():
        res = check(d, Q, x, A)
        if not res:
            report.violations.append((dist, Q, res))
    return report
