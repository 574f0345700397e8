"""The αλ-calculus: terms, typing, call-by-name reduction and the translation into πBI.

Terms have two function spaces: ``\\x.M`` binds a separated argument (typed
with ``-*``, applied by juxtaposition) and ``^x.M`` binds a shared one (typed
with ``->``, applied with ``@``).  Contexts are bunches, so weakening and
contraction are only available under ``,``.  The translation is directed by a
typing derivation: weakening and contraction nodes become spawn prefixes.
"""

from __future__ import annotations

import itertools
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterator

from .bunches import (
    COMMA, SEMI, Bunch, CommaJoin, EmptyA, EmptyM, Leaf, bkey, canon, comma, fill, ident,
    map_types, positions, positions_with_names, rename_bunch, semi, show_bunch, split,
    unit_positions,
)
from .reduction import class_key, congruence_class, redexes
from .syntax import (
    Branch, Close, Conj, Cut, Disj, Fwd, Impl, Input, Name, OneA, OneM, Output, ParseError,
    Process, SelL, SelR, Sep, Spawn, SpawnBinding, Supply, Type, Wait, Wand, all_names,
    is_barendregt, name, rename, rename_apart, show, show_type,
)
from .typing import TVar, check, resolve, unify

__all__ = [
    "Term", "Var", "LamWand", "LamImpl", "AppWand", "AppImpl", "UnitM", "UnitA", "LetUnitM",
    "LetUnitA", "PairSep", "PairConj", "LetPairSep", "Proj", "Inj", "Case",
    "parse_term", "show_term", "fv", "subst", "rename_term", "barendregt", "term_key",
    "term_alpha_eq", "term_size", "cbn_step", "cbn_step_rule", "full_step", "full_reachable", "TermJudgment", "TermDerivation", "TermTypeFailure",
    "typecheck_term", "translate", "TranslationError", "SubliftState", "SubliftFailure",
    "sublift_check", "lifted_terms", "DiagramReport", "completeness_harness",
    "soundness_harness",
]


# ---------------------------------------------------------------- terms


class Term:
    __slots__ = ()

    def __str__(self) -> str:
        return show_term(self)


@dataclass(frozen=True, repr=False)
class Var(Term):
    x: Name


@dataclass(frozen=True, repr=False)
class LamWand(Term):
    x: Name
    M: Term


@dataclass(frozen=True, repr=False)
class LamImpl(Term):
    x: Name
    M: Term


@dataclass(frozen=True, repr=False)
class AppWand(Term):
    M: Term
    N: Term


@dataclass(frozen=True, repr=False)
class AppImpl(Term):
    M: Term
    N: Term


@dataclass(frozen=True, repr=False)
class UnitM(Term):
    pass


@dataclass(frozen=True, repr=False)
class UnitA(Term):
    pass


@dataclass(frozen=True, repr=False)
class LetUnitM(Term):
    M: Term
    N: Term


@dataclass(frozen=True, repr=False)
class LetUnitA(Term):
    M: Term
    N: Term


@dataclass(frozen=True, repr=False)
class PairSep(Term):
    M: Term
    N: Term


@dataclass(frozen=True, repr=False)
class PairConj(Term):
    M: Term
    N: Term


@dataclass(frozen=True, repr=False)
class LetPairSep(Term):
    x: Name
    y: Name
    M: Term
    N: Term


@dataclass(frozen=True, repr=False)
class Proj(Term):
    i: int
    M: Term


@dataclass(frozen=True, repr=False)
class Inj(Term):
    i: int
    M: Term


@dataclass(frozen=True, repr=False)
class Case(Term):
    M: Term
    x1: Name
    N1: Term
    x2: Name
    N2: Term


for _cls in (Var, LamWand, LamImpl, AppWand, AppImpl, UnitM, UnitA, LetUnitM, LetUnitA,
             PairSep, PairConj, LetPairSep, Proj, Inj, Case):
    _cls.__repr__ = lambda self: f"<{show_term(self)}>"


def _atomic(t: Term) -> bool:
    return isinstance(t, (Var, UnitM, UnitA, PairSep, PairConj))


def _paren(t: Term) -> str:
    return show_term(t) if _atomic(t) else f"({show_term(t)})"


def show_term(t: Term) -> str:
    match t:
        case Var(x):
            return str(x)
        case UnitM():
            return "*m"
        case UnitA():
            return "*a"
        case LamWand(x, M):
            return f"\\{x}.{show_term(M)}"
        case LamImpl(x, M):
            return f"^{x}.{show_term(M)}"
        case AppWand(M, N) | AppImpl(M, N):
            left = show_term(M) if isinstance(M, (Var, AppWand, AppImpl)) or _atomic(M) else f"({show_term(M)})"
            sep = " " if isinstance(t, AppWand) else " @ "
            return f"{left}{sep}{_paren(N)}"
        case LetUnitM(M, N):
            return f"let *m = {show_term(M)} in {show_term(N)}"
        case LetUnitA(M, N):
            return f"let *a = {show_term(M)} in {show_term(N)}"
        case PairSep(M, N):
            return f"<{show_term(M)}, {show_term(N)}>"
        case PairConj(M, N):
            return f"({show_term(M)}, {show_term(N)})"
        case LetPairSep(x, y, M, N):
            return f"let <{x}, {y}> = {show_term(M)} in {show_term(N)}"
        case Proj(i, M):
            return f"pi{i} {_paren(M)}"
        case Inj(i, M):
            return f"inj{i} {_paren(M)}"
        case Case(M, x1, N1, x2, N2):
            return f"case {show_term(M)} {{ {x1} -> {show_term(N1)} ; {x2} -> {show_term(N2)} }}"
    raise TypeError(t)


# ---------------------------------------------------------------- parsing

_TERM_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|--[^\n]*)
  | (?P<unit>\*m|\*a)(?![A-Za-z0-9_'])
  | (?P<id>[A-Za-z_][A-Za-z0-9_']*(?:\#[0-9]+)?)
  | (?P<op>->|[\\^.@<>(),{};=])
    """,
    re.VERBOSE,
)

TERM_KEYWORDS = {"let", "in", "case", "pi1", "pi2", "inj1", "inj2"}


class _Stream:
    def __init__(self, text: str):
        self.toks: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TERM_TOKEN.match(text, pos)
            if not m:
                raise ParseError(f"unexpected character {text[pos]!r} at offset {pos}")
            if m.lastgroup != "ws":
                self.toks.append((m.lastgroup, m.group(), pos))
            pos = m.end()
        self.toks.append(("eof", "", pos))
        self.i = 0

    @property
    def peek(self) -> tuple[str, str, int]:
        return self.toks[self.i]

    def error(self, msg: str) -> ParseError:
        kind, text, pos = self.peek
        return ParseError(f"{msg} (found {text or 'end of input'!r} at offset {pos})")

    def accept(self, text: str) -> bool:
        kind, t, _ = self.peek
        if kind != "eof" and t == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> None:
        if not self.accept(text):
            raise self.error(f"expected {text!r}")

    def ident(self) -> Name:
        kind, t, _ = self.peek
        if kind != "id" or t in TERM_KEYWORDS:
            raise self.error("expected a variable")
        self.i += 1
        return name(t)


def _starts_term(s: _Stream) -> bool:
    kind, t, _ = s.peek
    if kind in ("id", "unit"):
        return t != "in"
    return t in ("\\", "^", "(", "<")


def _term(s: _Stream) -> Term:
    kind, t, _ = s.peek
    if s.accept("\\") or s.accept("^"):
        x = s.ident()
        s.expect(".")
        body = _term(s)
        return LamWand(x, body) if t == "\\" else LamImpl(x, body)
    if kind == "id" and t == "let":
        s.i += 1
        if s.accept("<"):
            x = s.ident()
            s.expect(",")
            y = s.ident()
            s.expect(">")
            s.expect("=")
            M = _term(s)
            s.expect("in")
            return LetPairSep(x, y, M, _term(s))
        kind2, u, _ = s.peek
        if kind2 != "unit":
            raise s.error("expected '<', '*m' or '*a' after let")
        s.i += 1
        s.expect("=")
        M = _term(s)
        s.expect("in")
        N = _term(s)
        return LetUnitM(M, N) if u == "*m" else LetUnitA(M, N)
    if kind == "id" and t == "case":
        s.i += 1
        M = _term(s)
        s.expect("{")
        x1 = s.ident()
        s.expect("->")
        N1 = _term(s)
        s.expect(";")
        x2 = s.ident()
        s.expect("->")
        N2 = _term(s)
        s.expect("}")
        return Case(M, x1, N1, x2, N2)
    return _application(s)


def _application(s: _Stream) -> Term:
    t = _unary(s)
    while True:
        if s.accept("@"):
            t = AppImpl(t, _arg(s))
        elif _starts_term(s) or s.peek[1] in ("let", "case", "pi1", "pi2", "inj1", "inj2"):
            t = AppWand(t, _arg(s))
        else:
            return t


def _arg(s: _Stream) -> Term:
    kind, t, _ = s.peek
    if t in ("\\", "^", "let", "case"):
        return _term(s)
    return _unary(s)


def _unary(s: _Stream) -> Term:
    kind, t, _ = s.peek
    if kind == "id" and t in ("pi1", "pi2", "inj1", "inj2"):
        s.i += 1
        M = _unary(s)
        return Proj(int(t[-1]), M) if t.startswith("pi") else Inj(int(t[-1]), M)
    return _atom(s)


def _atom(s: _Stream) -> Term:
    kind, t, _ = s.peek
    if kind == "unit":
        s.i += 1
        return UnitM() if t == "*m" else UnitA()
    if kind == "id" and t not in TERM_KEYWORDS:
        return Var(s.ident())
    if s.accept("("):
        M = _term(s)
        if s.accept(","):
            N = _term(s)
            s.expect(")")
            return PairConj(M, N)
        s.expect(")")
        return M
    if s.accept("<"):
        M = _term(s)
        s.expect(",")
        N = _term(s)
        s.expect(">")
        return PairSep(M, N)
    raise s.error("expected a term")


def parse_term(text: str, *, hygiene: bool = True) -> Term:
    """Parse a term; with hygiene, bound variables are renamed apart from each other and fv."""
    s = _Stream(text)
    t = _term(s)
    if s.peek[0] != "eof":
        raise s.error("trailing input")
    return barendregt(t) if hygiene else t


# ---------------------------------------------------------------- variables and substitution


def fv(t: Term) -> frozenset[Name]:
    match t:
        case Var(x):
            return frozenset({x})
        case UnitM() | UnitA():
            return frozenset()
        case LamWand(x, M) | LamImpl(x, M):
            return fv(M) - {x}
        case AppWand(M, N) | AppImpl(M, N) | LetUnitM(M, N) | LetUnitA(M, N) | PairSep(M, N) | PairConj(M, N):
            return fv(M) | fv(N)
        case LetPairSep(x, y, M, N):
            return fv(M) | (fv(N) - {x, y})
        case Proj(_, M) | Inj(_, M):
            return fv(M)
        case Case(M, x1, N1, x2, N2):
            return fv(M) | (fv(N1) - {x1}) | (fv(N2) - {x2})
    raise TypeError(t)


def term_names(t: Term) -> set[Name]:
    """Every variable occurring in t, bound or free."""
    match t:
        case Var(x):
            return {x}
        case UnitM() | UnitA():
            return set()
        case LamWand(x, M) | LamImpl(x, M):
            return {x} | term_names(M)
        case AppWand(M, N) | AppImpl(M, N) | LetUnitM(M, N) | LetUnitA(M, N) | PairSep(M, N) | PairConj(M, N):
            return term_names(M) | term_names(N)
        case LetPairSep(x, y, M, N):
            return {x, y} | term_names(M) | term_names(N)
        case Proj(_, M) | Inj(_, M):
            return term_names(M)
        case Case(M, x1, N1, x2, N2):
            return {x1, x2} | term_names(M) | term_names(N1) | term_names(N2)
    raise TypeError(t)


def subst(t: Term, sigma: dict[Name, Term], supply: Supply | None = None) -> Term:
    """Capture-avoiding simultaneous substitution."""
    if not sigma:
        return t
    if supply is None:
        pool = set(term_names(t))
        for v in sigma.values():
            pool |= term_names(v)
        supply = Supply.above(pool | set(sigma))
    danger = frozenset().union(*(fv(v) for v in sigma.values()))

    def binder(x: Name, sig: dict) -> tuple[Name, dict]:
        sig = {k: v for k, v in sig.items() if k != x}
        if x in danger:
            x2 = supply.fresh(x)
            return x2, {**sig, x: Var(x2)}
        return x, sig

    def go(t: Term, sig: dict) -> Term:
        if not sig:
            return t
        match t:
            case Var(x):
                return sig.get(x, t)
            case UnitM() | UnitA():
                return t
            case LamWand(x, M) | LamImpl(x, M):
                x2, s2 = binder(x, sig)
                return type(t)(x2, go(M, s2))
            case AppWand(M, N) | AppImpl(M, N) | LetUnitM(M, N) | LetUnitA(M, N) | PairSep(M, N) | PairConj(M, N):
                return type(t)(go(M, sig), go(N, sig))
            case LetPairSep(x, y, M, N):
                x2, s2 = binder(x, sig)
                y2, s3 = binder(y, s2)
                return LetPairSep(x2, y2, go(M, sig), go(N, s3))
            case Proj(i, M) | Inj(i, M):
                return type(t)(i, go(M, sig))
            case Case(M, x1, N1, x2, N2):
                y1, s1 = binder(x1, sig)
                y2, s2 = binder(x2, sig)
                return Case(go(M, sig), y1, go(N1, s1), y2, go(N2, s2))
        raise TypeError(t)

    return go(t, dict(sigma))


def rename_term(t: Term, theta: dict[Name, Name]) -> Term:
    return subst(t, {k: Var(v) for k, v in theta.items() if k != v})


def barendregt(t: Term, supply: Supply | None = None) -> Term:
    """Rename binders so that they are pairwise distinct and distinct from fv(t)."""
    supply = supply or Supply.above(term_names(t))
    used = set(fv(t))

    def bind(x: Name, env: dict) -> tuple[Name, dict]:
        if x in used:
            x2 = supply.fresh(x)
        else:
            x2 = x
        used.add(x2)
        return x2, {**env, x: x2}

    def go(t: Term, env: dict) -> Term:
        match t:
            case Var(x):
                return Var(env.get(x, x))
            case UnitM() | UnitA():
                return t
            case LamWand(x, M) | LamImpl(x, M):
                x2, e2 = bind(x, env)
                return type(t)(x2, go(M, e2))
            case AppWand(M, N) | AppImpl(M, N) | LetUnitM(M, N) | LetUnitA(M, N) | PairSep(M, N) | PairConj(M, N):
                return type(t)(go(M, env), go(N, env))
            case LetPairSep(x, y, M, N):
                M2 = go(M, env)
                x2, e2 = bind(x, env)
                y2, e3 = bind(y, e2)
                return LetPairSep(x2, y2, M2, go(N, e3))
            case Proj(i, M) | Inj(i, M):
                return type(t)(i, go(M, env))
            case Case(M, x1, N1, x2, N2):
                M2 = go(M, env)
                y1, e1 = bind(x1, env)
                b1 = go(N1, e1)
                y2, e2 = bind(x2, env)
                return Case(M2, y1, b1, y2, go(N2, e2))
        raise TypeError(t)

    return go(t, {})


_FLAVOUR = {LamImpl: LamWand, AppImpl: AppWand, PairConj: PairSep, LetUnitA: LetUnitM, UnitA: UnitM}


def term_key(t: Term, erase: bool = False):
    """Hashable key equal for alpha-equivalent terms.

    With ``erase`` the two flavours of binder, application, pair, unit and
    unit elimination are identified; the type decides between them.
    """

    def tag(t):
        c = type(t)
        if erase:
            c = _FLAVOUR.get(c, c)
        return c.__name__

    def go(t, env, depth):
        match t:
            case Var(x):
                return ("v", env.get(x, str(x)))
            case UnitM() | UnitA():
                return (tag(t),)
            case LamWand(x, M) | LamImpl(x, M):
                return (tag(t), go(M, {**env, x: depth}, depth + 1))
            case AppWand(M, N) | AppImpl(M, N) | LetUnitM(M, N) | LetUnitA(M, N) | PairSep(M, N) | PairConj(M, N):
                return (tag(t), go(M, env, depth), go(N, env, depth))
            case LetPairSep(x, y, M, N):
                return (tag(t), go(M, env, depth), go(N, {**env, x: depth, y: depth + 1}, depth + 2))
            case Proj(i, M) | Inj(i, M):
                return (tag(t), i, go(M, env, depth))
            case Case(M, x1, N1, x2, N2):
                return (tag(t), go(M, env, depth), go(N1, {**env, x1: depth}, depth + 1),
                        go(N2, {**env, x2: depth}, depth + 1))
        raise TypeError(t)

    return go(t, {}, 0)


def term_alpha_eq(a: Term, b: Term) -> bool:
    return term_key(a) == term_key(b)


def term_size(t: Term) -> int:
    return sum(1 for _ in _subterms(t))


def _subterms(t: Term) -> Iterator[Term]:
    yield t
    for c in _children(t):
        yield from _subterms(c)


def _children(t: Term) -> tuple[Term, ...]:
    match t:
        case LamWand(_, M) | LamImpl(_, M) | Proj(_, M) | Inj(_, M):
            return (M,)
        case AppWand(M, N) | AppImpl(M, N) | LetUnitM(M, N) | LetUnitA(M, N) | PairSep(M, N) | PairConj(M, N) | LetPairSep(_, _, M, N):
            return (M, N)
        case Case(M, _, N1, _, N2):
            return (M, N1, N2)
    return ()


def _with_children(t: Term, cs: tuple[Term, ...]) -> Term:
    match t:
        case LamWand(x, _) | LamImpl(x, _):
            return type(t)(x, cs[0])
        case Proj(i, _) | Inj(i, _):
            return type(t)(i, cs[0])
        case AppWand() | AppImpl() | LetUnitM() | LetUnitA() | PairSep() | PairConj():
            return type(t)(cs[0], cs[1])
        case LetPairSep(x, y, _, _):
            return LetPairSep(x, y, cs[0], cs[1])
        case Case(_, x1, _, x2, _):
            return Case(cs[0], x1, cs[1], x2, cs[2])
    return t


# ---------------------------------------------------------------- reduction


def _primitive(t: Term) -> tuple[str, Term] | None:
    """The primitive reduction at the root of t, if any."""
    match t:
        case AppWand(LamWand(x, M), N):
            return "beta-wand", subst(M, {x: N})
        case AppImpl(LamImpl(x, M), N):
            return "beta-impl", subst(M, {x: N})
        case Proj(i, PairConj(M1, M2)):
            return "proj", M1 if i == 1 else M2
        case LetUnitM(UnitM(), N):
            return "unit-m", N
        case LetUnitA(UnitA(), N):
            return "unit-a", N
        case LetPairSep(x, y, PairSep(M1, M2), N):
            return "pair", subst(N, {x: M1, y: M2})
        case Case(Inj(i, M), x1, N1, x2, N2):
            return "case", subst(N1, {x1: M}) if i == 1 else subst(N2, {x2: M})
    return None


def _head_index(t: Term) -> int | None:
    """Which child is in head position for call-by-name lifting."""
    match t:
        case AppWand() | AppImpl() | LetUnitM() | LetUnitA() | LetPairSep() | Proj() | Case():
            return 0
    return None


def cbn_step_rule(t: Term) -> tuple[str, Term] | None:
    prim = _primitive(t)
    if prim is not None:
        return prim
    i = _head_index(t)
    if i is None:
        return None
    cs = _children(t)
    sub = cbn_step_rule(cs[i])
    if sub is None:
        return None
    return sub[0], _with_children(t, cs[:i] + (sub[1],) + cs[i + 1:])


def cbn_step(t: Term) -> list[Term]:
    """Call-by-name reducts of t (at most one: the strategy is deterministic)."""
    r = cbn_step_rule(t)
    return [] if r is None else [r[1]]


def full_step(t: Term) -> list[Term]:
    """One primitive reduction at any position, under binders included."""
    out = []
    prim = _primitive(t)
    if prim is not None:
        out.append(prim[1])
    cs = _children(t)
    for i, c in enumerate(cs):
        for c2 in full_step(c):
            out.append(_with_children(t, cs[:i] + (c2,) + cs[i + 1:]))
    return out


def full_reachable(t: Term, limit: int = 2000) -> dict:
    """Terms reachable by full_step, keyed by flavour-erased alpha key."""
    seen = {term_key(t, erase=True): t}
    todo = deque([t])
    while todo and len(seen) < limit:
        for u in full_step(todo.popleft()):
            k = term_key(u, erase=True)
            if k not in seen:
                seen[k] = u
                todo.append(u)
    return seen


# ---------------------------------------------------------------- typing


@dataclass(frozen=True)
class TermJudgment:
    bunch: Bunch
    term: Term
    type: Type

    def __str__(self) -> str:
        return f"{show_bunch(self.bunch)} ⊢ {show_term(self.term)} : {show_type(self.type)}"


@dataclass
class TermDerivation:
    rule: str
    conclusion: TermJudgment
    premises: list[TermDerivation] = field(default_factory=list)
    # N-W and N-C: the context and the sub-bunch acted on; N-C also the two copy renamings
    context: Bunch | None = None
    sub: Bunch | None = None
    copies: tuple[dict, dict] | None = None

    def __bool__(self) -> bool:
        return True

    def nodes(self) -> Iterator[TermDerivation]:
        yield self
        for p in self.premises:
            yield from p.nodes()

    def pretty(self, indent: int = 0) -> str:
        lines = ["  " * indent + f"{self.rule}: {self.conclusion}"]
        for p in self.premises:
            lines.append(p.pretty(indent + 1))
        return "\n".join(lines)

    def to_json(self) -> dict:
        c = self.conclusion
        return {"rule": self.rule, "bunch": show_bunch(c.bunch), "term": show_term(c.term),
                "type": show_type(c.type), "premises": [p.to_json() for p in self.premises]}


@dataclass
class TermTypeFailure:
    judgment: TermJudgment
    rule: str
    reason: str
    depth: int = 0

    def __bool__(self) -> bool:
        return False

    def __str__(self) -> str:
        return f"{self.rule}: {self.reason}\n  at {self.judgment}"


class _Exhausted(Exception):
    pass


def _resolve_bunch(d: Bunch, s: dict) -> Bunch:
    return map_types(d, lambda t: resolve(t, s)) if s else d


def _name_free(b: Bunch) -> bool:
    return not ident(b)


class _TermSearch:
    def __init__(self, supply: Supply, limit: int):
        self.supply = supply
        self.counter = itertools.count(1)
        self.budget = limit
        self.worst: TermTypeFailure | None = None

    def fresh(self) -> TVar:
        return TVar(next(self.counter))

    def fail(self, depth, d, M, A, s, rule, reason):
        if self.worst is None or depth >= self.worst.depth:
            self.worst = TermTypeFailure(TermJudgment(_resolve_bunch(d, s), M, resolve(A, s)),
                                         rule, reason, depth)

    def derive(self, d: Bunch, M: Term, A: Type, s: dict, depth: int = 0):
        self.budget -= 1
        if self.budget < 0:
            raise _Exhausted()
        d = canon(_resolve_bunch(d, s))
        names = ident(d)
        free = fv(M)
        j = lambda: TermJudgment(d, M, A)  # noqa: E731
        if not free <= names:
            self.fail(depth, d, M, A, s, "scope", f"free variables {sorted(map(str, free - names))} not in the context")
            return
        if names - free:
            yield from self._weaken(d, M, A, s, depth, free, j)
            return
        Ar = resolve(A, s)
        match M:
            case Var(x):
                if isinstance(d, CommaJoin):
                    yield from self._drop_units(d, M, A, s, depth, j, keep=None)
                    return
                if isinstance(d, Leaf) and d.name == x:
                    s2 = unify(d.type, Ar, s)
                    if s2 is not None:
                        yield TermDerivation("N-id", j()), s2
                    else:
                        self.fail(depth, d, M, A, s, "N-id", f"{x} has type {show_type(resolve(d.type, s))}")
                else:
                    self.fail(depth, d, M, A, s, "N-id", "context is not the variable alone")

            case UnitM():
                s2 = unify(Ar, OneM(), s)
                if s2 is None:
                    self.fail(depth, d, M, A, s, "1m-I", f"*m does not have type {show_type(Ar)}")
                elif isinstance(d, CommaJoin) and EmptyM() in d.parts:
                    yield from self._drop_units(d, M, A, s, depth, j, keep=EmptyM())
                elif d == EmptyM():
                    yield TermDerivation("1m-I", j()), s2
                else:
                    self.fail(depth, d, M, A, s, "1m-I", "context is not empty")

            case UnitA():
                s2 = unify(Ar, OneA(), s)
                if s2 is None:
                    self.fail(depth, d, M, A, s, "1a-I", f"*a does not have type {show_type(Ar)}")
                elif d == EmptyA():
                    yield TermDerivation("1a-I", j()), s2
                else:
                    from .bunches import Hole
                    for sub, s3 in self.derive(EmptyA(), M, A, s2, depth + 1):
                        yield TermDerivation("N-W", j(), [sub], context=Hole(), sub=d), s3

            case LamWand(x, body) | LamImpl(x, body):
                conn, op, rule = (Wand, SEMI, "wand-I") if isinstance(M, LamWand) else (Impl, COMMA, "impl-I")
                B, C = self.fresh(), self.fresh()
                s2 = unify(Ar, conn(B, C), s)
                if s2 is None:
                    self.fail(depth, d, M, A, s, rule, f"abstraction cannot have type {show_type(Ar)}")
                    return
                d2 = semi(d, Leaf(x, B)) if op == SEMI else comma(d, Leaf(x, B))
                for sub, s3 in self.derive(d2, body, C, s2, depth + 1):
                    yield TermDerivation(rule, j(), [sub]), s3

            case _ if self._shared(M, names):
                yield from self._contract(d, M, A, s, depth, j)

            case AppWand(F, N) | AppImpl(F, N):
                conn, op, rule = (Wand, SEMI, "wand-E") if isinstance(M, AppWand) else (Impl, COMMA, "impl-E")
                B = self.fresh()
                for d1, d2 in self._splits(d, op, F, N):
                    for sub1, s2 in self.derive(d1, F, conn(B, A), s, depth + 1):
                        for sub2, s3 in self.derive(d2, N, B, s2, depth + 1):
                            yield TermDerivation(rule, j(), [sub1, sub2]), s3

            case PairSep(M1, M2) | PairConj(M1, M2):
                conn, op, rule = (Sep, SEMI, "sep-I") if isinstance(M, PairSep) else (Conj, COMMA, "conj-I")
                B, C = self.fresh(), self.fresh()
                s2 = unify(Ar, conn(B, C), s)
                if s2 is None:
                    self.fail(depth, d, M, A, s, rule, f"pair cannot have type {show_type(Ar)}")
                    return
                for d1, d2 in self._splits(d, op, M1, M2):
                    for sub1, s3 in self.derive(d1, M1, B, s2, depth + 1):
                        for sub2, s4 in self.derive(d2, M2, C, s3, depth + 1):
                            yield TermDerivation(rule, j(), [sub1, sub2]), s4

            case Proj(i, M1):
                B, C = self.fresh(), self.fresh()
                s2 = unify(Ar, B if i == 1 else C, s)
                for sub, s3 in self.derive(d, M1, Conj(B, C), s2, depth + 1):
                    yield TermDerivation(f"conj-E{i}", j(), [sub]), s3

            case Inj(i, M1):
                B, C = self.fresh(), self.fresh()
                s2 = unify(Ar, Disj(B, C), s)
                if s2 is None:
                    self.fail(depth, d, M, A, s, f"disj-I{i}", f"injection cannot have type {show_type(Ar)}")
                    return
                for sub, s3 in self.derive(d, M1, B if i == 1 else C, s2, depth + 1):
                    yield TermDerivation(f"disj-I{i}", j(), [sub]), s3

            case LetUnitM(M1, N) | LetUnitA(M1, N):
                unit, empty, rule = (OneM, EmptyM, "1m-E") if isinstance(M, LetUnitM) else (OneA, EmptyA, "1a-E")
                for ctx, sub in self._places(d, M1):
                    for sub1, s2 in self.derive(sub, M1, unit(), s, depth + 1):
                        for sub2, s3 in self.derive(fill(ctx, empty()), N, A, s2, depth + 1):
                            yield TermDerivation(rule, j(), [sub1, sub2], context=ctx), s3

            case LetPairSep(x, y, M1, N):
                B, C = self.fresh(), self.fresh()
                for ctx, sub in self._places(d, M1):
                    for sub1, s2 in self.derive(sub, M1, Sep(B, C), s, depth + 1):
                        d2 = fill(ctx, semi(Leaf(x, B), Leaf(y, C)))
                        for sub2, s3 in self.derive(d2, N, A, s2, depth + 1):
                            yield TermDerivation("sep-E", j(), [sub1, sub2], context=ctx), s3

            case Case(M1, x1, N1, x2, N2):
                B, C = self.fresh(), self.fresh()
                for ctx, sub in self._places(d, M1):
                    for sub1, s2 in self.derive(sub, M1, Disj(B, C), s, depth + 1):
                        for sub2, s3 in self.derive(fill(ctx, Leaf(x1, B)), N1, A, s2, depth + 1):
                            for sub3, s4 in self.derive(fill(ctx, Leaf(x2, C)), N2, A, s3, depth + 1):
                                yield TermDerivation("disj-E", j(), [sub1, sub2, sub3], context=ctx), s4

            case _:
                self.fail(depth, d, M, A, s, "syntax", "no rule applies")

    # structural steps

    def _weaken(self, d, M, A, s, depth, free, j):
        """Drop the largest sub-bunch that no free variable of M mentions."""
        cands = [(ctx, sub) for ctx, sub in positions(d, want=lambda b: ident(b) and not ident(b) & free)]
        if not cands:
            return
        ctx, sub = max(cands, key=lambda cs: len(ident(cs[1])))
        for der, s2 in self.derive(fill(ctx, EmptyA()), M, A, s, depth + 1):
            yield TermDerivation("N-W", j(), [der], context=ctx, sub=sub), s2

    def _drop_units(self, d: CommaJoin, M, A, s, depth, j, keep):
        from .bunches import Hole
        parts = list(d.parts)
        if keep is not None:
            parts.remove(keep)
        for i, c in enumerate(parts):
            if _name_free(c):
                rest = tuple(d.parts[k] for k in range(len(d.parts)) if d.parts[k] is not c)
                ctx = CommaJoin(rest + (Hole(),))
                for der, s2 in self.derive(fill(ctx, EmptyA()), M, A, s, depth + 1):
                    yield TermDerivation("N-W", j(), [der], context=ctx, sub=c), s2
                return
        self.fail(depth, d, M, A, s, "N-id", "context has more than the variable")

    def _shared(self, M: Term, names: frozenset[Name]) -> frozenset[Name]:
        left, rights = _operands(M)
        if left is None:
            return frozenset()
        rv = frozenset().union(*(fv(r) - b for r, b in rights))
        return fv(left) & rv & names

    def _contract(self, d, M, A, s, depth, j):
        shared = self._shared(M, ident(d))
        cands = sorted(positions(d, want=lambda b: ident(b) and ident(b) <= shared),
                       key=lambda cs: -len(ident(cs[1])))
        for ctx, sub in cands:
            th1 = {n: self.supply.fresh(n) for n in sorted(ident(sub))}
            th2 = {n: self.supply.fresh(n) for n in sorted(ident(sub))}
            d2 = fill(ctx, comma(rename_bunch(sub, th1), rename_bunch(sub, th2)))
            M2 = _rename_operands(M, th1, th2)
            for der, s2 in self.derive(d2, M2, A, s, depth + 1):
                yield TermDerivation("N-C", j(), [der], context=ctx, sub=sub, copies=(th1, th2)), s2

    def _splits(self, d, op, M1, M2):
        want1, want2 = fv(M1), fv(M2)
        for d1, d2 in split(d, op):
            if ident(d1) == want1 and ident(d2) == want2:
                yield d1, d2

    def _places(self, d, M1):
        want = fv(M1)
        cands = list(positions_with_names(d, want))
        if not want:
            cands += [(ctx, EmptyM()) for ctx in unit_positions(d, SEMI)]
            cands += [(ctx, EmptyA()) for ctx in unit_positions(d, COMMA)]
        seen = set()
        for ctx, sub in cands:
            k = (bkey(ctx), bkey(sub))
            if k not in seen:
                seen.add(k)
                yield ctx, sub


def _operands(M: Term) -> tuple[Term | None, list[tuple[Term, frozenset]]]:
    """The sub-term typed in a sub-bunch, and the others with the names they bind."""
    match M:
        case AppWand(F, N) | AppImpl(F, N) | PairSep(F, N) | PairConj(F, N) | LetUnitM(F, N) | LetUnitA(F, N):
            return F, [(N, frozenset())]
        case LetPairSep(x, y, F, N):
            return F, [(N, frozenset({x, y}))]
        case Case(F, x1, N1, x2, N2):
            return F, [(N1, frozenset({x1})), (N2, frozenset({x2}))]
    return None, []


def _rename_operands(M: Term, th1: dict, th2: dict) -> Term:
    cs = _children(M)
    return _with_children(M, (rename_term(cs[0], th1),) + tuple(rename_term(c, th2) for c in cs[1:]))


def _finalize(der: TermDerivation, s: dict) -> TermDerivation:
    def ground(t):
        return _default(resolve(t, s))

    def go(n: TermDerivation) -> TermDerivation:
        c = n.conclusion
        j = TermJudgment(canon(map_types(c.bunch, ground)), c.term, ground(c.type))
        ctx = None if n.context is None else map_types(n.context, ground)
        sub = None if n.sub is None else map_types(n.sub, ground)
        return TermDerivation(n.rule, j, [go(p) for p in n.premises], ctx, sub, n.copies)

    return go(der)


def _default(t: Type) -> Type:
    if isinstance(t, TVar):
        return OneM()
    if isinstance(t, (Sep, Wand, Conj, Impl, Disj)):
        return type(t)(_default(t.left), _default(t.right))
    return t


def typecheck_term(d: Bunch, M: Term, A: Type, limit: int = 200_000) -> TermDerivation | TermTypeFailure:
    """Search for a derivation of d ⊢ M : A."""
    d = canon(d)
    supply = Supply.above(ident(d) | term_names(M))
    search = _TermSearch(supply, limit)
    j = TermJudgment(d, M, A)
    try:
        for der, s in search.derive(d, M, A, {}):
            return _finalize(der, s)
    except _Exhausted:
        return TermTypeFailure(j, "budget", "search budget exhausted", -1)
    return search.worst or TermTypeFailure(j, "search", "no rule applies")


# ---------------------------------------------------------------- translation


class TranslationError(RuntimeError):
    pass


def _derivation_names(der: TermDerivation) -> set[Name]:
    out: set[Name] = set()
    for n in der.nodes():
        out |= ident(n.conclusion.bunch) | term_names(n.conclusion.term)
    return out


def translate(der: TermDerivation, z: Name | str, *, audit: bool = True) -> Process:
    """The process T_z(M) for the conclusion of der.

    With audit on, the result is re-checked against the same judgment by the
    process type checker.
    """
    z = name(z)
    c = der.conclusion
    if z in fv(c.term) or z in ident(c.bunch):
        raise TranslationError(f"channel {z} clashes with a variable of the term")
    supply = Supply.above(_derivation_names(der) | {z})
    p = _translate(der, z, supply)
    if not is_barendregt(p):
        p = rename_apart(p, supply)
    if audit:
        got = check(c.bunch, p, z, c.type)
        if not got:
            raise TranslationError(f"translation does not type:\n{show(p)}\n{got}")
    return p


def _translate(n: TermDerivation, z: Name, supply: Supply) -> Process:
    T = lambda k, ch: _translate(n.premises[k], ch, supply)  # noqa: E731
    M = n.conclusion.term
    match n.rule:
        case "N-id":
            return Fwd(z, M.x)
        case "N-W":
            return Spawn(SpawnBinding({x: () for x in ident(n.sub)}), T(0, z))
        case "N-C":
            th1, th2 = n.copies
            return Spawn(SpawnBinding({x: (th1[x], th2[x]) for x in th1}), T(0, z))
        case "wand-I" | "impl-I":
            return Input(z, M.x, T(0, z))
        case "wand-E" | "impl-E":
            x, y = supply.fresh("x"), supply.fresh("y")
            return Cut(x, T(0, x), Output(x, y, T(1, y), Fwd(z, x)))
        case "1m-I" | "1a-I":
            return Close(z)
        case "1m-E" | "1a-E":
            x = supply.fresh("x")
            return Cut(x, T(0, x), Wait(x, T(1, z)))
        case "sep-I" | "conj-I":
            y = supply.fresh("y")
            return Output(z, y, T(0, y), T(1, z))
        case "sep-E":
            return Cut(M.y, T(0, M.y), Input(M.y, M.x, T(1, z)))
        case "conj-E1" | "conj-E2":
            w, y = supply.fresh("w"), supply.fresh("y")
            if n.rule == "conj-E1":
                tail = Spawn(SpawnBinding({w: ()}), Fwd(z, y))
            else:
                tail = Spawn(SpawnBinding({y: ()}), Fwd(z, w))
            return Cut(w, T(0, w), Input(w, y, tail))
        case "disj-I1":
            return SelL(z, T(0, z))
        case "disj-I2":
            return SelR(z, T(0, z))
        case "disj-E":
            x = supply.fresh("x")
            left = rename(T(1, z), {M.x1: x})
            right = rename(T(2, z), {M.x2: x})
            return Cut(x, T(0, x), Branch(x, left, right))
    raise TranslationError(f"unknown rule {n.rule}")


# ---------------------------------------------------------------- substitution lifting


@dataclass
class SubliftState:
    spawns: list[SpawnBinding]  # outermost first
    cuts: list[tuple[Name, Term]]  # outermost first
    core: Term
    term: Term  # core with the cuts substituted and the spawn renamings applied

    def to_json(self) -> dict:
        return {"spawns": [str(s) for s in self.spawns],
                "cuts": [[str(x), show_term(n)] for x, n in self.cuts],
                "core": show_term(self.core), "term": show_term(self.term)}


@dataclass
class SubliftFailure:
    reason: str

    def __bool__(self) -> bool:
        return False

    def __str__(self) -> str:
        return self.reason


def _homogeneous(sigma: SpawnBinding) -> bool:
    sizes = {len(img) for _, img in sigma.items()}
    return sizes <= {0} or sizes <= {2}


def _collapse(t: Term, sigma: SpawnBinding) -> Term:
    """Apply the renaming induced by a spawn binding: every copy goes back to its source."""
    theta = {c: x for x, img in sigma.items() for c in img}
    return rename_term(t, theta)


def _dec(q: Process, z: Name) -> Iterator[Term]:
    """Terms M with q = T_z(M) for some derivation, flavours erased."""
    match q:
        case Spawn(sigma, q0) if _homogeneous(sigma):
            for t in _dec(q0, z):
                yield _collapse(t, sigma)
        case Fwd(c, x) if c == z:
            yield Var(x)
        case Close(c) if c == z:
            yield UnitM()
        case Input(c, x, q0) if c == z:
            for t in _dec(q0, z):
                yield LamWand(x, t)
        case Output(c, y, q1, q2) if c == z:
            for t1 in _dec(q1, y):
                for t2 in _dec(q2, z):
                    yield PairSep(t1, t2)
        case SelL(c, q0) if c == z:
            for t in _dec(q0, z):
                yield Inj(1, t)
        case SelR(c, q0) if c == z:
            for t in _dec(q0, z):
                yield Inj(2, t)
        case Cut(x, q1, q2):
            yield from _dec_cut(x, q1, q2, z)


def _dec_cut(x: Name, q1: Process, q2: Process, z: Name) -> Iterator[Term]:
    heads = None

    def head():
        nonlocal heads
        if heads is None:
            heads = list(_dec(q1, x))
        return heads

    match q2:
        case Output(c, y, q3, Fwd(z2, c2)) if c == x and c2 == x and z2 == z:
            for a in _dec(q3, y):
                for f in head():
                    yield AppWand(f, a)
        case Wait(c, q3) if c == x:
            for n in _dec(q3, z):
                for m in head():
                    yield LetUnitM(m, n)
        case Input(c, a, q3) if c == x:
            match q3:
                case Spawn(sigma, Fwd(z2, t)) if z2 == z and len(sigma) == 1:
                    (w, img), = sigma.items()
                    if not img and w == x and t == a:
                        yield from (Proj(1, m) for m in head())
                    elif not img and w == a and t == x:
                        yield from (Proj(2, m) for m in head())
            for n in _dec(q3, z):
                for m in head():
                    yield LetPairSep(a, x, m, n)
        case Branch(c, qa, qb) if c == x:
            for n1 in _dec(qa, z):
                for n2 in _dec(qb, z):
                    for m in head():
                        yield Case(m, x, n1, x, n2)


def _chains(q: Process, z: Name) -> Iterator[tuple[list, Term]]:
    for core in _dec(q, z):
        yield [], core
    if isinstance(q, Cut):
        provided = list(_dec(q.P, q.x))
        if provided:
            for cuts, core in _chains(q.Q, z):
                for n in provided:
                    yield [(q.x, n)] + cuts, core


def _lift(q: Process, z: Name) -> Iterator[SubliftState]:
    spawns = []
    while isinstance(q, Spawn) and _homogeneous(q.binding):
        spawns.append(q.binding)
        q = q.P
    for cuts, core in _chains(q, z):
        t = core
        for x, n in reversed(cuts):
            t = subst(t, {x: n})
        for sigma in reversed(spawns):
            t = _collapse(t, sigma)
        yield SubliftState(spawns, cuts, core, t)


def lifted_terms(p: Process, z: Name | str, limit: int = 5000) -> dict:
    """Every term M with p ⪅ M, keyed by flavour-erased alpha key."""
    z = name(z)
    out = {}
    for q, _ in congruence_class(p, limit=limit).values():
        for st in _lift(q, z):
            out.setdefault(term_key(st.term, erase=True), st)
    return out


def sublift_check(p: Process, M: Term, d: Bunch | None = None, z: Name | str = "z",
                  A: Type | None = None) -> SubliftState | SubliftFailure:
    """Decide p ⪅ M; with d and A given, both sides are first checked against the judgment."""
    z = name(z)
    if d is not None and A is not None:
        if not check(d, p, z, A):
            return SubliftFailure("process does not have the given typing")
        if not typecheck_term(d, M, A):
            return SubliftFailure("term does not have the given typing")
    st = lifted_terms(p, z).get(term_key(M, erase=True))
    if st is None:
        return SubliftFailure(f"{show(p)} does not lift the substitutions of {show_term(M)}")
    return st


# ---------------------------------------------------------------- operational correspondence


class _Explorer:
    """Process reduction graph, states keyed by congruence class, with lifted terms cached."""

    def __init__(self, z: Name):
        self.z = z
        self.proc: dict = {}
        self.succ: dict = {}
        self.lifts: dict = {}

    def key(self, p: Process):
        k = class_key(p)
        self.proc.setdefault(k, p)
        return k

    def successors(self, k) -> list:
        if k not in self.succ:
            p = self.proc[k]
            self.succ[k] = sorted({self.key(rename_apart(r.result, Supply.above(all_names(r.result))))
                                   for r in redexes(p, modulo="congruence")}, key=repr)
        return self.succ[k]

    def lifted(self, k) -> dict:
        if k not in self.lifts:
            self.lifts[k] = lifted_terms(self.proc[k], self.z)
        return self.lifts[k]

    def search(self, start, goal: Callable[[object], bool], budget: int):
        """Shortest path (in steps) from start to a state satisfying goal, within budget steps."""
        seen = {start: 0}
        frontier = [start]
        for n in range(budget + 1):
            for k in frontier:
                if goal(k):
                    return k, n
            if n == budget:
                break
            nxt = []
            for k in frontier:
                for k2 in self.successors(k):
                    if k2 not in seen:
                        seen[k2] = n + 1
                        nxt.append(k2)
            frontier = nxt
            if not frontier:
                break
        return None, None

    def within(self, start, depth: int) -> list:
        seen = {start}
        frontier = [start]
        for _ in range(depth):
            nxt = []
            for k in frontier:
                for k2 in self.successors(k):
                    if k2 not in seen:
                        seen.add(k2)
                        nxt.append(k2)
            frontier = nxt
        return list(seen)


@dataclass
class DiagramReport:
    kind: str  # "completeness" or "soundness"
    term: Term
    process: Process
    closed: list[dict] = field(default_factory=list)
    open: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.open

    def to_json(self) -> dict:
        return {"kind": self.kind, "term": show_term(self.term), "process": show(self.process),
                "closed": self.closed, "open": self.open}


def completeness_harness(d: Bunch, M: Term, A: Type, depth: int = 5, z: Name | str = "z",
                         budget: int = 12) -> DiagramReport:
    """Follow depth call-by-name steps of M and close each simulation diagram in πBI.

    Every pair (Q, N) found is recorded in ``closed`` with the number of
    process steps taken.
    """
    z = name(z)
    der = typecheck_term(d, M, A)
    if not der:
        raise TypeError(f"term is not well typed: {der}")
    p = translate(der, z)
    report = DiagramReport("completeness", M, p)
    ex = _Explorer(z)
    cur = ex.key(p)
    term = M
    for _ in range(depth):
        step = cbn_step_rule(term)
        if step is None:
            break
        rule, nxt = step
        want = term_key(nxt, erase=True)
        found, n = ex.search(cur, lambda k: want in ex.lifted(k), budget)
        entry = {"rule": rule, "from": show_term(term), "to": show_term(nxt)}
        if found is None:
            report.open.append({**entry, "process": show(ex.proc[cur]), "reason": "budget-exhausted"})
            break
        report.closed.append({**entry, "steps": n, "process": show(ex.proc[found]),
                              "pair": (ex.proc[found], nxt)})
        cur, term = found, nxt
    return report


def soundness_harness(d: Bunch, M: Term, A: Type, depth: int = 5, z: Name | str = "z",
                      budget: int = 12, term_limit: int = 2000) -> DiagramReport:
    """For every process reachable from T_z(M) in at most depth steps, find N and R
    with M ⇒* N and Q →* R ⪅ N."""
    z = name(z)
    der = typecheck_term(d, M, A)
    if not der:
        raise TypeError(f"term is not well typed: {der}")
    p = translate(der, z)
    report = DiagramReport("soundness", M, p)
    terms = full_reachable(M, term_limit)
    ex = _Explorer(z)
    closes: dict = {}

    def good(k) -> bool:
        if k not in closes:
            closes[k] = any(t in terms for t in ex.lifted(k))
        return closes[k]

    for k in ex.within(ex.key(p), depth):
        found, n = ex.search(k, good, budget)
        if found is None:
            report.open.append({"process": show(ex.proc[k]), "reason": "budget-exhausted"})
            continue
        lifted = ex.lifted(found)
        match = next(t for t in lifted if t in terms)
        report.closed.append({"process": show(ex.proc[k]), "steps": n,
                              "lifted": show_term(terms[match])})
    return report
