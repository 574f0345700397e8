"""Names, types, process terms, and the concrete syntax for processes and types."""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass
from functools import total_ordering
from typing import Iterable, Iterator, Mapping


# ---------------------------------------------------------------- names


@total_ordering
@dataclass(frozen=True)
class Name:
    base: str
    index: int | None = None

    def __post_init__(self):
        if not self.base:
            raise ValueError("empty name")

    def __str__(self) -> str:
        return self.base if self.index is None else f"{self.base}#{self.index}"

    def __repr__(self) -> str:
        return f"Name({str(self)!r})"

    def _key(self):
        return (self.base, -1 if self.index is None else self.index)

    def __lt__(self, other: Name) -> bool:
        return self._key() < other._key()


def name(text: str | Name) -> Name:
    """Build a name from its printed form (``x`` or ``x#3``)."""
    if isinstance(text, Name):
        return text
    base, sep, idx = text.partition("#")
    return Name(base, int(idx)) if sep else Name(base)


class Supply:
    """Monotone counter handing out fresh copy indices.

    Fresh names keep the base of the name they copy and get an index larger
    than any index the supply has been told about, so they never collide with
    names already in play.
    """

    def __init__(self, start: int = 1):
        self.next = start

    @classmethod
    def above(cls, names: Iterable[Name]) -> Supply:
        top = max((n.index for n in names if n.index is not None), default=0)
        return cls(top + 1)

    def reserve(self, names: Iterable[Name]) -> None:
        for n in names:
            if n.index is not None and n.index >= self.next:
                self.next = n.index + 1

    def fresh(self, like: Name | str) -> Name:
        base = like.base if isinstance(like, Name) else like
        n = Name(base, self.next)
        self.next += 1
        return n


# ---------------------------------------------------------------- types


class Type:
    __slots__ = ()

    def __str__(self) -> str:
        return show_type(self)


@dataclass(frozen=True, repr=False)
class OneM(Type):
    pass


@dataclass(frozen=True, repr=False)
class OneA(Type):
    pass


@dataclass(frozen=True, repr=False)
class Atom(Type):
    name: str


@dataclass(frozen=True, repr=False)
class Sep(Type):
    left: Type
    right: Type


@dataclass(frozen=True, repr=False)
class Wand(Type):
    left: Type
    right: Type


@dataclass(frozen=True, repr=False)
class Conj(Type):
    left: Type
    right: Type


@dataclass(frozen=True, repr=False)
class Impl(Type):
    left: Type
    right: Type


@dataclass(frozen=True, repr=False)
class Disj(Type):
    left: Type
    right: Type


for _cls in (OneM, OneA, Atom, Sep, Wand, Conj, Impl, Disj):
    _cls.__repr__ = lambda self: f"<{show_type(self)}>"

_INFIX = {Sep: "*", Conj: "/\\", Disj: "\\/"}
_ARROW = {Wand: "-*", Impl: "->"}


def show_type(t: Type) -> str:
    match t:
        case OneM():
            return "1m"
        case OneA():
            return "1a"
        case Atom(n):
            return "@" + n
    op = type(t)
    if op in _ARROW:
        left = show_type(t.left)
        if type(t.left) in _ARROW:
            left = f"({left})"
        return f"{left} {_ARROW[op]} {show_type(t.right)}"
    if op in _INFIX:
        left, right = show_type(t.left), show_type(t.right)
        if type(t.left) in _ARROW:
            left = f"({left})"
        if type(t.right) in _ARROW or type(t.right) in _INFIX:
            right = f"({right})"
        return f"{left} {_INFIX[op]} {right}"
    return repr(t)


def type_atoms(t: Type) -> set[str]:
    match t:
        case Atom(n):
            return {n}
        case OneM() | OneA():
            return set()
    return type_atoms(t.left) | type_atoms(t.right)


def subformulas(t: Type) -> set[Type]:
    out = {t}
    if hasattr(t, "left"):
        out |= subformulas(t.left) | subformulas(t.right)
    return out


# ---------------------------------------------------------------- spawn bindings


class SpawnBinding:
    """Finite partial map from names to sets of names."""

    __slots__ = ("_items", "_map")

    def __init__(self, mapping: Mapping[Name, Iterable[Name]] | Iterable = ()):
        if isinstance(mapping, SpawnBinding):
            mapping = mapping._map
        pairs = mapping.items() if isinstance(mapping, Mapping) else mapping
        m = {name(k): frozenset(name(v) for v in vs) for k, vs in pairs}
        self._map = m
        self._items = tuple(sorted(m.items(), key=lambda kv: kv[0]))

    def __getitem__(self, x: Name) -> frozenset[Name]:
        return self._map[x]

    def get(self, x: Name, default=None):
        return self._map.get(x, default)

    def __contains__(self, x) -> bool:
        return x in self._map

    def __iter__(self) -> Iterator[Name]:
        return iter(k for k, _ in self._items)

    def __len__(self) -> int:
        return len(self._items)

    def items(self):
        return self._items

    def __eq__(self, other) -> bool:
        return isinstance(other, SpawnBinding) and self._items == other._items

    def __hash__(self) -> int:
        return hash(self._items)

    @property
    def dom(self) -> frozenset[Name]:
        return frozenset(self._map)

    @property
    def restrictions(self) -> frozenset[Name]:
        out: set[Name] = set()
        for v in self._map.values():
            out |= v
        return frozenset(out)

    def is_valid(self) -> bool:
        seen: set[Name] = set()
        for _, img in self._items:
            if seen & img:
                return False
            seen |= img
        return not (seen & self.dom)

    def without(self, xs: Iterable[Name]) -> SpawnBinding:
        drop = set(xs)
        return SpawnBinding({k: v for k, v in self._items if k not in drop})

    def __str__(self) -> str:
        parts = []
        for k, vs in self._items:
            parts.append(f"{k} -> {{{', '.join(str(v) for v in sorted(vs))}}}")
        return "{" + "; ".join(parts) + "}"

    def __repr__(self) -> str:
        return f"SpawnBinding({self})"


# ---------------------------------------------------------------- processes


class Process:
    __slots__ = ()

    def __str__(self) -> str:
        return show(self)


@dataclass(frozen=True, repr=False)
class Output(Process):
    """x[y].(P || Q): P provides the new session y, Q continues on x."""

    x: Name
    y: Name
    P: Process
    Q: Process


@dataclass(frozen=True, repr=False)
class Input(Process):
    x: Name
    y: Name
    P: Process


@dataclass(frozen=True, repr=False)
class Close(Process):
    x: Name


@dataclass(frozen=True, repr=False)
class Wait(Process):
    x: Name
    P: Process


@dataclass(frozen=True, repr=False)
class SelL(Process):
    x: Name
    P: Process


@dataclass(frozen=True, repr=False)
class SelR(Process):
    x: Name
    P: Process


@dataclass(frozen=True, repr=False)
class Branch(Process):
    x: Name
    P: Process
    Q: Process


@dataclass(frozen=True, repr=False)
class Fwd(Process):
    """fwd x <- y: provides x by copying the session used on y."""

    x: Name
    y: Name


@dataclass(frozen=True, repr=False)
class Cut(Process):
    """new x.(P || Q) with P the provider of x and Q its user."""

    x: Name
    P: Process
    Q: Process


@dataclass(frozen=True, repr=False)
class Spawn(Process):
    binding: SpawnBinding
    P: Process


for _cls in (Output, Input, Close, Wait, SelL, SelR, Branch, Fwd, Cut, Spawn):
    _cls.__repr__ = lambda self: f"<{show(self)}>"


def subject(p: Process) -> Name | None:
    """The channel a prefix acts on, if p is a prefix."""
    if isinstance(p, (Output, Input, Close, Wait, SelL, SelR, Branch)):
        return p.x
    return None


def free_names(p: Process) -> frozenset[Name]:
    return frozenset(_fn(p))


def _fn(p: Process) -> set[Name]:
    match p:
        case Output(x, y, P, Q):
            return {x} | (_fn(P) - {y}) | _fn(Q)
        case Input(x, y, P):
            return {x} | (_fn(P) - {y})
        case Close(x):
            return {x}
        case Wait(x, P) | SelL(x, P) | SelR(x, P):
            return {x} | _fn(P)
        case Branch(x, P, Q):
            return {x} | _fn(P) | _fn(Q)
        case Fwd(x, y):
            return {x, y}
        case Cut(x, P, Q):
            return (_fn(P) | _fn(Q)) - {x}
        case Spawn(s, P):
            return (_fn(P) - s.restrictions) | set(s.dom)
    raise TypeError(p)


def bound_names(p: Process) -> list[Name]:
    """Binding occurrences in traversal order (with repetitions)."""
    out: list[Name] = []

    def go(q):
        match q:
            case Output(_, y, P, Q):
                out.append(y)
                go(P)
                go(Q)
            case Input(_, y, P):
                out.append(y)
                go(P)
            case Wait(_, P) | SelL(_, P) | SelR(_, P):
                go(P)
            case Branch(_, P, Q):
                go(P)
                go(Q)
            case Cut(x, P, Q):
                out.append(x)
                go(P)
                go(Q)
            case Spawn(s, P):
                out.extend(sorted(s.restrictions))
                go(P)

    go(p)
    return out


def all_names(p: Process) -> set[Name]:
    return set(free_names(p)) | set(bound_names(p))


def size(p: Process) -> int:
    match p:
        case Output(_, _, P, Q) | Branch(_, P, Q) | Cut(_, P, Q):
            return 1 + size(P) + size(Q)
        case Input(_, _, P) | Wait(_, P) | SelL(_, P) | SelR(_, P) | Spawn(_, P):
            return 1 + size(P)
    return 1


def is_barendregt(p: Process) -> bool:
    bn = bound_names(p)
    return len(bn) == len(set(bn)) and not (set(bn) & free_names(p))


# ---------------------------------------------------------------- renaming


def rename(p: Process, theta: Mapping[Name, Name]) -> Process:
    """Apply a name substitution to the free names of p.

    Binders that would capture a name in the range of theta must already be
    renamed apart by the caller.
    """
    if not theta:
        return p
    r = lambda n: theta.get(n, n)  # noqa: E731

    def without(names):
        if not any(n in theta for n in names):
            return theta
        return {k: v for k, v in theta.items() if k not in names}

    match p:
        case Output(x, y, P, Q):
            return Output(r(x), y, rename(P, without((y,))), rename(Q, theta))
        case Input(x, y, P):
            return Input(r(x), y, rename(P, without((y,))))
        case Close(x):
            return Close(r(x))
        case Wait(x, P):
            return Wait(r(x), rename(P, theta))
        case SelL(x, P):
            return SelL(r(x), rename(P, theta))
        case SelR(x, P):
            return SelR(r(x), rename(P, theta))
        case Branch(x, P, Q):
            return Branch(r(x), rename(P, theta), rename(Q, theta))
        case Fwd(x, y):
            return Fwd(r(x), r(y))
        case Cut(x, P, Q):
            inner = without((x,))
            return Cut(x, rename(P, inner), rename(Q, inner))
        case Spawn(s, P):
            s2 = SpawnBinding({r(k): v for k, v in s.items()})
            return Spawn(s2, rename(P, without(s.restrictions)))
    raise TypeError(p)


def rename_apart(p: Process, supply: Supply | None = None, avoid: Iterable[Name] = ()) -> Process:
    """Rename binders so that every bound name is distinct from all others and
    from the free names (and from ``avoid``)."""
    fn = free_names(p)
    if supply is None:
        supply = Supply.above(all_names(p) | set(avoid))
    used = set(fn) | set(avoid)

    def pick(b: Name) -> Name:
        if b in used:
            b = supply.fresh(b)
        used.add(b)
        return b

    def go(q: Process, th: dict) -> Process:
        r = lambda n: th.get(n, n)  # noqa: E731
        match q:
            case Output(x, y, P, Q):
                y2 = pick(y)
                return Output(r(x), y2, go(P, {**th, y: y2}), go(Q, th))
            case Input(x, y, P):
                y2 = pick(y)
                return Input(r(x), y2, go(P, {**th, y: y2}))
            case Close(x):
                return Close(r(x))
            case Wait(x, P):
                return Wait(r(x), go(P, th))
            case SelL(x, P):
                return SelL(r(x), go(P, th))
            case SelR(x, P):
                return SelR(r(x), go(P, th))
            case Branch(x, P, Q):
                return Branch(r(x), go(P, th), go(Q, th))
            case Fwd(x, y):
                return Fwd(r(x), r(y))
            case Cut(x, P, Q):
                x2 = pick(x)
                th2 = {**th, x: x2}
                return Cut(x2, go(P, th2), go(Q, th2))
            case Spawn(s, P):
                th2 = dict(th)
                new = {}
                for k, vs in s.items():
                    img = []
                    for v in sorted(vs):
                        v2 = pick(v)
                        th2[v] = v2
                        img.append(v2)
                    new[r(k)] = img
                return Spawn(SpawnBinding(new), go(P, th2))
        raise TypeError(q)

    return go(p, {})


# ---------------------------------------------------------------- alpha equivalence


def alpha_key(p: Process):
    """A hashable canonical form: equal keys iff alpha-equivalent.

    Bound names become ``('b', k)`` with k assigned in traversal order; the
    names restricted by a spawn are numbered at their first use in the body
    (unused ones afterwards, per domain name), so that the unordered image
    sets get a canonical numbering.
    """
    counter = [0]

    def nxt():
        counter[0] += 1
        return ("b", counter[0])

    def go(q: Process, env: dict):
        def r(n):
            v = env.get(n)
            if v is None:
                return ("f", n.base, n.index)
            if isinstance(v, list):  # spawn-restricted, numbered lazily
                if v[0] is None:
                    v[0] = nxt()
                return v[0]
            return v

        match q:
            case Output(x, y, P, Q):
                xs = r(x)
                yk = nxt()
                return ("out", xs, yk, go(P, {**env, y: yk}), go(Q, env))
            case Input(x, y, P):
                xs = r(x)
                yk = nxt()
                return ("in", xs, yk, go(P, {**env, y: yk}))
            case Close(x):
                return ("close", r(x))
            case Wait(x, P):
                return ("wait", r(x), go(P, env))
            case SelL(x, P):
                return ("inl", r(x), go(P, env))
            case SelR(x, P):
                return ("inr", r(x), go(P, env))
            case Branch(x, P, Q):
                return ("case", r(x), go(P, env), go(Q, env))
            case Fwd(x, y):
                return ("fwd", r(x), r(y))
            case Cut(x, P, Q):
                xk = nxt()
                env2 = {**env, x: xk}
                return ("cut", xk, go(P, env2), go(Q, env2))
            case Spawn(s, P):
                dom = [(r(k), vs) for k, vs in s.items()]
                cells = {}
                env2 = dict(env)
                for _, vs in dom:
                    for v in vs:
                        cells[v] = [None]
                        env2[v] = cells[v]
                body = go(P, env2)
                img = []
                for dk, vs in sorted(dom, key=lambda kv: repr(kv[0])):
                    used = sorted(cells[v][0] for v in vs if cells[v][0] is not None)
                    unused = sum(1 for v in vs if cells[v][0] is None)
                    img.append((dk, tuple(used), unused))
                return ("spawn", tuple(img), body)
        raise TypeError(q)

    return go(p, {})


def alpha_eq(p: Process, q: Process) -> bool:
    return alpha_key(p) == alpha_key(q)


# ---------------------------------------------------------------- printing


def show(p: Process) -> str:
    match p:
        case Output(x, y, P, Q):
            return f"{x}![{y}].({show(P)} || {show(Q)})"
        case Input(x, y, P):
            return f"{x}?({y}).{show(P)}"
        case Close(x):
            return f"{x}!()"
        case Wait(x, P):
            return f"{x}?().{show(P)}"
        case SelL(x, P):
            return f"{x}.inl.{show(P)}"
        case SelR(x, P):
            return f"{x}.inr.{show(P)}"
        case Branch(x, P, Q):
            return f"case {x} {{ inl: {show(P)} ; inr: {show(Q)} }}"
        case Fwd(x, y):
            return f"fwd {x} <- {y}"
        case Cut(x, P, Q):
            return f"new {x}.({show(P)} || {show(Q)})"
        case Spawn(s, P):
            return f"spawn{s}.{show(P)}"
    raise TypeError(p)


# ---------------------------------------------------------------- parsing


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {msg}" if line else msg)
        self.line, self.col = line, col


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|--[^\n]*)
  | (?P<unit>1m|1a|0m|0a)(?![A-Za-z0-9_'])
  | (?P<id>[A-Za-z_][A-Za-z0-9_']*(?:\#[0-9]+)?)
  | (?P<op>\|\||<-|->|-\*|/\\|\\/|[!?\[\](){}.;:,*@<>^\\=])
    """,
    re.VERBOSE,
)


@dataclass
class Tok:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        chunk = m.group()
        if kind != "ws":
            toks.append(Tok(kind, chunk, line, pos - line_start + 1))
        for i, ch in enumerate(chunk):
            if ch == "\n":
                line += 1
                line_start = pos + i + 1
        pos = m.end()
    toks.append(Tok("eof", "", line, pos - line_start + 1))
    return toks


class TokenStream:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def peek(self) -> Tok:
        return self.toks[self.i]

    def peek_at(self, k: int) -> Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def advance(self) -> Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg: str) -> ParseError:
        t = self.peek
        return ParseError(f"{msg} (found {t.text or 'end of input'!r})", t.line, t.col)

    def accept(self, text: str) -> bool:
        if self.peek.text == text and self.peek.kind != "eof":
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Tok:
        if self.peek.text != text or self.peek.kind == "eof":
            raise self.error(f"expected {text!r}")
        return self.advance()

    def ident(self) -> Name:
        t = self.peek
        if t.kind != "id" or t.text in KEYWORDS:
            raise self.error("expected a name")
        self.advance()
        return name(t.text)

    def end(self) -> None:
        if self.peek.kind != "eof":
            raise self.error("trailing input")


KEYWORDS = {"new", "case", "inl", "inr", "fwd", "spawn"}


def _parse_proc(ts: TokenStream) -> Process:
    t = ts.peek
    if t.kind == "id" and t.text == "new":
        ts.advance()
        x = ts.ident()
        ts.expect(".")
        ts.expect("(")
        P = _parse_proc(ts)
        ts.expect("||")
        Q = _parse_proc(ts)
        ts.expect(")")
        return Cut(x, P, Q)
    if t.kind == "id" and t.text == "case":
        ts.advance()
        x = ts.ident()
        ts.expect("{")
        ts.expect("inl")
        ts.expect(":")
        P = _parse_proc(ts)
        ts.expect(";")
        ts.expect("inr")
        ts.expect(":")
        Q = _parse_proc(ts)
        ts.expect("}")
        return Branch(x, P, Q)
    if t.kind == "id" and t.text == "fwd":
        ts.advance()
        x = ts.ident()
        ts.expect("<-")
        y = ts.ident()
        return Fwd(x, y)
    if t.kind == "id" and t.text == "spawn":
        ts.advance()
        ts.expect("{")
        binds: dict[Name, list[Name]] = {}
        if ts.peek.text != "}":
            while True:
                k = ts.ident()
                ts.expect("->")
                ts.expect("{")
                vs = []
                if ts.peek.text != "}":
                    vs.append(ts.ident())
                    while ts.accept(","):
                        vs.append(ts.ident())
                ts.expect("}")
                if k in binds:
                    raise ts.error(f"name {k} bound twice in spawn")
                binds[k] = vs
                if not ts.accept(";"):
                    break
        ts.expect("}")
        ts.expect(".")
        s = SpawnBinding(binds)
        if sum(len(v) for v in binds.values()) != len(s.restrictions) or not s.is_valid():
            raise ts.error("ill-formed spawn binding")
        return Spawn(s, _parse_proc(ts))
    x = ts.ident()
    if ts.accept("!"):
        if ts.accept("["):
            y = ts.ident()
            ts.expect("]")
            ts.expect(".")
            ts.expect("(")
            P = _parse_proc(ts)
            ts.expect("||")
            Q = _parse_proc(ts)
            ts.expect(")")
            return Output(x, y, P, Q)
        ts.expect("(")
        ts.expect(")")
        return Close(x)
    if ts.accept("?"):
        ts.expect("(")
        if ts.accept(")"):
            ts.expect(".")
            return Wait(x, _parse_proc(ts))
        y = ts.ident()
        ts.expect(")")
        ts.expect(".")
        return Input(x, y, _parse_proc(ts))
    if ts.accept("."):
        if ts.accept("inl"):
            ts.expect(".")
            return SelL(x, _parse_proc(ts))
        if ts.accept("inr"):
            ts.expect(".")
            return SelR(x, _parse_proc(ts))
        raise ts.error("expected inl or inr")
    raise ts.error("expected a process")


def parse_process(text: str, *, rename: bool = True) -> Process:
    """Parse a process and rename binders apart.

    A binder reusing a name that is already in scope or bound elsewhere is
    reported with a warning and renamed to a fresh indexed copy.
    """
    ts = TokenStream(text)
    p = _parse_proc(ts)
    ts.end()
    if rename and not is_barendregt(p):
        warnings.warn("duplicate binder names renamed apart", stacklevel=2)
        p = rename_apart(p)
    return p


def _parse_type_arrow(ts: TokenStream) -> Type:
    left = _parse_type_infix(ts)
    if ts.accept("-*"):
        return Wand(left, _parse_type_arrow(ts))
    if ts.accept("->"):
        return Impl(left, _parse_type_arrow(ts))
    return left


_INFIX_OPS = {"*": Sep, "/\\": Conj, "\\/": Disj}


def _parse_type_infix(ts: TokenStream) -> Type:
    left = _parse_type_atom(ts)
    while ts.peek.text in _INFIX_OPS:
        op = _INFIX_OPS[ts.advance().text]
        left = op(left, _parse_type_atom(ts))
    return left


def _parse_type_atom(ts: TokenStream) -> Type:
    if ts.accept("("):
        t = _parse_type_arrow(ts)
        ts.expect(")")
        return t
    if ts.accept("1m"):
        return OneM()
    if ts.accept("1a"):
        return OneA()
    if ts.accept("@"):
        t = ts.peek
        if t.kind != "id":
            raise ts.error("expected an atom name")
        ts.advance()
        return Atom(t.text)
    raise ts.error("expected a type")


def parse_type(text: str) -> Type:
    ts = TokenStream(text)
    t = _parse_type_arrow(ts)
    ts.end()
    return t
