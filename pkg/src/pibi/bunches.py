"""Bunches: trees of typed names joined by `;` (multiplicative) and `,` (additive).

Bunches are compared modulo the commutative monoid laws of both joins.  Every
function here accepts arbitrary bunches and works on their canonical form:
units dropped, nested joins of the same kind flattened, children sorted.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Iterable, Iterator, Mapping

from .syntax import Name, ParseError, Supply, Atom, Type, TokenStream, _parse_type_arrow, show_type


class Bunch:
    __slots__ = ()

    def __str__(self) -> str:
        return show_bunch(self)

    def __repr__(self) -> str:
        return f"<{show_bunch(self)}>"


@dataclass(frozen=True, repr=False)
class EmptyM(Bunch):
    pass


@dataclass(frozen=True, repr=False)
class EmptyA(Bunch):
    pass


@dataclass(frozen=True, repr=False)
class Leaf(Bunch):
    name: Name
    type: Type


@dataclass(frozen=True, repr=False)
class Hole(Bunch):
    slot: int = 0


@dataclass(frozen=True, repr=False)
class SemiJoin(Bunch):
    parts: tuple

    def __init__(self, *parts):
        if len(parts) == 1 and isinstance(parts[0], (tuple, list)):
            parts = tuple(parts[0])
        object.__setattr__(self, "parts", tuple(parts))


@dataclass(frozen=True, repr=False)
class CommaJoin(Bunch):
    parts: tuple

    def __init__(self, *parts):
        if len(parts) == 1 and isinstance(parts[0], (tuple, list)):
            parts = tuple(parts[0])
        object.__setattr__(self, "parts", tuple(parts))


SEMI, COMMA = ";", ","
_JOIN = {SEMI: SemiJoin, COMMA: CommaJoin}
_UNIT = {SEMI: EmptyM, COMMA: EmptyA}


def op_of(b: Bunch) -> str | None:
    if isinstance(b, SemiJoin):
        return SEMI
    if isinstance(b, CommaJoin):
        return COMMA
    return None


def unit_of(op: str) -> Bunch:
    return _UNIT[op]()


def semi(*parts: Bunch) -> Bunch:
    return canon(SemiJoin(parts))


def comma(*parts: Bunch) -> Bunch:
    return canon(CommaJoin(parts))


def join(op: str, parts: Iterable[Bunch]) -> Bunch:
    return canon(_JOIN[op](tuple(parts)))


# ---------------------------------------------------------------- canonical form


def bkey(b: Bunch):
    match b:
        case EmptyM():
            return (0,)
        case EmptyA():
            return (1,)
        case Hole(k):
            return (2, k)
        case Leaf(n, t):
            return (3, n._key(), show_type(t))
        case SemiJoin(ps):
            return (4, tuple(bkey(p) for p in ps))
        case CommaJoin(ps):
            return (5, tuple(bkey(p) for p in ps))
    raise TypeError(b)


def canon(b: Bunch) -> Bunch:
    """Unit-free, flattened, sorted representative of the class of b."""
    op = op_of(b)
    if op is None:
        return b
    unit = _UNIT[op]
    flat: list[Bunch] = []
    for p in b.parts:
        c = canon(p)
        if isinstance(c, unit):
            continue
        if op_of(c) == op:
            flat.extend(c.parts)
        else:
            flat.append(c)
    if not flat:
        return unit()
    if len(flat) == 1:
        return flat[0]
    flat.sort(key=bkey)
    return _JOIN[op](tuple(flat))


def bunch_equiv(d1: Bunch, d2: Bunch) -> bool:
    return canon(d1) == canon(d2)


# ---------------------------------------------------------------- queries


def leaves(b: Bunch) -> Iterator[Leaf]:
    if isinstance(b, Leaf):
        yield b
    elif op_of(b):
        for p in b.parts:
            yield from leaves(p)


def ident(b: Bunch) -> frozenset[Name]:
    return frozenset(l.name for l in leaves(b))


def lookup(b: Bunch, x: Name) -> Type | None:
    for l in leaves(b):
        if l.name == x:
            return l.type
    return None


def is_empty_bunch(b: Bunch) -> bool:
    return not any(True for _ in leaves(b))


def is_atomic_bunch(b: Bunch) -> bool:
    return all(isinstance(l.type, Atom) for l in leaves(b))


def well_formed(b: Bunch) -> bool:
    names = [l.name for l in leaves(b)]
    return len(names) == len(set(names))


def count_units(b: Bunch, unit=EmptyA) -> int:
    if isinstance(b, unit):
        return 1
    if op_of(b):
        return sum(count_units(p, unit) for p in b.parts)
    return 0


def map_types(b: Bunch, f: Callable[[Type], Type]) -> Bunch:
    match b:
        case Leaf(n, t):
            return Leaf(n, f(t))
        case SemiJoin(ps):
            return SemiJoin(tuple(map_types(p, f) for p in ps))
        case CommaJoin(ps):
            return CommaJoin(tuple(map_types(p, f) for p in ps))
    return b


def rename_bunch(b: Bunch, theta: Mapping[Name, Name]) -> Bunch:
    match b:
        case Leaf(n, t):
            return Leaf(theta.get(n, n), t)
        case SemiJoin(ps):
            return SemiJoin(tuple(rename_bunch(p, theta) for p in ps))
        case CommaJoin(ps):
            return CommaJoin(tuple(rename_bunch(p, theta) for p in ps))
    return b


def indexed_bunch_renaming(b: Bunch, i: int, supply: Supply | None = None) -> Bunch:
    """The i-th copy of b: every leaf name gets a fresh copy.

    With a supply the copies are drawn from it; without one the copy of
    ``a`` is ``a#i``, the deterministic scheme used for display.
    """
    theta = {}
    for l in leaves(b):
        theta[l.name] = supply.fresh(l.name) if supply else Name(l.name.base, i)
    return rename_bunch(b, theta)


# ---------------------------------------------------------------- contexts


def fill(ctx: Bunch, *subs: Bunch) -> Bunch:
    """Replace Hole(k) by subs[k] and canonicalize."""

    def go(b):
        match b:
            case Hole(k):
                return subs[k]
            case SemiJoin(ps):
                return SemiJoin(tuple(go(p) for p in ps))
            case CommaJoin(ps):
                return CommaJoin(tuple(go(p) for p in ps))
        return b

    return canon(go(ctx))


def holes(b: Bunch) -> int:
    if isinstance(b, Hole):
        return 1
    if op_of(b):
        return sum(holes(p) for p in b.parts)
    return 0


def positions(b: Bunch, want: Callable[[Bunch], bool] | None = None,
              prune: Callable[[Bunch], bool] | None = None) -> Iterator[tuple[Bunch, Bunch]]:
    """All ways of viewing canonical b as ctx(sub), sub a non-unit-padded sub-bunch.

    Sub-bunches are whole subtrees and, for a flattened join, any group of at
    least two (but not all) of its children.  ``want`` filters candidate
    subs; ``prune`` may skip descending into a child.
    """
    b = canon(b)
    seen = set()
    for ctx, sub in _positions(b, want, prune):
        k = (bkey(ctx), bkey(sub))
        if k not in seen:
            seen.add(k)
            yield ctx, sub


def _positions(b, want, prune):
    if want is None or want(b):
        yield Hole(), b
    op = op_of(b)
    if op is None:
        return
    cs = b.parts
    n = len(cs)
    for r in range(2, n):
        for idx in combinations(range(n), r):
            sub = _JOIN[op](tuple(cs[i] for i in idx))
            if want is None or want(sub):
                rest = [cs[i] for i in range(n) if i not in idx]
                yield _JOIN[op](tuple(rest) + (Hole(),)), sub
    for i, c in enumerate(cs):
        if prune is not None and not prune(c):
            continue
        rest = cs[:i] + cs[i + 1:]
        for cctx, sub in _positions(c, want, prune):
            yield _JOIN[op](rest + (cctx,)), sub


def positions_with_names(b: Bunch, names: frozenset[Name]) -> Iterator[tuple[Bunch, Bunch]]:
    """Positions whose sub-bunch mentions exactly ``names``."""
    if names:
        yield from positions(b, want=lambda s: ident(s) == names,
                             prune=lambda c: names <= ident(c))
    else:
        yield from positions(b, want=lambda s: not ident(s))


def unit_positions(b: Bunch, op: str) -> Iterator[Bunch]:
    """Contexts ctx with ctx(unit_of(op)) equivalent to b."""
    b = canon(b)
    seen = set()
    unit = unit_of(op)
    for ctx, sub in positions(b):
        if sub == unit:
            cands = [ctx]
        else:
            cands = [fill_partial(ctx, _JOIN[op]((sub, Hole())))]
        for c in cands:
            k = bkey(c)
            if k not in seen:
                seen.add(k)
                yield c


def fill_partial(ctx: Bunch, inner: Bunch) -> Bunch:
    """Plug a bunch that itself contains a hole into ctx."""

    def go(b):
        match b:
            case Hole():
                return inner
            case SemiJoin(ps):
                return SemiJoin(tuple(go(p) for p in ps))
            case CommaJoin(ps):
                return CommaJoin(tuple(go(p) for p in ps))
        return b

    return go(ctx)


def split(b: Bunch, op: str) -> list[tuple[Bunch, Bunch]]:
    """All (d1, d2) with join(op, d1, d2) equivalent to b, up to equivalence."""
    b = canon(b)
    out = []
    seen = set()
    if op_of(b) == op:
        cs = b.parts
        n = len(cs)
        for r in range(n + 1):
            for idx in combinations(range(n), r):
                d1 = join(op, [cs[i] for i in idx])
                d2 = join(op, [cs[i] for i in range(n) if i not in idx])
                k = (bkey(d1), bkey(d2))
                if k not in seen:
                    seen.add(k)
                    out.append((d1, d2))
    else:
        u = unit_of(op)
        out = [(b, u), (u, b)] if b != u else [(u, u)]
    return out


def neighbourhoods(b: Bunch, x: Name, op: str) -> Iterator[tuple[Bunch, Bunch, Leaf]]:
    """All (ctx, d, leaf) with b equivalent to ctx(d op leaf), leaf the x-leaf."""
    b = canon(b)
    seen = set()
    for ctx, leaf in positions(b, want=lambda s: isinstance(s, Leaf) and s.name == x,
                               prune=lambda c: x in ident(c)):
        # leaf sits in ctx; its siblings under an op-node may join it
        for outer, d in _absorb(ctx, op):
            k = (bkey(outer), bkey(d))
            if k not in seen:
                seen.add(k)
                yield outer, d, leaf


def _absorb(ctx: Bunch, op: str) -> Iterator[tuple[Bunch, Bunch]]:
    """Given ctx with one hole, yield (ctx', d) with ctx'(d op hole) == ctx(hole)."""
    yield ctx, unit_of(op)
    path = _hole_parent(ctx)
    if path is None:
        return
    parent = path
    if op_of(parent) != op:
        return
    sibs = [p for p in parent.parts if not isinstance(p, Hole)]
    n = len(sibs)
    for r in range(1, n + 1):
        for idx in combinations(range(n), r):
            d = join(op, [sibs[i] for i in idx])
            rest = tuple(sibs[i] for i in range(n) if i not in idx)
            new_parent = _JOIN[op](rest + (Hole(),)) if rest else Hole()
            yield _replace_node(ctx, parent, new_parent), d


def _hole_parent(b: Bunch):
    if op_of(b) is None:
        return None
    for p in b.parts:
        if isinstance(p, Hole):
            return b
        if holes(p):
            return _hole_parent(p)
    return None


def _replace_node(b: Bunch, old: Bunch, new: Bunch) -> Bunch:
    if b is old:
        return new
    op = op_of(b)
    if op is None:
        return b
    return _JOIN[op](tuple(_replace_node(p, old, new) for p in b.parts))


# ---------------------------------------------------------------- decompose


def decompose(b: Bunch, pattern) -> list:
    """Enumerate matches of a pattern against b, modulo bunch equivalence.

    pattern is ``";"`` or ``","`` for a top-level split (returns pairs), or a
    bunch d for a context search (returns contexts ctx with ctx(d) equivalent
    to b).
    """
    if pattern in (SEMI, COMMA):
        return split(b, pattern)
    d = canon(pattern)
    if isinstance(d, (EmptyM, EmptyA)):
        return list(unit_positions(b, SEMI if isinstance(d, EmptyM) else COMMA))
    return [ctx for ctx, sub in positions(b) if sub == d]


# ---------------------------------------------------------------- printing and parsing


def show_bunch(b: Bunch) -> str:
    match b:
        case EmptyM():
            return "0m"
        case EmptyA():
            return "0a"
        case Hole(k):
            return "[]" if k == 0 else f"[{k}]"
        case Leaf(n, t):
            return f"{n}:{show_type(t)}"
    op = op_of(b)
    parts = []
    for p in b.parts:
        s = show_bunch(p)
        if op_of(p):
            s = f"({s})"
        parts.append(s)
    return f" {op} ".join(parts)


def parse_bunch(text: str) -> Bunch:
    ts = TokenStream(text)
    b = _parse_bunch(ts)
    ts.end()
    if not well_formed(b):
        raise ParseError("a name occurs twice in the bunch")
    return b


def _parse_bunch(ts: TokenStream) -> Bunch:
    first = _parse_bunch_atom(ts)
    op = ts.peek.text if ts.peek.text in (SEMI, COMMA) else None
    if op is None:
        return first
    parts = [first]
    while ts.peek.text in (SEMI, COMMA):
        if ts.peek.text != op:
            raise ts.error("mixing ';' and ',' needs parentheses")
        ts.advance()
        parts.append(_parse_bunch_atom(ts))
    return _JOIN[op](tuple(parts))


def _parse_bunch_atom(ts: TokenStream) -> Bunch:
    if ts.accept("("):
        b = _parse_bunch(ts)
        ts.expect(")")
        return b
    if ts.accept("0m"):
        return EmptyM()
    if ts.accept("0a"):
        return EmptyA()
    x = ts.ident()
    ts.expect(":")
    return Leaf(x, _parse_type_arrow(ts))


__all__ = [
    "Bunch", "EmptyM", "EmptyA", "Leaf", "Hole", "SemiJoin", "CommaJoin", "SEMI", "COMMA",
    "semi", "comma", "join", "canon", "bunch_equiv", "ident", "lookup", "leaves",
    "is_empty_bunch", "is_atomic_bunch", "indexed_bunch_renaming", "rename_bunch",
    "fill", "positions", "positions_with_names", "unit_positions", "split",
    "neighbourhoods", "decompose", "show_bunch", "parse_bunch", "map_types",
]
