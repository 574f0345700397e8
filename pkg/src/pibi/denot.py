"""Denotational semantics over a finite universe of tags.

A type denotes a family of finite sets indexed by tag sets D.  A bunch value
is a tree shaped like the canonical bunch whose nodes carry their own tag
set: the children of a ``;`` node split the tags of the node, the children
of a ``,`` node share them.  A typing derivation denotes a function from the
values of its bunch to the values of its type, computed by evaluating the
derivation rule by rule.

The multiplicative unit has two readings.  With ``unit="day"`` (the default)
⟦1m⟧(D) is a singleton when D is empty and empty otherwise, which makes
``Δ ; 0m`` and ``Δ`` denote the same family.  With ``unit="constant"`` it is a
singleton for every D.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator

from .bunches import (
    COMMA, SEMI, Bunch, CommaJoin, EmptyA, EmptyM, Hole, Leaf, SemiJoin, bkey, canon, op_of,
)
from .spawn import BindingDerivation
from .syntax import (
    Atom, Conj, Disj, Impl, Name, OneA, OneM, Process, Sep, Type, Wand, name, show, show_type,
)
from .typing import Derivation, check

__all__ = [
    "TagUniverse", "SemValue", "Unit", "Tag", "PairConj", "PairSep", "InjL", "InjR", "FunImpl",
    "FunWand", "DenotSizeError", "DenotError", "sem_type", "sem_size", "bunch_values",
    "BunchValue", "sem_process", "sem_binding", "DenotVerdict", "denot_eq",
]

DEFAULT_CAP = 10_000


class DenotError(RuntimeError):
    pass


class DenotSizeError(DenotError):
    pass


@dataclass(frozen=True)
class TagUniverse:
    tags: tuple[str, ...] = ("t1", "t2", "t3")
    unit: str = "day"  # or "constant"
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        if not self.tags:
            raise ValueError("a tag universe needs at least one tag")
        if self.unit not in ("day", "constant"):
            raise ValueError(f"unknown unit reading {self.unit!r}")

    @classmethod
    def of_size(cls, n: int, **kw) -> TagUniverse:
        return cls(tuple(f"t{i}" for i in range(1, n + 1)), **kw)

    @property
    def all(self) -> frozenset[str]:
        return frozenset(self.tags)

    def subsets(self, within: frozenset[str] | None = None) -> list[frozenset[str]]:
        base = sorted(self.all if within is None else within)
        return [frozenset(c) for r in range(len(base) + 1) for c in itertools.combinations(base, r)]


# ---------------------------------------------------------------- values


class SemValue:
    __slots__ = ()


@dataclass(frozen=True)
class Unit(SemValue):
    def __str__(self) -> str:
        return "()"


@dataclass(frozen=True)
class Tag(SemValue):
    tag: str

    def __str__(self) -> str:
        return self.tag


@dataclass(frozen=True)
class PairConj(SemValue):
    left: SemValue
    right: SemValue

    def __str__(self) -> str:
        return f"({self.left}, {self.right})"


def _tags(d: frozenset[str]) -> str:
    return "{" + ",".join(sorted(d)) + "}"


@dataclass(frozen=True)
class PairSep(SemValue):
    split: tuple[frozenset[str], frozenset[str]]
    left: SemValue
    right: SemValue

    def __post_init__(self):
        if self.split[0] & self.split[1]:
            raise DenotError("separating pair with overlapping tag sets")

    def __str__(self) -> str:
        return f"<{self.left}@{_tags(self.split[0])}, {self.right}@{_tags(self.split[1])}>"


@dataclass(frozen=True)
class InjL(SemValue):
    value: SemValue

    def __str__(self) -> str:
        return f"inl {self.value}"


@dataclass(frozen=True)
class InjR(SemValue):
    value: SemValue

    def __str__(self) -> str:
        return f"inr {self.value}"


@dataclass(frozen=True)
class FunImpl(SemValue):
    table: tuple[tuple[SemValue, SemValue], ...]

    def __call__(self, a: SemValue) -> SemValue:
        for k, v in self.table:
            if k == a:
                return v
        raise DenotError(f"{a} is outside the domain of the function")

    def __str__(self) -> str:
        return "{" + ", ".join(f"{k} => {v}" for k, v in self.table) + "}"


@dataclass(frozen=True)
class FunWand(SemValue):
    table: tuple[tuple[tuple[frozenset[str], SemValue], SemValue], ...]

    def __call__(self, d: frozenset[str], a: SemValue) -> SemValue:
        for (d2, k), v in self.table:
            if d2 == d and k == a:
                return v
        raise DenotError(f"{a} at {_tags(d)} is outside the domain of the function")

    def __str__(self) -> str:
        return "{" + ", ".join(f"{k}@{_tags(d)} => {v}" for (d, k), v in self.table) + "}"


# ---------------------------------------------------------------- semantic sets


def _splits(d: frozenset[str], n: int = 2) -> Iterator[tuple[frozenset[str], ...]]:
    """Ordered partitions of d into n disjoint (possibly empty) parts."""
    items = sorted(d)
    for assign in itertools.product(range(n), repeat=len(items)):
        yield tuple(frozenset(t for t, k in zip(items, assign) if k == i) for i in range(n))


def sem_size(a: Type, d: frozenset[str], u: TagUniverse) -> int:
    """Number of elements of ⟦a⟧(d), computed without enumerating."""
    return _size(a, frozenset(d), u)


@lru_cache(maxsize=None)
def _size(a: Type, d: frozenset[str], u: TagUniverse) -> int:
    match a:
        case OneM():
            return 1 if u.unit == "constant" or not d else 0
        case OneA():
            return 1
        case Atom():
            return len(d)
        case Disj(l, r):
            return _size(l, d, u) + _size(r, d, u)
        case Conj(l, r):
            return _size(l, d, u) * _size(r, d, u)
        case Sep(l, r):
            return sum(_size(l, d1, u) * _size(r, d2, u) for d1, d2 in _splits(d))
        case Impl(l, r):
            return _size(r, d, u) ** _size(l, d, u)
        case Wand(l, r):
            n = 1
            for d2 in u.subsets(u.all - d):
                n *= _size(r, d | d2, u) ** _size(l, d2, u)
            return n
    raise DenotError(f"no denotation for type {show_type(a)}")


def sem_type(a: Type, d: frozenset[str] | set[str], u: TagUniverse) -> tuple[SemValue, ...]:
    """The elements of ⟦a⟧(d), in a fixed order."""
    d = frozenset(d)
    if not d <= u.all:
        raise DenotError(f"tag set {_tags(d)} is not in the universe")
    n = _size(a, d, u)
    if n > u.cap:
        raise DenotSizeError(f"⟦{show_type(a)}⟧({_tags(d)}) has {n} elements, over the cap of {u.cap}")
    return _sem(a, d, u)


@lru_cache(maxsize=None)
def _sem(a: Type, d: frozenset[str], u: TagUniverse) -> tuple[SemValue, ...]:
    match a:
        case OneM():
            return (Unit(),) if u.unit == "constant" or not d else ()
        case OneA():
            return (Unit(),)
        case Atom():
            return tuple(Tag(t) for t in sorted(d))
        case Disj(l, r):
            return tuple(InjL(v) for v in _sem(l, d, u)) + tuple(InjR(v) for v in _sem(r, d, u))
        case Conj(l, r):
            return tuple(PairConj(v, w) for v in _sem(l, d, u) for w in _sem(r, d, u))
        case Sep(l, r):
            return tuple(PairSep((d1, d2), v, w) for d1, d2 in _splits(d)
                         for v in _sem(l, d1, u) for w in _sem(r, d2, u))
        case Impl(l, r):
            args = _sem(l, d, u)
            res = _sem(r, d, u)
            return tuple(FunImpl(tuple(zip(args, choice)))
                         for choice in itertools.product(res, repeat=len(args)))
        case Wand(l, r):
            keys, ranges = [], []
            for d2 in u.subsets(u.all - d):
                for v in _sem(l, d2, u):
                    keys.append((d2, v))
                    ranges.append(_sem(r, d | d2, u))
            return tuple(FunWand(tuple(zip(keys, choice))) for choice in itertools.product(*ranges))
    raise DenotError(f"no denotation for type {show_type(a)}")


def member(v: SemValue, a: Type, d: frozenset[str], u: TagUniverse) -> bool:
    """Whether v is an element of ⟦a⟧(d), checked structurally."""
    match a, v:
        case OneM(), Unit():
            return u.unit == "constant" or not d
        case OneA(), Unit():
            return True
        case Atom(), Tag(t):
            return t in d
        case Disj(l, _), InjL(w):
            return member(w, l, d, u)
        case Disj(_, r), InjR(w):
            return member(w, r, d, u)
        case Conj(l, r), PairConj(x, y):
            return member(x, l, d, u) and member(y, r, d, u)
        case Sep(l, r), PairSep((d1, d2), x, y):
            return d1 | d2 == d and not d1 & d2 and member(x, l, d1, u) and member(y, r, d2, u)
        case Impl(l, r), FunImpl(table):
            args = [k for k, _ in table]
            return sorted(map(repr, args)) == sorted(map(repr, _sem(l, d, u))) and all(
                member(w, r, d, u) for _, w in table)
        case Wand(l, r), FunWand(table):
            want = {(d2, k) for d2 in u.subsets(u.all - d) for k in _sem(l, d2, u)}
            return {k for k, _ in table} == want and all(member(w, r, d | k[0], u) for k, w in table)
    return False


# ---------------------------------------------------------------- bunch values


@dataclass(frozen=True)
class BunchValue:
    """A value of a canonical bunch: a tree of the bunch's shape with tag sets."""

    kind: str  # "leaf", "0m", "0a", ";" or ","
    tags: frozenset[str]
    leaf: Leaf | None = None
    value: SemValue | None = None
    parts: tuple[BunchValue, ...] = ()

    @property
    def bunch(self) -> Bunch:
        match self.kind:
            case "leaf":
                return self.leaf
            case "0m":
                return EmptyM()
            case "0a":
                return EmptyA()
            case ";":
                return SemiJoin(tuple(p.bunch for p in self.parts))
        return CommaJoin(tuple(p.bunch for p in self.parts))

    def env(self) -> dict[Name, tuple[SemValue, frozenset[str]]]:
        out = {}
        if self.kind == "leaf":
            out[self.leaf.name] = (self.value, self.tags)
        for p in self.parts:
            out.update(p.env())
        return out

    def __str__(self) -> str:
        match self.kind:
            case "leaf":
                return f"{self.leaf.name}={self.value}@{_tags(self.tags)}"
            case "0m" | "0a":
                return f"{self.kind}@{_tags(self.tags)}"
        return "(" + f" {self.kind} ".join(str(p) for p in self.parts) + ")"


def _unit(kind: str, tags: frozenset[str]) -> BunchValue:
    return BunchValue(kind, frozenset(tags))


def _join(op: str, parts: list[BunchValue], tags: frozenset[str] | None = None) -> BunchValue:
    if op == SEMI:
        tags = frozenset().union(*(p.tags for p in parts)) if parts else frozenset()
    return vcanon(BunchValue(op, tags, parts=tuple(parts)))


def vcanon(v: BunchValue) -> BunchValue:
    """Canonical form, following bunches.canon on the underlying bunch."""
    if v.kind not in (SEMI, COMMA):
        return v
    op = v.kind
    unit = "0m" if op == SEMI else "0a"
    flat: list[BunchValue] = []
    for p in v.parts:
        c = vcanon(p)
        if c.kind == unit:
            if op == SEMI and c.tags:
                raise DenotError("a dropped multiplicative unit carries tags")
            continue
        if c.kind == op:
            flat.extend(c.parts)
        else:
            flat.append(c)
    if not flat:
        return _unit(unit, v.tags)
    if len(flat) == 1:
        return flat[0]
    flat.sort(key=lambda p: bkey(p.bunch))
    return BunchValue(op, v.tags, parts=tuple(flat))


def bunch_values(b: Bunch, d: frozenset[str] | set[str], u: TagUniverse) -> list[BunchValue]:
    """All values of the canonical bunch b at tag set d."""
    d = frozenset(d)
    b = canon(b)
    total = _bunch_size(b, d, u)
    if total > u.cap:
        raise DenotSizeError(f"bunch has {total} values at {_tags(d)}, over the cap of {u.cap}")
    return list(_bvals(b, d, u))


def _bunch_size(b: Bunch, d: frozenset[str], u: TagUniverse) -> int:
    match b:
        case Leaf(_, t):
            return _size(t, d, u)
        case EmptyM():
            return 1 if u.unit == "constant" or not d else 0
        case EmptyA():
            return 1
        case SemiJoin(ps):
            n = 0
            for ds in _splits(d, len(ps)):
                k = 1
                for p, dp in zip(ps, ds):
                    k *= _bunch_size(p, dp, u)
                n += k
            return n
        case CommaJoin(ps):
            k = 1
            for p in ps:
                k *= _bunch_size(p, d, u)
            return k
    raise DenotError(f"no denotation for bunch {b}")


def _bvals(b: Bunch, d: frozenset[str], u: TagUniverse) -> Iterator[BunchValue]:
    match b:
        case Leaf(_, t):
            for v in _sem(t, d, u):
                yield BunchValue("leaf", d, b, v)
        case EmptyM():
            if u.unit == "constant" or not d:
                yield _unit("0m", d)
        case EmptyA():
            yield _unit("0a", d)
        case SemiJoin(ps):
            for ds in _splits(d, len(ps)):
                for parts in itertools.product(*(list(_bvals(p, dp, u)) for p, dp in zip(ps, ds))):
                    yield BunchValue(SEMI, d, parts=parts)
        case CommaJoin(ps):
            for parts in itertools.product(*(list(_bvals(p, d, u)) for p in ps)):
                yield BunchValue(COMMA, d, parts=parts)


# positions in bunch values


def _fresh_unit(op: str, around: frozenset[str]) -> BunchValue:
    return _unit("0m", frozenset()) if op == SEMI else _unit("0a", around)


def _take(parts: tuple[BunchValue, ...], wanted: list[Bunch]):
    """Split parts into those matching wanted (by bunch, first fit) and the rest."""
    rest = list(parts)
    got = []
    for w in wanted:
        k = bkey(w)
        for i, p in enumerate(rest):
            if bkey(p.bunch) == k:
                got.append(rest.pop(i))
                break
        else:
            return None
    return got, rest


def _match(ctx: Bunch, v: BunchValue):
    """Yield (sub, plug) with plug(new) the value of ctx filled with new."""
    if isinstance(ctx, Hole):
        yield v, lambda new: new
        return
    op = op_of(ctx)
    if op is None:
        return
    hole_parts = [p for p in ctx.parts if _has_hole(p)]
    if len(hole_parts) != 1:
        return
    h = hole_parts[0]
    others = [canon(p) for p in ctx.parts if not _has_hole(p)]
    flat_others = []
    for o in others:
        if op_of(o) == op:
            flat_others.extend(o.parts)
        elif not isinstance(o, EmptyM if op == SEMI else EmptyA):
            flat_others.append(o)
    if v.kind == op:
        taken = _take(v.parts, flat_others)
        if taken is None:
            return
        got, rest = taken

        def rebuild(inner: BunchValue, got=got) -> BunchValue:
            return _join(op, got + [inner], v.tags)

        if isinstance(h, Hole):
            if not rest:
                sub = _fresh_unit(op, v.tags)
            elif len(rest) == 1:
                sub = rest[0]
            else:
                sub = _join(op, rest, v.tags)
            yield sub, rebuild
        else:
            for i, r in enumerate(rest):
                if len(rest) == 1:
                    for sub, plug in _match(h, r):
                        yield sub, lambda new, plug=plug: rebuild(plug(new))
    else:
        # v is a single part; the hole must be a unit absorbed next to it
        if isinstance(h, Hole) and len(flat_others) == 1 and bkey(flat_others[0]) == bkey(v.bunch):
            yield _fresh_unit(op, v.tags), lambda new: _join(op, [v, new], v.tags)
        elif not flat_others:
            for sub, plug in _match(h, v):
                yield sub, plug


def _has_hole(b: Bunch) -> bool:
    if isinstance(b, Hole):
        return True
    return op_of(b) is not None and any(_has_hole(p) for p in b.parts)


def _locate(ctx: Bunch, v: BunchValue, sub: Bunch | None = None):
    want = None if sub is None else bkey(canon(sub))
    for s, plug in _match(ctx, v):
        if want is None or bkey(canon(s.bunch)) == want:
            return s, plug
    raise DenotError(f"cannot locate a sub-bunch of {v.bunch} at context {ctx}")


def _vsplit(v: BunchValue, op: str, d1: Bunch) -> tuple[BunchValue, BunchValue]:
    d1 = canon(d1)
    if v.kind == op:
        wanted = list(d1.parts) if op_of(d1) == op else ([] if d1 == (EmptyM() if op == SEMI else EmptyA()) else [d1])
        taken = _take(v.parts, wanted)
        if taken is None:
            raise DenotError("split does not match the bunch value")
        got, rest = taken
        left = _join(op, got, v.tags) if got else _fresh_unit(op, v.tags)
        right = _join(op, rest, v.tags) if rest else _fresh_unit(op, v.tags)
        if op == SEMI:
            right = _retag(right, v.tags - left.tags) if not rest else right
        return left, right
    unit = _fresh_unit(op, v.tags)
    if bkey(d1) == bkey(v.bunch):
        return v, unit
    return unit, v


def _retag(v: BunchValue, tags: frozenset[str]) -> BunchValue:
    if v.kind == "0m" and tags:
        return BunchValue("0m", tags)
    return BunchValue(v.kind, tags, v.leaf, v.value, v.parts)


def _replace_leaf(v: BunchValue, x: Name, new: BunchValue) -> BunchValue:
    if v.kind == "leaf":
        return new if v.leaf.name == x else v
    if not v.parts:
        return v
    return vcanon(BunchValue(v.kind, v.tags, parts=tuple(_replace_leaf(p, x, new) for p in v.parts)))


def _leaf(x: Name, t: Type, value: SemValue, tags: frozenset[str]) -> BunchValue:
    return BunchValue("leaf", frozenset(tags), Leaf(x, t), value)


def _rename_value(v: BunchValue, theta: dict) -> BunchValue:
    if v.kind == "leaf":
        return BunchValue("leaf", v.tags, Leaf(theta.get(v.leaf.name, v.leaf.name), v.leaf.type), v.value)
    return BunchValue(v.kind, v.tags, parts=tuple(_rename_value(p, theta) for p in v.parts))


# ---------------------------------------------------------------- spawn bindings


def sem_binding(bd: BindingDerivation, v: BunchValue) -> BunchValue:
    """Run a binding derivation on a value of its source bunch.

    Contraction duplicates the contracted component, weakening discards it.
    """
    for st in bd.steps:
        if bkey(v.bunch) != bkey(canon(st.before)):
            raise DenotError("binding step does not start from the current bunch")
        if st.kind == "contract":
            sub, plug = _locate(st.context, v)
            copies = [_rename_value(sub, th) for th in st.copies]
            v = plug(_join(COMMA, copies, sub.tags))
        else:
            sub, plug = _locate(st.context, v)
            v = plug(_unit("0a", sub.tags))
        v = vcanon(v)
        if bkey(v.bunch) != bkey(canon(st.after)):
            raise DenotError(f"binding step ends in {v.bunch}, expected {canon(st.after)}")
    return v


# ---------------------------------------------------------------- processes


def _eval(n: Derivation, v: BunchValue, u: TagUniverse) -> SemValue:
    c = n.conclusion
    if bkey(v.bunch) != bkey(canon(c.bunch)):
        raise DenotError(f"value of {v.bunch} given for a judgment over {c.bunch}")
    d = v.tags
    env = v.env()
    P = c.process
    match n.rule:
        case "Fwd":
            return env[P.y][0]
        case "Emp-r" | "True-r":
            return Unit()
        case "Emp-l" | "True-l":
            _, tags = env[P.x]
            unit = _unit("0m" if n.rule == "Emp-l" else "0a", tags)
            return _eval(n.premises[0], _replace_leaf(v, P.x, unit), u)
        case "Sep-r" | "Conj-r":
            op = SEMI if n.rule == "Sep-r" else COMMA
            p1, p2 = n.premises
            left, right = _vsplit(v, op, p1.conclusion.bunch)
            a = _eval(p1, left, u)
            b = _eval(p2, right, u)
            if op == SEMI:
                return PairSep((left.tags, right.tags), a, b)
            return PairConj(a, b)
        case "Sep-l" | "Conj-l":
            pair, tags = env[P.x]
            t = c.bunch
            prem = n.premises[0]
            env2 = prem.conclusion.bunch
            tx, ty = _leaf_type(env2, P.x), _leaf_type(env2, P.y)
            if n.rule == "Sep-l":
                d1, d2 = pair.split
                new = _join(SEMI, [_leaf(P.x, tx, pair.right, d2), _leaf(P.y, ty, pair.left, d1)])
            else:
                new = _join(COMMA, [_leaf(P.x, tx, pair.right, tags), _leaf(P.y, ty, pair.left, tags)], tags)
            return _eval(prem, _replace_leaf(v, P.x, new), u)
        case "Wand-r" | "Impl-r":
            prem = n.premises[0]
            ta = _leaf_type(prem.conclusion.bunch, P.y)
            if n.rule == "Wand-r":
                table = []
                for d2 in u.subsets(u.all - d):
                    for a in sem_type(ta, d2, u):
                        v2 = _join(SEMI, [v, _leaf(P.y, ta, a, d2)])
                        table.append(((d2, a), _eval(prem, v2, u)))
                return FunWand(tuple(table))
            table = []
            for a in sem_type(ta, d, u):
                v2 = _join(COMMA, [v, _leaf(P.y, ta, a, d)], d)
                table.append((a, _eval(prem, v2, u)))
            return FunImpl(tuple(table))
        case "Wand-l" | "Impl-l":
            op = SEMI if n.rule == "Wand-l" else COMMA
            p1, p2 = n.premises
            group, plug = _locate_neighbourhood(n.context, v, P.x, op, p1.conclusion.bunch)
            f, tx = None, None
            rest = []
            for part in (group.parts if group.kind == op else (group,)):
                if part.kind == "leaf" and part.leaf.name == P.x:
                    f, tx = part.value, part.tags
                else:
                    rest.append(part)
            if not rest:
                arg_v = _fresh_unit(op, tx)
            elif len(rest) == 1:
                arg_v = rest[0]
            else:
                arg_v = _join(op, rest, group.tags)
            a = _eval(p1, arg_v, u)
            tb = _leaf_type(p2.conclusion.bunch, P.x)
            if op == SEMI:
                res = f(arg_v.tags, a)
                new = _leaf(P.x, tb, res, tx | arg_v.tags)
            else:
                res = f(a)
                new = _leaf(P.x, tb, res, tx)
            return _eval(p2, vcanon(plug(new)), u)
        case "Disj-r-inl":
            return InjL(_eval(n.premises[0], v, u))
        case "Disj-r-inr":
            return InjR(_eval(n.premises[0], v, u))
        case "Disj-l":
            val, tags = env[P.x]
            k = 0 if isinstance(val, InjL) else 1
            prem = n.premises[k]
            t = _leaf_type(prem.conclusion.bunch, P.x)
            return _eval(prem, _replace_leaf(v, P.x, _leaf(P.x, t, val.value, tags)), u)
        case "Cut":
            p1, p2 = n.premises
            sub, plug = _locate(n.context, v, p1.conclusion.bunch)
            a = _eval(p1, sub, u)
            t = _leaf_type(p2.conclusion.bunch, P.x)
            return _eval(p2, vcanon(plug(_leaf(P.x, t, a, sub.tags))), u)
        case "Struct":
            return _eval(n.premises[0], sem_binding(n.binding, v), u)
    raise DenotError(f"no denotation for rule {n.rule}")


def _locate_neighbourhood(ctx: Bunch, v: BunchValue, x: Name, op: str, d1: Bunch):
    want = frozenset(l.name for l in _leaves(canon(d1))) | {x}
    for s, plug in _match(ctx, v):
        if frozenset(s.env()) == want:
            return s, plug
    raise DenotError(f"cannot locate the neighbourhood of {x}")


def _leaves(b: Bunch):
    if isinstance(b, Leaf):
        yield b
    elif op_of(b):
        for p in b.parts:
            yield from _leaves(p)


def _leaf_type(b: Bunch, x: Name) -> Type:
    for l in _leaves(b):
        if l.name == x:
            return l.type
    raise DenotError(f"{x} is not in {b}")


def sem_process(der: Derivation, d: frozenset[str] | set[str], u: TagUniverse) -> dict[BunchValue, SemValue]:
    """The denotation of a derivation at tag set d, as a finite table."""
    d = frozenset(d)
    out = {}
    c = der.conclusion
    for v in bunch_values(c.bunch, d, u):
        r = _eval(der, v, u)
        if not member(r, c.type, d, u):
            raise DenotError(f"{r} is not in ⟦{show_type(c.type)}⟧({_tags(d)})")
        out[v] = r
    return out


# ---------------------------------------------------------------- equality


@dataclass
class DenotVerdict:
    equal: bool
    checked: int
    witness: str = ""
    per_tags: list[tuple[str, int, int]] = field(default_factory=list)  # (D, agreeing, total)

    def __bool__(self) -> bool:
        return self.equal

    @property
    def verdict(self) -> str:
        return "equivalent (denotationally)" if self.equal else "not-provably-equivalent"

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "equal": self.equal, "checked": self.checked,
                "witness": self.witness,
                "per_tags": [{"tags": t, "agree": a, "total": n} for t, a, n in self.per_tags]}


def _derive(p: Process | Derivation, b: Bunch, z: Name | str, a: Type) -> Derivation:
    if isinstance(p, Derivation):
        return p
    der = check(b, p, name(z), a)
    if not der:
        raise DenotError(f"process does not check at the judgment: {show(p)}\n{der}")
    return der


def denot_eq(p: Process | Derivation, q: Process | Derivation, b: Bunch, z: Name | str, a: Type,
             u: TagUniverse | None = None) -> DenotVerdict:
    """Compare the denotations of p and q at every tag set of the universe."""
    u = u or TagUniverse()
    dp, dq = _derive(p, b, z, a), _derive(q, b, z, a)
    checked = 0
    per = []
    witness = ""
    for d in u.subsets():
        tp, tq = sem_process(dp, d, u), sem_process(dq, d, u)
        agree = sum(1 for k in tp if tp[k] == tq[k])
        per.append((_tags(d), agree, len(tp)))
        checked += len(tp)
        if agree != len(tp) and not witness:
            k = next(k for k in tp if tp[k] != tq[k])
            witness = f"at {_tags(d)} on {k}: {tp[k]} vs {tq[k]}"
    return DenotVerdict(not witness, checked, witness, per)
