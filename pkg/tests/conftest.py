from __future__ import annotations

import itertools

from hypothesis import strategies as st

from pibi.alphalambda import (
    AppImpl, AppWand, Case, Inj, LamImpl, LamWand, LetPairSep, LetUnitA, LetUnitM, PairConj,
    PairSep, Proj, UnitA, UnitM, Var,
)
from pibi.bunches import (
    CommaJoin, EmptyA, EmptyM, Leaf, SemiJoin, is_atomic_bunch, leaves, parse_bunch, show_bunch,
)
from pibi.corpus import examples
from pibi.reduction import class_key, reachable, redexes
from pibi.syntax import (
    Atom, Branch, Close, Conj, Cut, Disj, Fwd, Impl, Input, OneA, OneM, Output, SelL, SelR, Sep,
    Spawn, SpawnBinding, Wait, Wand, name, parse_process as pp, parse_type as pt,
)
from pibi.typing import check

ACCEPTANCE_LINES: list[str] = []

NAMES = [name(n) for n in ("x", "y", "z", "u", "v")]
names = st.sampled_from(NAMES)


def states_after(p, n: int) -> dict:
    """Congruence classes reachable in exactly n steps: class key -> process."""
    layer = {class_key(p): p}
    for _ in range(n):
        nxt = {}
        for q in layer.values():
            for r in redexes(q, modulo="congruence"):
                nxt.setdefault(class_key(r.result), r.result)
        layer = nxt
    return layer


# ---------------------------------------------------------------- types and bunches

types = st.recursive(
    st.sampled_from([OneM(), OneA(), Atom("A"), Atom("B")]),
    lambda t: st.one_of(*(st.builds(c, t, t) for c in (Sep, Wand, Conj, Impl, Disj))),
    max_leaves=6,
)


@st.composite
def bunches(draw, max_leaves: int = 5):
    pool = iter([name(f"b{i}") for i in range(50)])

    def leaf():
        return st.one_of(
            st.just(EmptyM()), st.just(EmptyA()),
            types.map(lambda t: Leaf(next(pool), t)),
        )

    tree = st.recursive(
        leaf(),
        lambda b: st.one_of(
            st.lists(b, min_size=2, max_size=3).map(lambda ps: SemiJoin(tuple(ps))),
            st.lists(b, min_size=2, max_size=3).map(lambda ps: CommaJoin(tuple(ps))),
        ),
        max_leaves=max_leaves,
    )
    return draw(tree)


# ---------------------------------------------------------------- processes


@st.composite
def spawn_bindings(draw):
    out = {}
    for key in draw(st.lists(st.sampled_from(["p", "q"]), unique=True, max_size=2)):
        k = draw(st.integers(0, 2))
        out[name(key)] = {name(f"{key}{i}") for i in range(1, k + 1)}
    return SpawnBinding(out)


processes = st.recursive(
    st.one_of(st.builds(Close, names), st.builds(Fwd, names, names)),
    lambda p: st.one_of(
        st.builds(Output, names, names, p, p),
        st.builds(Input, names, names, p),
        st.builds(Wait, names, p),
        st.builds(SelL, names, p),
        st.builds(SelR, names, p),
        st.builds(Branch, names, p, p),
        st.builds(Cut, names, p, p),
        st.builds(Spawn, spawn_bindings(), p),
    ),
    max_leaves=8,
)


# ---------------------------------------------------------------- terms

TERM_VARS = [name(n) for n in ("a", "b", "c")]
tvars = st.sampled_from(TERM_VARS)

terms = st.recursive(
    st.one_of(st.builds(Var, tvars), st.just(UnitM()), st.just(UnitA())),
    lambda t: st.one_of(
        st.builds(LamWand, tvars, t),
        st.builds(LamImpl, tvars, t),
        st.builds(AppWand, t, t),
        st.builds(AppImpl, t, t),
        st.builds(LetUnitM, t, t),
        st.builds(LetUnitA, t, t),
        st.builds(PairSep, t, t),
        st.builds(PairConj, t, t),
        st.builds(LetPairSep, tvars, tvars, t, t).filter(lambda l: l.x != l.y),
        st.builds(Proj, st.sampled_from([1, 2]), t),
        st.builds(Inj, st.sampled_from([1, 2]), t),
        st.builds(Case, t, tvars, t, tvars, t),
    ),
    max_leaves=8,
)


# ---------------------------------------------------------------- spawn bindings


def sb(text: str) -> SpawnBinding:
    """Binding from 'x -> y1 y2; z ->' notation."""
    out = {}
    for part in filter(None, (p.strip() for p in text.split(";"))):
        k, _, img = part.partition("->")
        out[name(k.strip())] = {name(n) for n in img.split()}
    return SpawnBinding(out)


def all_bindings(names: list[str], max_image: int = 2) -> list[SpawnBinding]:
    ns = [name(n) for n in names]
    out = set()

    def rec(i, m):
        if i == len(ns):
            s = SpawnBinding(m)
            if s.is_valid():
                out.add(s)
            return
        rec(i + 1, m)
        for k in range(max_image + 1):
            for img in itertools.combinations(ns, k):
                rec(i + 1, {**m, ns[i]: set(img)})

    rec(0, {})
    return sorted(out, key=str)


def chained(s1: SpawnBinding, s2: SpawnBinding) -> bool:
    """s2 can follow s1 in consecutive spawn prefixes of a process with distinct binders."""
    return not s2.restrictions & (s1.dom | s1.restrictions) and not s2.dom & s1.dom


# ---------------------------------------------------------------- observation pairs


def closed_instance(ex):
    """Judgment and process over an atomic bunch: unit-typed free names get a closing cut."""
    b, p = ex.bunch, ex.process
    for leaf in leaves(b):
        if not is_atomic_bunch(leaf):
            assert leaf.type == pt("1m"), "no closing context for this example"
            p = Cut(leaf.name, Close(leaf.name), p)
            b = parse_bunch(show_bunch(b).replace(f"{leaf.name}:1m", "0m"))
    assert is_atomic_bunch(b) and check(b, p, ex.chan, ex.type)
    return b, p


def same_judgment_pairs():
    # observations are made on processes typed over atomic bunches only
    out = []
    for ex in examples(typed=True):
        b, p = closed_instance(ex)
        out += [(b, ex.chan, ex.type, p, q) for q, _ in reachable(p, 2).values()]
    b, a = parse_bunch("y1:@s , y2:@s"), pt("@s /\\ @s")
    pool = [pp("x![a].(fwd a <- y1 || fwd x <- y2)"), pp("x![a].(fwd a <- y2 || fwd x <- y1)")]
    out += [(b, name("x"), a, p, q) for p, q in itertools.combinations(pool, 2)]
    b, a = parse_bunch("x:@A"), pt("@A \\/ @A")
    pool = [pp("z.inl.fwd z <- x"), pp("z.inr.fwd z <- x"),
            pp("new w.(fwd w <- x || z.inl.fwd z <- w)")]
    out += [(b, name("z"), a, p, q) for p, q in itertools.combinations(pool, 2)]
    return out


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
