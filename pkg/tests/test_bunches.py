import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import bunches
from pibi.bunches import (
    COMMA, SEMI, CommaJoin, EmptyA, EmptyM, Leaf, SemiJoin, bunch_equiv, canon, comma, fill, ident,
    is_atomic_bunch, join, leaves, neighbourhoods, parse_bunch, positions, positions_with_names,
    semi, show_bunch, split, unit_of, unit_positions,
)
from pibi.syntax import Atom, OneM, ParseError, name


def norm(b):
    """Oracle for bunch equivalence: nested sorted tuples, units dropped."""
    if isinstance(b, (SemiJoin, CommaJoin)):
        op = ";" if isinstance(b, SemiJoin) else ","
        unit = EmptyM if op == ";" else EmptyA
        out = []
        for p in b.parts:
            if isinstance(p, unit):
                continue
            n = norm(p)
            if n[0] == op:
                out.extend(n[1])
            elif n != ("unit", op):
                out.append(n)
        if not out:
            return ("unit", op)
        if len(out) == 1:
            return out[0]
        return (op, tuple(sorted(out, key=repr)))
    if isinstance(b, EmptyM):
        return ("unit", ";")
    if isinstance(b, EmptyA):
        return ("unit", ",")
    return ("leaf", str(b.name), str(b.type))


def shuffle(b, rnd: random.Random):
    """An equivalent bunch: children permuted, units inserted, joins regrouped."""
    if isinstance(b, (SemiJoin, CommaJoin)):
        ps = [shuffle(p, rnd) for p in b.parts]
        rnd.shuffle(ps)
        if rnd.random() < 0.5:
            ps.append(EmptyM() if isinstance(b, SemiJoin) else EmptyA())
        if len(ps) >= 3 and rnd.random() < 0.5:
            ps = [type(b)(tuple(ps[:2]))] + ps[2:]
        return type(b)(tuple(ps))
    return b


x, y, w = (Leaf(name(n), Atom("A")) for n in "xyw")


def test_units_and_flattening():
    assert canon(semi(x, EmptyM())) == x
    assert canon(comma(x, EmptyA())) == x
    assert canon(semi(EmptyA(), x)) != x
    assert canon(semi(x, semi(y, w))) == canon(semi(semi(w, y), x))


def test_join_kinds_do_not_mix():
    assert not bunch_equiv(semi(x, y), comma(x, y))
    assert not bunch_equiv(semi(x, comma(y, w)), comma(semi(x, y), w))


def test_split_of_three_children():
    b = semi(x, y, w)
    got = split(b, SEMI)
    assert len(got) == 8
    for d1, d2 in got:
        assert bunch_equiv(semi(d1, d2), b)
    assert split(x, COMMA) == [(x, EmptyA()), (EmptyA(), x)]


def test_parse_and_show():
    b = parse_bunch("x:@A ; (y:1m , w:@A) ; 0a")
    assert ident(b) == {name("x"), name("y"), name("w")}
    assert parse_bunch(show_bunch(b)) == b
    with pytest.raises(ParseError):
        parse_bunch("x:@A ; x:@A")


def test_atomic_bunch():
    assert is_atomic_bunch(semi(x, y))
    assert not is_atomic_bunch(semi(x, Leaf(name("u"), OneM())))


@settings(max_examples=300, deadline=None)
@given(bunches())
def test_canon_idempotent(b):
    assert canon(canon(b)) == canon(b)


@settings(max_examples=300, deadline=None)
@given(bunches(), st.randoms(use_true_random=False))
def test_canon_decides_equivalence(b, rnd):
    b2 = shuffle(b, rnd)
    assert norm(b) == norm(b2)
    assert canon(b) == canon(b2)
    assert norm(canon(b)) == norm(b)


@settings(max_examples=200, deadline=None)
@given(bunches(), bunches())
def test_canon_agrees_with_oracle(b1, b2):
    assert (canon(b1) == canon(b2)) == (norm(b1) == norm(b2))


@settings(max_examples=200, deadline=None)
@given(bunches())
def test_positions_refill(b):
    for ctx, sub in positions(b):
        assert fill(ctx, sub) == canon(b)


@settings(max_examples=200, deadline=None)
@given(bunches(), st.sampled_from([SEMI, COMMA]))
def test_unit_positions_refill(b, op):
    for ctx in unit_positions(b, op):
        assert fill(ctx, unit_of(op)) == canon(b)


@settings(max_examples=200, deadline=None)
@given(bunches(), st.sampled_from([SEMI, COMMA]))
def test_split_rejoins(b, op):
    for d1, d2 in split(b, op):
        assert join(op, [d1, d2]) == canon(b)


@settings(max_examples=200, deadline=None)
@given(bunches(), st.sampled_from([SEMI, COMMA]))
def test_neighbourhoods_refill(b, op):
    for l in leaves(b):
        for ctx, d, leaf in neighbourhoods(b, l.name, op):
            assert leaf.name == l.name
            assert fill(ctx, join(op, [d, leaf])) == canon(b)


@settings(max_examples=200, deadline=None)
@given(bunches())
def test_positions_with_names(b):
    names = ident(b)
    for ctx, sub in positions_with_names(b, names):
        assert ident(sub) == names
        assert fill(ctx, sub) == canon(b)
