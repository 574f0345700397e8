import warnings

import pytest
from hypothesis import given, settings

from conftest import processes, types
from pibi.syntax import (
    Atom, Close, Cut, Fwd, Impl, Name, OneM, ParseError, Sep, Spawn, SpawnBinding, Wait,
    Wand, alpha_eq, bound_names, free_names, is_barendregt, name, parse_process, parse_type, rename,
    show, show_type,
)

x, z, v = name("x"), name("z"), name("v")


def test_parse_cut():
    p = parse_process("new x.(x!() || x?().z!())")
    assert p == Cut(x, Close(x), Wait(x, Close(z)))


def test_parse_spawn():
    p = parse_process("spawn{x -> {x1,x2}}.fwd v <- x1")
    assert isinstance(p, Spawn)
    assert p.binding == SpawnBinding({x: {name("x1"), name("x2")}})


def test_parse_forwarder():
    assert parse_process("fwd z <- x") == Fwd(z, x)


def test_parse_comments_and_layout():
    p = parse_process("-- a comment\nnew x.(\n  x!()   -- provider\n  || x?().z!())")
    assert p == Cut(x, Close(x), Wait(x, Close(z)))


def test_parse_error_has_position():
    with pytest.raises(ParseError) as e:
        parse_process("new x.(x!() ||")
    assert e.value.line == 1


def test_duplicate_binders_are_renamed_with_a_warning():
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        p = parse_process("new x.(x!() || new x.(x!() || x?().x?().z!()))")
    assert w
    assert is_barendregt(p)


def test_free_names_of_spawn():
    p = parse_process("spawn{x -> {x1, x2}}.x1?().x2?().v!()")
    assert free_names(p) == {x, v}


def test_free_names_of_forwarder_and_cut():
    assert free_names(Fwd(z, x)) == {z, x}
    assert free_names(Cut(x, Close(x), Wait(x, Close(z)))) == {z}


def test_alpha_eq():
    p = parse_process("new x.(x!() || x?().z!())")
    assert alpha_eq(p, parse_process("new w.(w!() || w?().z!())"))
    assert not alpha_eq(p, parse_process("new x.(x!() || x?().v!())"))
    assert alpha_eq(p, p)


def test_alpha_eq_spawn_images():
    p = parse_process("spawn{x -> {a, b}}.a?().b?().v!()")
    q = parse_process("spawn{x -> {c, d}}.c?().d?().v!()")
    assert alpha_eq(p, q)
    # images are sets, so the copies may be swapped
    assert alpha_eq(p, parse_process("spawn{x -> {c, d}}.d?().c?().v!()"))
    assert not alpha_eq(p, parse_process("spawn{y -> {c, d}}.d?().c?().v!()"))


def test_names_print_injectively():
    assert str(Name("x", 3)) == "x#3"
    assert name("x#3") == Name("x", 3)
    assert name("x") != Name("x", 3)


def test_type_grammar():
    assert parse_type("@A -* @B -> @C") == Wand(Atom("A"), Impl(Atom("B"), Atom("C")))
    assert parse_type("1m * 1m * 1m") == Sep(Sep(OneM(), OneM()), OneM())
    assert show_type(parse_type("(@A -* @B) /\\ 1a")) == "(@A -* @B) /\\ 1a"


@settings(max_examples=300, deadline=None)
@given(processes)
def test_print_parse_round_trip(p):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        q = parse_process(show(p))
    assert alpha_eq(p, q)


@settings(max_examples=300, deadline=None)
@given(processes)
def test_parsed_processes_are_barendregt(p):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        q = parse_process(show(p))
    bound = bound_names(q)
    assert len(bound) == len(set(bound))
    assert not set(bound) & free_names(q)


@settings(max_examples=200, deadline=None)
@given(processes)
def test_free_names_invariant_under_alpha(p):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        q = parse_process(show(p))
    assert free_names(p) == free_names(q)


@settings(max_examples=200, deadline=None)
@given(types)
def test_type_round_trip(t):
    assert parse_type(show_type(t)) == t


def test_rename_free_names_only():
    p = parse_process("new x.(x!() || x?().z!())")
    assert free_names(rename(p, {z: v})) == {v}
    assert alpha_eq(rename(p, {x: v}), p)
