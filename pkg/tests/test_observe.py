import pytest
from hypothesis import given, settings

from conftest import processes
from pibi.corpus import examples, load
from pibi.observe import (
    Barb, active_names, barbed_eq_bounded, barbs, deadlock_check, progress_check, ready,
    weak_barbs,
)
from pibi.reduction import reachable
from pibi.syntax import name, parse_process as pp

x, y, z = name("x"), name("y"), name("z")


def test_barbs_of_prefixes():
    assert barbs(pp("z!()")) == {Barb(z, "close")}
    assert barbs(pp("y?().z!()")) == {Barb(y, "wait")}
    assert barbs(pp("case z { inl: z!() ; inr: z!() }")) == {
        Barb(z, "in-branch-l"), Barb(z, "in-branch-r")}
    assert barbs(pp("fwd z <- x")) == set()


def test_barbs_hide_restricted_names():
    assert barbs(pp("new x.(x!() || x?().z!())")) == set()
    assert barbs(pp("new x.(x!() || y?().z!())")) == {Barb(y, "wait")}
    assert barbs(pp("spawn{x -> {x1}}.x1!()")) == set()


def test_unknown_barb_kind():
    with pytest.raises(ValueError):
        Barb(z, "shout")


def test_active_names():
    assert active_names(pp("fwd z <- x")) == {x, z}
    assert active_names(pp("spawn{x -> {x1}}.x1!()")) == {x}
    assert active_names(pp("new x.(x!() || y?().z!())")) == {y}


def test_readiness():
    assert ready(pp("new x.(x!() || x?().z!())"))
    assert ready(pp("new x.(x!() || fwd z <- x)"))
    assert ready(pp("new x.(spawn{}.x!() || x?().z!())"))
    assert not ready(pp("new x.(x!() || y?().z!())"))
    assert not ready(pp("z!()"))


def test_weak_barbs_follow_reductions():
    assert weak_barbs(pp("new x.(x!() || x?().z!())")) == {Barb(z, "close")}


@pytest.mark.parametrize("ex", [e for e in examples() if e.typed], ids=lambda e: e.name)
def test_progress_on_reachable_states(ex):
    for q, _ in reachable(ex.process, 3).values():
        rep = progress_check(ex.bunch, q, ex.chan, ex.type)
        assert rep.ok, q


@pytest.mark.parametrize("ex", [e for e in examples() if e.typed and e.closed_unit],
                         ids=lambda e: e.name)
def test_deadlock_trichotomy(ex):
    v = deadlock_check(ex.process, ex.chan)
    assert v.ok, v.violations
    assert v.normal_clause in ("i", "ii")
    assert v.clause in ("i", "ii", "iii")


def test_trichotomy_clauses():
    assert deadlock_check(pp("z!()"), z).clause == "i"
    assert deadlock_check(pp("spawn{}.z!()"), z).clause == "ii"
    assert deadlock_check(load("failures_available").process, name("v")).clause == "iii"


def test_stuck_process_is_reported():
    # untyped: the wait on y is never answered
    v = deadlock_check(pp("new x.(x!() || y?().z!())"), z)
    assert not v.ok


def test_barbed_equivalence():
    assert barbed_eq_bounded(pp("new x.(x!() || x?().z!())"), pp("z!()"))
    assert barbed_eq_bounded(pp("z!()"), pp("spawn{}.z!()"))
    v = barbed_eq_bounded(pp("z!()"), pp("v!()"))
    assert v.distinguished
    assert "close z" in v.witness


def test_distinction_after_a_step():
    # both start without barbs; only one of them ever closes z
    p = pp("new x.(x!() || x?().z!())")
    q = pp("new x.(x!() || x?().new y.(y!() || w?().y?().z!()))")
    assert barbed_eq_bounded(p, q).distinguished
    assert not barbed_eq_bounded(p, q, depth=0).distinguished


@settings(max_examples=60, deadline=None)
@given(processes)
def test_barbed_equivalence_is_reflexive(p):
    try:
        v = barbed_eq_bounded(p, p, depth=2, budget=200)
    except RuntimeError:
        return
    assert not v.distinguished


@settings(max_examples=60, deadline=None)
@given(processes, processes)
def test_barbed_distinction_is_symmetric(p, q):
    try:
        a = barbed_eq_bounded(p, q, depth=2, budget=200)
        b = barbed_eq_bounded(q, p, depth=2, budget=200)
    except RuntimeError:
        return
    if "budget-exhausted" not in (a.verdict, b.verdict):
        assert a.distinguished == b.distinguished

