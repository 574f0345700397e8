import pytest

from pibi.bunches import parse_bunch
from pibi.corpus import examples, load
from pibi.syntax import name, parse_process, parse_type
from pibi.typing import Derivation, TypeFailure, check, check_subject_reduction, verify_derivation

z = name("z")


def judge(bunch: str, proc: str, chan: str, typ: str):
    return check(parse_bunch(bunch), parse_process(proc), name(chan), parse_type(typ))


def rules(der: Derivation) -> list[str]:
    out = [der.rule]
    for p in der.premises:
        out += rules(p)
    return out


def test_unusual_is_accepted():
    ex = load("unusual")
    der = check(*ex.judgment)
    assert der
    assert verify_derivation(der)
    assert "Struct" in rules(der)


def test_linear_to_nonlinear_conversion_is_rejected():
    res = judge("x:@A -* @B", "z?(a).x![b].(fwd b <- a || fwd z <- x)", "z", "@A -> @B")
    assert isinstance(res, TypeFailure)
    assert res.rule != "budget"  # the search space was exhausted, not cut off


def test_the_same_candidate_types_linearly():
    assert judge("x:@A -* @B", "z?(a).x![b].(fwd b <- a || fwd z <- x)", "z", "@A -* @B")


def test_binding_derivation_example():
    ex = load("binding_derivation")
    der = check(*ex.judgment)
    assert der
    structs = [n for n in der.nodes() if n.rule == "Struct"]
    assert structs
    kinds = sorted(st.kind for st in structs[0].binding.steps)
    assert kinds == ["contract", "weaken"]


@pytest.mark.parametrize("ex", examples(), ids=lambda e: e.name)
def test_corpus_status(ex):
    der = check(*ex.judgment)
    assert bool(der) == ex.typed
    if der:
        assert verify_derivation(der)


def test_forwarder_rule():
    der = judge("x:@A", "fwd z <- x", "z", "@A")
    assert der.rule == "Fwd"


def test_no_weakening_under_semicolon():
    assert not judge("x:@A ; y:@B", "spawn{y -> {}}.fwd z <- x", "z", "@A")
    assert judge("x:@A , y:@B", "spawn{y -> {}}.fwd z <- x", "z", "@A")
    # unused names must be disposed of explicitly
    assert not judge("x:@A , y:@B", "fwd z <- x", "z", "@A")


def test_separating_pair_needs_disjoint_resources():
    assert judge("x:@A ; y:@B", "z![a].(fwd a <- x || fwd z <- y)", "z", "@A * @B")
    assert not judge("x:@A , y:@B", "z![a].(fwd a <- x || fwd z <- y)", "z", "@A * @B")
    assert judge("x:@A , y:@B", "z![a].(fwd a <- x || fwd z <- y)", "z", "@A /\\ @B")


def test_failure_reports_deepest_branch():
    res = judge("0m", "z?().z!()", "z", "1m")
    assert isinstance(res, TypeFailure)
    assert str(res)


@pytest.mark.parametrize("label", ["server_clients", "failures_available", "delegation", "contraction"])
def test_subject_reduction(label):
    rep = check_subject_reduction(*load(label).judgment, 3)
    assert rep.ok, rep.violations
    assert rep.states > 1
