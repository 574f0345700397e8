import itertools

import pytest
from hypothesis import given, settings

from conftest import closed_instance, same_judgment_pairs, types
from pibi.alphalambda import completeness_harness, translate, typecheck_term
from pibi.bunches import parse_bunch
from pibi.corpus import examples, load, term_examples
from pibi.denot import (
    DenotError, DenotSizeError, PairConj, PairSep, Tag, TagUniverse, bunch_values, denot_eq,
    sem_binding, sem_process, sem_size, sem_type,
)
from pibi.observe import barbed_eq_bounded
from pibi.reduction import congruence_class, reachable
from pibi.spawn import check_binding
from pibi.syntax import Close, Cut, SpawnBinding, name, parse_process as pp, parse_type as pt
from pibi.typing import check

U1, U2 = TagUniverse.of_size(1), TagUniverse.of_size(2)
T12 = frozenset({"t1", "t2"})


def wand_size_oracle(n_tags: int, d: int) -> int:
    # ⟦@A -* @B⟧(D): one table per extension D' of D, |D ∪ D'|^|D'| entries each
    rest = n_tags - d
    out = 1
    for k in range(rest + 1):
        out *= ((d + k) ** k) ** len(list(itertools.combinations(range(rest), k)))
    return out


def test_separated_pair_of_atoms():
    got = sem_type(pt("@s * @s"), T12, U2)
    assert len(got) == 2
    assert {(v.left, v.right) for v in got} == {(Tag("t1"), Tag("t2")), (Tag("t2"), Tag("t1"))}
    assert len(sem_type(pt("@s /\\ @s"), T12, U2)) == 4


def test_unit_readings():
    assert sem_size(pt("1m"), frozenset(), U2) == 1
    assert sem_size(pt("1m"), T12, U2) == 0
    assert sem_size(pt("1m"), T12, TagUniverse.of_size(2, unit="constant")) == 1
    assert sem_size(pt("1a"), T12, U2) == 1


def test_function_space_sizes():
    u = TagUniverse.of_size(3)
    for d in u.subsets():
        assert sem_size(pt("@A -> @B"), d, u) == len(d) ** len(d)
        assert sem_size(pt("@A -* @B"), d, u) == wand_size_oracle(3, len(d))


@settings(max_examples=200, deadline=None)
@given(types)
def test_size_matches_enumeration(a):
    for d in U2.subsets():
        try:
            vals = sem_type(a, d, U2)
        except DenotSizeError:
            assert sem_size(a, d, U2) > U2.cap
            continue
        assert len(vals) == sem_size(a, d, U2)
        assert len(set(vals)) == len(vals)


def test_size_cap():
    with pytest.raises(DenotSizeError):
        sem_type(pt("(@A -> @A) -> @A -> @A"), T12 | {"t3"}, TagUniverse(cap=100))


@pytest.mark.parametrize("u", [U1, U2], ids=["1 tag", "2 tags"])
def test_provenance(u):
    shared = load("provenance_shared")
    separate = load("provenance_separate")
    for d in u.subsets():
        for v in sem_process(check(*shared.judgment), d, u).values():
            assert isinstance(v, PairConj) and v.left == v.right
        for v in sem_process(check(*separate.judgment), d, u).values():
            assert isinstance(v, PairSep) and v.left != v.right
    # two separated sessions need two tags to exist at all
    assert len(sem_process(check(*separate.judgment), u.all, u)) == (2 if len(u.tags) == 2 else 0)


def test_contraction_and_weakening_on_values():
    src = parse_bunch("w:@B ; (x:@A , y:1a)")
    bd = check_binding(SpawnBinding({name("x"): {name("x1"), name("x2")}, name("y"): set()}),
                       src, parse_bunch("w:@B ; (x1:@A , x2:@A)"))
    u = TagUniverse.of_size(3)
    for d in u.subsets():
        for v in bunch_values(src, d, u):
            before = v.env()
            after = sem_binding(bd, v).env()
            assert set(after) == {name("w"), name("x1"), name("x2")}
            assert after[name("w")] == before[name("w")]
            assert after[name("x1")] == after[name("x2")] == before[name("x")]


@pytest.mark.parametrize("ex", examples(typed=True), ids=lambda e: e.name)
def test_invariant_under_reduction(ex):
    for q, _ in reachable(ex.process, 3).values():
        v = denot_eq(ex.process, q, ex.bunch, ex.chan, ex.type, U2)
        assert v, v.witness


@pytest.mark.parametrize("ex", examples(typed=True), ids=lambda e: e.name)
def test_invariant_under_congruence(ex):
    for q, _ in list(congruence_class(ex.process, scope="all").values())[:20]:
        assert denot_eq(ex.process, q, ex.bunch, ex.chan, ex.type, U2)


def test_constant_unit_cannot_drop_tagged_units():
    ex = load("contraction")
    der = check(*ex.judgment)
    assert sem_process(der, T12, U2) is not None
    with pytest.raises(DenotError):
        for d in U2.subsets():
            sem_process(der, d, TagUniverse.of_size(2, unit="constant"))


def test_copying_is_told_apart_from_using_both():
    b, a = parse_bunch("y1:@s , y2:@s"), pt("@s /\\ @s")
    both = pp("x![a].(fwd a <- y1 || fwd x <- y2)")
    copy = pp("spawn{y2 -> {}}.spawn{y1 -> {y3, y4}}.x![a].(fwd a <- y3 || fwd x <- y4)")
    v = denot_eq(both, copy, b, "x", a, U2)
    assert not v
    assert v.verdict == "not-provably-equivalent"
    assert denot_eq(both, both, b, "x", a, U2).verdict == "equivalent (denotationally)"


def test_process_outside_its_judgment():
    with pytest.raises(DenotError):
        denot_eq(pp("z!()"), pp("z!()"), parse_bunch("x:@A"), "z", pt("1m"))


@pytest.mark.parametrize("ex", [e for e in term_examples() if e.status == "ok"],
                         ids=lambda e: e.name)
def test_sublift_pairs_are_equal(ex):
    for entry in completeness_harness(*ex.judgment).closed:
        q, n = entry["pair"]
        p = translate(typecheck_term(ex.bunch, n, ex.type), "z")
        v = denot_eq(q, p, ex.bunch, "z", ex.type, U2)
        assert v, v.witness


def test_never_contradicts_a_barbed_distinction():
    distinguished = 0
    for b, z, a, p, q in same_judgment_pairs():
        if barbed_eq_bounded(p, q, depth=4).distinguished:
            distinguished += 1
            assert not denot_eq(p, q, b, z, a, U2)
    assert distinguished >= 2


def test_open_processes_can_lose_barbs_by_reducing():
    # a spawn moving onto z hides the wait on z; closing z removes the difference
    ex = load("binding_derivation")
    q = next(q for q, _ in reachable(ex.process, 2).values()
             if barbed_eq_bounded(ex.process, q).distinguished)
    assert "wait z" in barbed_eq_bounded(ex.process, q).witness
    assert denot_eq(ex.process, q, ex.bunch, ex.chan, ex.type, U2)
    _, p = closed_instance(ex)
    assert not barbed_eq_bounded(p, Cut(name("z"), Close(name("z")), q)).distinguished
