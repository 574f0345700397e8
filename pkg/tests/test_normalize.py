import pytest
from hypothesis import given, settings, strategies as st

from conftest import processes
from pibi.corpus import examples, load
from pibi.normalize import (
    NormalizationError, Skeleton, measure, normalize, skel_le, skel_lt, skel_of,
)
from pibi.reduction import redexes
from pibi.syntax import (
    Branch, Close, Cut, Fwd, Input, Output, SelL, SelR, Spawn, Wait, alpha_eq,
    parse_process as pp,
)


def prefix_depths(p, depth: int = 0) -> list[int]:
    """Spawn depth of every communication prefix and forwarder of p."""
    match p:
        case Fwd() | Close():
            return [depth]
        case Output(_, _, P, Q) | Branch(_, P, Q):
            return [depth] + prefix_depths(P, depth) + prefix_depths(Q, depth)
        case Input(_, _, P) | Wait(_, P) | SelL(_, P) | SelR(_, P):
            return [depth] + prefix_depths(P, depth)
        case Cut(_, P, Q):
            return prefix_depths(P, depth) + prefix_depths(Q, depth)
        case Spawn(_, P):
            return prefix_depths(P, depth + 1)


def skeleton_oracle(p) -> dict[int, int]:
    # level i counts the prefixes found under at least i spawn prefixes
    ds = prefix_depths(p)
    return {i: sum(1 for d in ds if d >= i) for i in range(max(ds) + 1)}


skeletons = st.lists(st.integers(0, 3), max_size=4).map(lambda c: Skeleton(tuple(c)))


def test_skeleton_example():
    assert skel_of(load("skeleton").process).as_dict() == {0: 5, 1: 4, 2: 3}


@settings(max_examples=300, deadline=None)
@given(processes)
def test_skeleton_agrees_with_oracle(p):
    assert skel_of(p).as_dict() == skeleton_oracle(p)


def test_order_compares_deepest_level_first():
    assert skel_lt(Skeleton((9, 9)), Skeleton((0, 0, 1)))
    assert skel_lt(Skeleton((1, 2)), Skeleton((2, 2)))
    assert not skel_lt(Skeleton((3,)), Skeleton((3, 0)))
    assert Skeleton((3, 0)) == Skeleton((3,))


@settings(max_examples=300, deadline=None)
@given(skeletons, skeletons, skeletons)
def test_order_is_strict_and_total(a, b, c):
    assert not skel_lt(a, a)
    assert skel_lt(a, b) + skel_lt(b, a) + (a == b) == 1
    if skel_lt(a, b) and skel_lt(b, c):
        assert skel_lt(a, c)
    assert skel_le(a, a)


def test_measure_skips_one_top_spawn():
    p = pp("spawn{}.z!()")
    assert measure(p) == Skeleton((1,))
    assert skel_of(p) == Skeleton((1, 1))


@pytest.mark.parametrize("ex", examples(), ids=lambda e: e.name)
def test_normalize_corpus(ex):
    run = normalize(ex.process)
    assert run.audit_ok
    assert redexes(run.result) == []
    for rnd in run.rounds:
        assert skel_lt(rnd.after, rnd.before)
    assert [s["step"] for s in run.trace] == list(range(run.steps))


def test_untyped_examples_are_included():
    names = {ex.name for ex in examples() if not ex.typed}
    assert {"merged_spawns", "unused_copy"} <= names


def test_failures_normal_forms():
    assert alpha_eq(normalize(load("failures_unavailable").process).result, pp("spawn{}.v!()"))
    assert alpha_eq(normalize(load("failures_available").process).result, pp("spawn{}.v!()"))


def test_step_budget():
    with pytest.raises(NormalizationError):
        normalize(load("failures_available").process, max_steps=2)


def test_normalization_is_deterministic():
    p = load("server_clients").process
    assert normalize(p).to_json() == normalize(p).to_json()
