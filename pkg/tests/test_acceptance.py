"""One test per acceptance criterion; each records a pass/fail line with its timing."""

import itertools
import statistics
import time
from functools import lru_cache

import pytest

from conftest import (
    ACCEPTANCE_LINES, all_bindings, chained, same_judgment_pairs, sb,
    states_after,
)
from pibi.alphalambda import completeness_harness, soundness_harness, translate, typecheck_term
from pibi.bunches import parse_bunch
from pibi.corpus import examples, load, term_examples
from pibi.denot import PairConj, PairSep, TagUniverse, denot_eq, sem_process
from pibi.normalize import normalize, skel_lt, skel_of
from pibi.observe import barbed_eq_bounded, deadlock_check
from pibi.reduction import congruence_class, congruent, reachable, redexes
from pibi.spawn import merge
from pibi.syntax import alpha_eq, name, parse_process as pp, parse_type
from pibi.typing import TypeFailure, check, check_subject_reduction


def record(n: int, ok: bool, seconds: float, limit: float, detail: str) -> bool:
    passed = ok and seconds < limit
    ACCEPTANCE_LINES.append(
        f"criterion {n:>2}: {'PASS' if passed else 'FAIL'}  {seconds * 1000:9.2f} ms"
        f" (limit {limit * 1000:g} ms)  {detail}")
    print(ACCEPTANCE_LINES[-1])
    return passed


def reaches(p, target, n: int) -> bool:
    return any(congruent(q, target) for q in states_after(p, n).values())


# ---------------------------------------------------------------- 1


def test_criterion_1_merge_example():
    s1, s2 = sb("x ->; y -> y1 y2 y3"), sb("y2 ->; y3 -> y4 y5; z -> z1")
    want = sb("x ->; y -> y1 y4 y5; z -> z1")
    times, got = [], None
    for _ in range(20):
        t = time.perf_counter()
        got = merge(s1, s2)
        times.append(time.perf_counter() - t)
    ok = got == want
    assert record(1, ok, statistics.median(times), 1e-3, f"merge = {got}")


# ---------------------------------------------------------------- 2


def test_criterion_2_contraction_and_weakening():
    t = time.perf_counter()
    c = redexes(pp("new x.(z?().x!() || spawn{x -> {x1, x2}}.x1?().x2?().v!())"))
    w = redexes(pp("new x.(z?().x!() || spawn{x -> {}}.v!())"))
    ok = (
        len(c) == 1 and alpha_eq(c[0].result, pp(
            "spawn{z -> {z1, z2}}.new x1.(z1?().x1!() || new x2.(z2?().x2!() || x1?().x2?().v!()))"))
        and len(w) == 1 and alpha_eq(w[0].result, pp("spawn{z -> {}}.v!()"))
    )
    assert record(2, ok, time.perf_counter() - t, 10e-3, "contracta equal up to alpha")


# ---------------------------------------------------------------- 3

FAIL_MID = pp("new z.(z?(q).spawn{q -> {}}.z!() || new u.(u!() || z![w].(fwd w <- u || z?().v!())))")
FAIL_END = pp("new u.(u!() || new z.(spawn{u -> {}}.z!() || z?().v!()))")


def test_criterion_3_examples():
    t = time.perf_counter()
    checks = {}
    server = load("server_clients").process
    checks["server communicates first"] = reaches(
        server, pp("new x.(x!() || spawn{x -> {x1, x2}}.x1?().x2?().v!())"), 1)
    avail = load("failures_available").process
    checks["available: 3 steps to the middle"] = reaches(avail, FAIL_MID, 3)
    checks["available: end state reached"] = reaches(FAIL_MID, FAIL_END, 2)
    unavail = load("failures_unavailable").process
    umid = pp("new z.(z?(q).spawn{q -> {}}.z!() || spawn{z -> {}}.v!())")
    checks["unavailable: 2 steps"] = reaches(unavail, umid, 2)
    checks["unavailable: then 1 step"] = reaches(umid, pp("spawn{}.v!()"), 1)
    deleg = load("delegation").process
    spawn_first = pp("new x.(x![y].(y!() || x!()) || spawn{x -> {}}.v!())")
    dmid = pp("new y.(y!() || new z.(y?().z!() || spawn{z -> {}}.v!()))")
    sync_first = pp("new y.(y!() || spawn{y -> {}}.v!())")
    checks["delegation: spawn first reaches x"] = reaches(deleg, spawn_first, 1)
    checks["delegation: sync first, 2 steps"] = reaches(deleg, dmid, 2)
    checks["delegation: then reaches y"] = reaches(dmid, sync_first, 1)
    checks["delegation: targets differ"] = not congruent(spawn_first, sync_first)
    elapsed = time.perf_counter() - t
    # the stated 3-step count for the second available segment cannot be met: a
    # communication on z and one forwarder step reach the end state, and no state at
    # distance exactly 3 is congruent to it (checked separately below)
    displayed = reaches(FAIL_MID, FAIL_END, 3)
    failed = [k for k, v in checks.items() if not v]
    detail = "all end states reproduced" if not failed else "failed: " + ", ".join(failed)
    if not displayed:
        detail += "; stated count 3 for the second available segment unattainable (takes 2)"
    record(3, not failed and displayed, elapsed, 50e-3, detail)
    assert not failed
    assert elapsed < 50e-3


@pytest.mark.xfail(strict=True, reason="the stated count of 3 is unattainable; the segment takes 2 steps")
def test_criterion_3_stated_count_of_second_available_segment():
    assert reaches(FAIL_MID, FAIL_END, 3)


# ---------------------------------------------------------------- 4


def test_criterion_4_typing():
    t = time.perf_counter()
    unusual = check(*load("unusual").judgment)
    dill = check(parse_bunch("x:@A -* @B"), pp("z?(a).x![b].(fwd b <- a || fwd z <- x)"),
                 name("z"), parse_type("@A -> @B"))
    psi = check(*load("binding_derivation").judgment)
    kinds = []
    if psi:
        st = next(n for n in psi.nodes() if n.rule == "Struct")
        kinds = sorted(s.kind for s in st.binding.steps)
    ok = (bool(unusual) and isinstance(dill, TypeFailure) and dill.rule != "budget"
          and kinds == ["contract", "weaken"])
    assert record(4, ok, time.perf_counter() - t, 1.0,
                  "unusual accepted; linear-to-shared rejected exhaustively; binding derivation found")


# ---------------------------------------------------------------- 5


def test_criterion_5_subject_reduction():
    t = time.perf_counter()
    violations, states = [], 0
    for ex in examples(typed=True):
        rep = check_subject_reduction(*ex.judgment, 5)
        states += rep.states
        violations += rep.violations
    ok = not violations
    assert record(5, ok, time.perf_counter() - t, 30.0,
                  f"{states} states re-checked, {len(violations)} violations")


# ---------------------------------------------------------------- 6


def test_criterion_6_deadlock_freedom():
    t = time.perf_counter()
    bad, n = [], 0
    for ex in examples(typed=True):
        if ex.closed_unit:
            n += 1
            v = deadlock_check(ex.process, ex.chan)
            if not v.ok or v.normal_clause not in ("i", "ii"):
                bad.append(ex.name)
    ok = not bad and n > 0
    assert record(6, ok, time.perf_counter() - t, 10.0, f"{n} closed processes, {len(bad)} violations")


# ---------------------------------------------------------------- 7


def test_criterion_7_weak_normalization():
    t = time.perf_counter()
    bad = []
    untyped = 0
    for ex in examples():
        untyped += not ex.typed
        run = normalize(ex.process)
        if redexes(run.result) or not all(skel_lt(r.after, r.before) for r in run.rounds):
            bad.append(ex.name)
    skel = skel_of(load("skeleton").process).as_dict()
    ok = not bad and untyped >= 2 and skel == {0: 5, 1: 4, 2: 3}
    assert record(7, ok, time.perf_counter() - t, 10.0,
                  f"{len(examples())} processes ({untyped} untyped), skeleton {skel}")


# ---------------------------------------------------------------- 8

PRIMITIVE_RULES = {"beta-wand", "beta-impl", "proj", "unit-m", "unit-a", "pair", "case"}


def test_criterion_8_operational_correspondence():
    t = time.perf_counter()
    corpus = [e for e in term_examples() if e.status == "ok"]
    gaps = [e.name for e in term_examples() if e.status != "ok"]
    open_diagrams, rules = 0, set()
    for ex in corpus:
        c = completeness_harness(*ex.judgment, depth=5)
        s = soundness_harness(*ex.judgment, depth=5)
        open_diagrams += len(c.open) + len(s.open)
        rules |= {e["rule"] for e in c.closed}
    ok = not open_diagrams and len(corpus) >= 20 and rules == PRIMITIVE_RULES
    assert record(8, ok, time.perf_counter() - t, 60.0,
                  f"{len(corpus)} terms, {len(rules)}/7 rules, {open_diagrams} open diagrams"
                  f" (known reflection gaps kept apart: {', '.join(gaps)})")


# ---------------------------------------------------------------- 9


def test_criterion_9_denotations():
    t = time.perf_counter()
    u2 = TagUniverse.of_size(2)
    problems = []
    for ex in examples(typed=True):
        states = [q for q, _ in reachable(ex.process, 3).values()]
        states += [q for q, _ in list(congruence_class(ex.process, scope="all").values())[:20]]
        for q in states:
            if not denot_eq(ex.process, q, ex.bunch, ex.chan, ex.type, u2):
                problems.append(f"invariance {ex.name}")
    for u in (TagUniverse.of_size(1), u2):
        shared = check(*load("provenance_shared").judgment)
        separate = check(*load("provenance_separate").judgment)
        for d in u.subsets():
            for v in sem_process(shared, d, u).values():
                if not (isinstance(v, PairConj) and v.left == v.right):
                    problems.append("provenance shared")
            for v in sem_process(separate, d, u).values():
                if not (isinstance(v, PairSep) and v.left != v.right):
                    problems.append("provenance separate")
    pairs = 0
    for ex in term_examples():
        if ex.status != "ok":
            continue
        for entry in completeness_harness(*ex.judgment).closed:
            q, n = entry["pair"]
            pairs += 1
            p = translate(typecheck_term(ex.bunch, n, ex.type), "z")
            if not denot_eq(q, p, ex.bunch, "z", ex.type, u2):
                problems.append(f"sublift {ex.name}")
    distinguished = 0
    for b, z, a, p, q in same_judgment_pairs():
        if barbed_eq_bounded(p, q, depth=4).distinguished:
            distinguished += 1
            if denot_eq(p, q, b, z, a, u2):
                problems.append("contradicts a barbed distinction")
    ok = not problems
    assert record(9, ok, time.perf_counter() - t, 60.0,
                  f"{pairs} sublift pairs, {distinguished} barbed distinctions, {len(problems)} violations")


# ---------------------------------------------------------------- 10


def test_criterion_10_merge_enumeration():
    t = time.perf_counter()
    bs = all_bindings(["a", "b", "c", "d"], 2)
    mg = lru_cache(maxsize=None)(lambda s, r: merge(s, r, check=False))
    invalid = 0
    pairs = 0
    for s1, s2 in itertools.product(bs, repeat=2):
        if chained(s1, s2):
            pairs += 1
            invalid += not mg(s1, s2).is_valid()
    triples = 0
    non_assoc = 0
    for s1, s2, s3 in itertools.product(bs, repeat=3):
        if chained(s1, s2) and chained(s2, s3) and chained(s1, s3):
            triples += 1
            non_assoc += mg(mg(s1, s2), s3) != mg(s1, mg(s2, s3))
    ok = not invalid and not non_assoc and triples > 0
    assert record(10, ok, time.perf_counter() - t, 10.0,
                  f"{len(bs)} bindings; {pairs} consecutive pairs, {invalid} invalid merges;"
                  f" {triples} consecutive triples, {non_assoc} non-associative")
