"""Observations: barbs, active names, readiness, progress and deadlock checks.

Barbed equivalence is coinductive; ``barbed_eq_bounded`` only explores the
reduction graph to a fixed depth, so it refutes soundly and affirms only up
to that depth.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .normalize import normalize
from .reduction import class_key, congruence_class, congruent, redexes
from .syntax import (
    Branch, Close, Cut, Fwd, Input, Name, Output, Process, SelL, SelR, Spawn, SpawnBinding,
    Wait, show,
)
from .typing import typable

__all__ = [
    "Barb", "BARB_KINDS", "barbs", "active_names", "ready", "ProgressReport", "progress_check",
    "DeadlockVerdict", "deadlock_check", "weak_barbs", "BarbedVerdict", "barbed_eq_bounded",
]

BARB_KINDS = ("out-select-l", "out-select-r", "in-branch-l", "in-branch-r",
              "out", "in", "wait", "close")


@dataclass(frozen=True, order=True)
class Barb:
    channel: Name
    kind: str

    def __post_init__(self):
        if self.kind not in BARB_KINDS:
            raise ValueError(f"unknown barb kind {self.kind!r}")

    def __str__(self) -> str:
        return f"{self.kind} {self.channel}"

    def to_json(self) -> dict:
        return {"channel": str(self.channel), "kind": self.kind}


def barbs(p: Process) -> frozenset[Barb]:
    match p:
        case SelL(x, _):
            return frozenset({Barb(x, "out-select-l")})
        case SelR(x, _):
            return frozenset({Barb(x, "out-select-r")})
        case Branch(x, _, _):
            return frozenset({Barb(x, "in-branch-l"), Barb(x, "in-branch-r")})
        case Output(x, _, _, _):
            return frozenset({Barb(x, "out")})
        case Input(x, _, _):
            return frozenset({Barb(x, "in")})
        case Wait(x, _):
            return frozenset({Barb(x, "wait")})
        case Close(x):
            return frozenset({Barb(x, "close")})
        case Cut(x, P, Q):
            return frozenset(b for b in barbs(P) | barbs(Q) if b.channel != x)
        case Spawn(s, P):
            hidden = s.restrictions
            return frozenset(b for b in barbs(P) if b.channel not in hidden)
    return frozenset()


def active_names(p: Process) -> frozenset[Name]:
    match p:
        case Fwd(x, y):
            return frozenset({x, y})
        case Cut(x, P, Q):
            return (active_names(P) | active_names(Q)) - {x}
        case Spawn(s, P):
            return s.dom | (active_names(P) - s.restrictions)
        case Output(x, _, _, _) | Input(x, _, _) | Close(x) | Wait(x, _) | SelL(x, _) | SelR(x, _) | Branch(x, _, _):
            return frozenset({x})
    raise TypeError(p)


def _ready_here(p: Process) -> bool:
    match p:
        case Spawn(_, Spawn()):
            return True
        case Spawn(_, P):
            return _ready_here(P)
        case Cut(x, P, Q):
            if x in active_names(P) & active_names(Q):
                return True
            if isinstance(P, Spawn) or isinstance(Q, Spawn):
                return True
            if isinstance(P, Fwd) and P.x == x or isinstance(Q, Fwd) and Q.y == x:
                return True
            return _ready_here(P) or _ready_here(Q)
    return False


def ready(p: Process) -> bool:
    """Readiness, decided over the congruence class of p."""
    return any(_ready_here(q) for q, _ in congruence_class(p).values())


@dataclass
class ProgressReport:
    typed: bool
    ready: bool
    reducible: bool

    @property
    def ok(self) -> bool:
        return not (self.typed and self.ready) or self.reducible


def progress_check(d, p: Process, x: Name, a) -> ProgressReport:
    return ProgressReport(typable(d, p, x, a), ready(p), bool(redexes(p)))


# ---------------------------------------------------------------- deadlock freedom


def _clause(p: Process, z: Name) -> str | None:
    if congruent(p, Close(z)):
        return "i"
    if congruent(p, Spawn(SpawnBinding(), Close(z))):
        return "ii"
    if redexes(p):
        return "iii"
    return None


@dataclass
class DeadlockVerdict:
    clause: str | None  # "i", "ii", "iii" for the start process, None if stuck
    normal_form: Process
    normal_clause: str | None
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"clause": self.clause, "normal_form": show(self.normal_form),
                "normal_clause": self.normal_clause, "violations": self.violations}


def deadlock_check(p: Process, z: Name, max_steps: int = 100_000) -> DeadlockVerdict:
    """Normalize p and check every visited state against the trichotomy."""
    run = normalize(p, max_steps)
    violations = []
    states = [p] + [r.result for r in run.rounds]
    for q in states:
        if _clause(q, z) is None:
            violations.append(f"stuck: {show(q)}")
    nf = run.result
    nc = _clause(nf, z)
    if nc not in ("i", "ii"):
        violations.append(f"normal form is neither z!() nor spawn{{}}.z!(): {show(nf)}")
    return DeadlockVerdict(_clause(p, z), nf, nc, violations)


# ---------------------------------------------------------------- weak barbs and equivalence


class _Graph:
    """Reduction graph explored lazily, states keyed by congruence class."""

    def __init__(self, budget: int = 5000):
        self.budget = budget
        self.succ: dict = {}
        self.proc: dict = {}
        self.exhausted = False

    def key(self, p: Process):
        k = class_key(p)
        self.proc.setdefault(k, p)
        return k

    def successors(self, k) -> list:
        if k not in self.succ:
            if len(self.succ) >= self.budget:
                self.exhausted = True
                return []
            self.succ[k] = sorted({self.key(r.result) for r in redexes(self.proc[k], modulo="congruence")},
                                  key=repr)
        return self.succ[k]

    def closure(self, k) -> set:
        seen = {k}
        todo = [k]
        while todo:
            for n in self.successors(todo.pop()):
                if n not in seen:
                    seen.add(n)
                    todo.append(n)
        return seen

    def barbs(self, k) -> frozenset[Barb]:
        return barbs(self.proc[k])

    def weak(self, k) -> frozenset[Barb]:
        out = set()
        for n in self.closure(k):
            out |= self.barbs(n)
        return frozenset(out)


def weak_barbs(p: Process, budget: int = 5000) -> frozenset[Barb]:
    """Barbs of every state reachable from p (within the state budget).

    If the budget cuts the search, the barbs of the normal form found by the
    normalizing strategy are added.
    """
    g = _Graph(budget)
    out = set(g.weak(g.key(p)))
    if g.exhausted:
        out |= barbs(normalize(p).result)
    return frozenset(out)


@dataclass
class BarbedVerdict:
    verdict: str  # "distinguished", "indistinguishable-to-depth" or "budget-exhausted"
    depth: int
    witness: str = ""

    @property
    def distinguished(self) -> bool:
        return self.verdict == "distinguished"

    def __bool__(self) -> bool:
        return not self.distinguished


def barbed_eq_bounded(p: Process, q: Process, depth: int = 4, budget: int = 5000) -> BarbedVerdict:
    """Bounded barbed-equivalence game on the reduction graphs of p and q."""
    g = _Graph(budget)
    memo: dict = {}

    def matched(a, b) -> str:
        wb = g.weak(b)
        for x in g.barbs(a):
            if x not in wb:
                return f"{show(g.proc[a])} has barb {x} that {show(g.proc[b])} cannot reach"
        return ""

    def dist(a, b, n) -> str:
        """Reason why a and b are told apart within n rounds, or ''."""
        key = (a, b, n)
        if key in memo:
            return memo[key]
        memo[key] = ""
        why = matched(a, b) or matched(b, a)
        if not why and n > 0:
            why = move(a, b, n) or move(b, a, n)
        memo[key] = why
        return why

    def move(a, b, n) -> str:
        answers = g.closure(b)
        for a2 in g.successors(a):
            if all(dist(a2, b2, n - 1) for b2 in answers):
                return f"{show(g.proc[a])} -> {show(g.proc[a2])} has no matching answer"
        return ""

    why = dist(g.key(p), g.key(q), depth)
    if g.exhausted:
        return BarbedVerdict("budget-exhausted", depth, why)
    if why:
        return BarbedVerdict("distinguished", depth, why)
    return BarbedVerdict("indistinguishable-to-depth", depth)
