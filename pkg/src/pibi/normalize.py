"""Weak normalization: skeletons, the measure, and the normalizing strategy.

A skeleton counts communication prefixes per spawn depth.  Skeletons are
compared from the deepest level down; the measure of a process is the
skeleton of its body with one top-level spawn prefix skipped.  The strategy
fires a communication or forwarder redex when there is one; otherwise it
fires the spawn redex of least depth and drives the resulting spawn prefix to
the top level.  Every such round must strictly decrease the measure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .reduction import (
    COMM_RULES, SPAWN_RULES, Redex, apply_rewrite, match_rules, redexes,
    replace_at, spawn_depth, subterm, trace_record,
)
from .syntax import (
    Branch, Close, Cut, Fwd, Input, Output, Process, SelL, SelR, Spawn, Supply, Wait,
    all_names, rename_apart, show,
)

__all__ = [
    "Skeleton", "skel_of", "skel_lt", "skel_le", "measure", "normalize", "Normalization",
    "NormalizationError", "MeasureAuditError",
]


class NormalizationError(RuntimeError):
    pass


class MeasureAuditError(NormalizationError):
    pass


@dataclass(frozen=True, order=False)
class Skeleton:
    """Finite map from depth to a count; zero beyond the stored levels."""

    counts: tuple[int, ...] = ()

    def __post_init__(self):
        c = list(self.counts)
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "counts", tuple(c))

    @classmethod
    def from_dict(cls, m: dict[int, int]) -> Skeleton:
        n = max(m, default=-1) + 1
        return cls(tuple(m.get(i, 0) for i in range(n)))

    def __getitem__(self, i: int) -> int:
        return self.counts[i] if 0 <= i < len(self.counts) else 0

    @property
    def depth(self) -> int:
        return max(len(self.counts) - 1, 0)

    def as_dict(self) -> dict[int, int]:
        return dict(enumerate(self.counts))

    def __add__(self, other: Skeleton) -> Skeleton:
        n = max(len(self.counts), len(other.counts))
        return Skeleton(tuple(self[i] + other[i] for i in range(n)))

    def shift(self) -> Skeleton:
        if not self.counts:
            return self
        return Skeleton((self.counts[0],) + self.counts)

    def __lt__(self, other: Skeleton) -> bool:
        return skel_lt(self, other)

    def __str__(self) -> str:
        return "{" + ", ".join(f"{i}: {c}" for i, c in enumerate(self.counts)) + "}"


ONE = Skeleton((1,))


def skel_of(p: Process) -> Skeleton:
    match p:
        case Fwd() | Close():
            return ONE
        case Output(_, _, P, Q) | Branch(_, P, Q):
            return ONE + skel_of(P) + skel_of(Q)
        case Input(_, _, P) | Wait(_, P) | SelL(_, P) | SelR(_, P):
            return ONE + skel_of(P)
        case Cut(_, P, Q):
            return skel_of(P) + skel_of(Q)
        case Spawn(_, P):
            return skel_of(P).shift()
    raise TypeError(p)


def skel_lt(s1: Skeleton, s2: Skeleton) -> bool:
    """True iff at the deepest level where they differ, s1 is smaller."""
    for j in range(max(len(s1.counts), len(s2.counts)) - 1, -1, -1):
        if s1[j] != s2[j]:
            return s1[j] < s2[j]
    return False


def skel_le(s1: Skeleton, s2: Skeleton) -> bool:
    return s1 == s2 or skel_lt(s1, s2)


def measure(p: Process) -> Skeleton:
    if isinstance(p, Spawn):
        return skel_of(p.P)
    return skel_of(p)


# ---------------------------------------------------------------- strategy


@dataclass
class Round:
    kind: str  # "comm" or "spawn"
    steps: list[dict]
    before: Skeleton
    after: Skeleton
    result: Process = field(repr=False, default=None)

    @property
    def decreasing(self) -> bool:
        return skel_lt(self.after, self.before)

    def to_json(self) -> dict:
        return {"kind": self.kind, "steps": [s["step"] for s in self.steps],
                "mu_before": self.before.as_dict(), "mu_after": self.after.as_dict(),
                "decreasing": self.decreasing}


@dataclass
class Normalization:
    start: Process
    result: Process
    rounds: list[Round] = field(default_factory=list)

    @property
    def trace(self) -> list[dict]:
        return [s for r in self.rounds for s in r.steps]

    @property
    def steps(self) -> int:
        return sum(len(r.steps) for r in self.rounds)

    @property
    def audit_ok(self) -> bool:
        return all(r.decreasing for r in self.rounds)

    def to_json(self) -> dict:
        return {"start": show(self.start), "result": show(self.result), "steps": self.steps,
                "trace": self.trace, "rounds": [r.to_json() for r in self.rounds]}


def _spawn_of(r: Redex) -> tuple:
    """Path of the spawn prefix taking part in a spawn redex."""
    if r.rule in ("red-spawn", "red-spawn-r"):
        return r.path + (1,)
    if r.rule == "red-spawn-l":
        return r.path + (0,)
    return r.path  # red-spawn-merge: the outer prefix


def _contract(q: Process, path: tuple, rule: str, supply: Supply) -> Process | None:
    for r, res in match_rules(subterm(q, path), supply):
        if r == rule:
            return rename_apart(replace_at(q, path, res), supply)
    return None


def _propagate(q: Process, path: tuple, supply: Supply, steps: list, start_index: int):
    """Move the spawn prefix at path up to the top level.

    Returns the final process, or None when some step along the way does not
    apply (the chosen spawn does not meet the strategy's context condition).
    """
    while path:
        parent = path[:-1]
        node = subterm(q, parent)
        if isinstance(node, Spawn):
            rule = "red-spawn-merge"
        elif path[-1] == 1:
            rule = "red-spawn" if node.x in node.Q.binding else "red-spawn-r"
        else:
            rule = "red-spawn-l"
        nxt = _contract(q, parent, rule, supply)
        if nxt is None:
            return None
        steps.append(trace_record(start_index + len(steps), Redex(rule, parent), q, nxt))
        q, path = nxt, parent
    return q


def _spawn_round(p: Process, r: Redex, supply: Supply, start_index: int):
    q = p
    for rule, path in r.witness:
        q = apply_rewrite(q, rule, path)
    nxt = _contract(q, r.path, r.rule, supply)
    if nxt is None:
        return None
    steps = [trace_record(start_index, r, p, nxt)]
    out = _propagate(nxt, r.path, supply, steps, start_index)
    if out is None:
        return None
    return out, steps


def normalize(p: Process, max_steps: int = 100_000, audit: bool = True) -> Normalization:
    """Drive p to a normal form with the measure-decreasing strategy.

    Raises NormalizationError when max_steps is exceeded and MeasureAuditError
    when a round fails to decrease the measure (with audit on).
    """
    run = Normalization(p, p)
    q = p
    count = 0
    while True:
        rs = redexes(q)
        if not rs:
            break
        supply = Supply.above(all_names(q))
        comm = [r for r in rs if r.rule in COMM_RULES]
        if comm:
            r = comm[0]
            nxt = rename_apart(r.result, supply)
            rnd = Round("comm", [trace_record(count, r, q, nxt)], measure(q), measure(nxt), nxt)
        else:
            rnd = None
            spawns = sorted((r for r in rs if r.rule in SPAWN_RULES),
                            key=lambda r: (spawn_depth(_witnessed(q, r), _spawn_of(r)), r.path))
            for r in spawns:
                got = _spawn_round(q, r, Supply.above(all_names(q)), count)
                if got is None:
                    continue
                nxt, steps = got
                cand = Round("spawn", steps, measure(q), measure(nxt), nxt)
                if cand.decreasing or rnd is None:
                    rnd = cand
                if cand.decreasing:
                    break
            if rnd is None:
                # no spawn prefix can be driven to the top; fire one step only
                r = spawns[0]
                nxt = r.result
                rnd = Round("spawn", [trace_record(count, r, q, nxt)], measure(q), measure(nxt), nxt)
            nxt = rnd.result
        run.rounds.append(rnd)
        count += len(rnd.steps)
        if audit and not rnd.decreasing:
            run.result = nxt
            raise MeasureAuditError(
                f"round {len(run.rounds)} does not decrease the measure: "
                f"{rnd.before} -> {rnd.after} at {show(q)}")
        q = nxt
        if count > max_steps:
            run.result = q
            raise NormalizationError(f"no normal form within {max_steps} steps")
    run.result = q
    return run


def _witnessed(p: Process, r: Redex) -> Process:
    for rule, path in r.witness:
        p = apply_rewrite(p, rule, path)
    return p

