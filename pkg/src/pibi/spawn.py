"""Spawn bindings: validity, independence, merge, and the binding judgment.

A binding judgment ``s : d1 ~> d2`` is derived as a sequence of elementary
steps.  A contraction step replaces a sub-bunch by the `,`-join of n renamed
copies of it (n >= 1, the names of the sub-bunch mapped to n names each); a
weakening step replaces a sub-bunch whose names are all mapped to the empty
set by the additive unit.  The merge of the steps equals the binding.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from itertools import permutations, product
from typing import Iterator

from .bunches import (
    COMMA, SEMI, Bunch, EmptyA, EmptyM, bkey, canon, fill, ident, join, positions, rename_bunch,
    show_bunch, unit_positions,
)
from .syntax import Name, SpawnBinding

__all__ = [
    "SpawnBinding", "InvalidBinding", "independent", "merge", "restrictions",
    "BindingStep", "BindingDerivation", "BindingFailure", "check_binding", "binding_results",
]


class InvalidBinding(ValueError):
    pass


def restrictions(s: SpawnBinding) -> frozenset[Name]:
    return s.restrictions


def independent(s1: SpawnBinding, s2: SpawnBinding) -> bool:
    d1, d2 = s1.dom, s2.dom
    r1, r2 = s1.restrictions, s2.restrictions
    return not (d1 & d2 or d1 & r2 or r1 & r2 or d2 & r1)


def merge(s1: SpawnBinding, s2: SpawnBinding, check: bool = True) -> SpawnBinding:
    """Connect the restrictions of s1 to the domain of s2."""
    r1 = s1.restrictions
    d2 = s2.dom
    out: dict[Name, frozenset[Name]] = {}
    for x, img in s1.items():
        through = set()
        for y in img:
            if y in d2:
                through |= s2[y]
        out[x] = frozenset(through | (img - d2))
    for x, img in s2.items():
        if x not in s1.dom and x not in r1:
            out[x] = img
    s = SpawnBinding(out)
    if check and not s.is_valid():
        raise InvalidBinding(f"merge of {s1} and {s2} is not a spawn binding")
    return s


# ---------------------------------------------------------------- binding judgment


@dataclass(frozen=True)
class BindingStep:
    kind: str  # "contract" or "weaken"
    binding: SpawnBinding
    context: Bunch  # one hole, filled by the sub-bunch before the step
    before: Bunch
    after: Bunch
    copies: tuple = ()  # for contractions: one renaming dict per copy, in order

    def __str__(self) -> str:
        return f"{self.kind} {self.binding}: {show_bunch(self.before)} ~> {show_bunch(self.after)}"


@dataclass
class BindingDerivation:
    binding: SpawnBinding
    source: Bunch
    target: Bunch
    steps: list[BindingStep] = field(default_factory=list)

    def merged(self) -> SpawnBinding:
        return reduce(merge, (st.binding for st in self.steps), SpawnBinding())

    def replay(self) -> Bunch:
        b = canon(self.source)
        for st in self.steps:
            if canon(st.before) != b:
                raise InvalidBinding("binding derivation does not replay")
            b = canon(st.after)
        return b

    def __str__(self) -> str:
        lines = [f"{self.binding} : {show_bunch(self.source)} ~> {show_bunch(self.target)}"]
        lines += [f"  {st}" for st in self.steps]
        return "\n".join(lines)


@dataclass
class BindingFailure:
    binding: SpawnBinding
    source: Bunch
    target: Bunch | None
    exhausted: bool  # True when the search bound cut off exploration
    reason: str

    def __bool__(self) -> bool:
        return False


def _contractions(b: Bunch, s: SpawnBinding, remaining: frozenset[Name]):
    def ok(sub):
        names = ident(sub)
        if not names or not names <= remaining:
            return False
        sizes = {len(s[n]) for n in names}
        return len(sizes) == 1 and 0 not in sizes

    for ctx, sub in positions(b, want=ok, prune=lambda c: bool(ident(c) & remaining)):
        names = sorted(ident(sub))
        n = len(s[names[0]])
        first = sorted(s[names[0]])
        rest = [list(permutations(sorted(s[m]))) for m in names[1:]]
        for choice in product(*rest):
            copies = []
            for i in range(n):
                th = {names[0]: first[i]}
                for m, perm in zip(names[1:], choice):
                    th[m] = perm[i]
                copies.append(th)
            new = join(COMMA, [rename_bunch(sub, th) for th in copies])
            part = SpawnBinding({m: s[m] for m in names})
            yield ctx, sub, new, part, tuple(copies)


def _weakenings(b: Bunch, s: SpawnBinding, remaining: frozenset[Name], allow_unit_slot: bool):
    def ok(sub):
        if isinstance(sub, EmptyA):
            return False
        names = ident(sub)
        return names <= remaining and all(not s[n] for n in names)

    for ctx, sub in positions(b, want=ok):
        part = SpawnBinding({m: () for m in ident(sub)})
        yield ctx, sub, part
    if allow_unit_slot:
        # the implicit multiplicative unit around any position
        for ctx in unit_positions(b, SEMI):
            yield ctx, EmptyM(), SpawnBinding()


def binding_results(s: SpawnBinding, source: Bunch, bound: int | None = None
                    ) -> Iterator[tuple[Bunch, list[BindingStep]]]:
    """Enumerate the bunches reachable from source by a derivation of s.

    Yields (target, steps) once per distinct canonical target.  Search order:
    contractions before weakenings, leftmost sub-bunch first.
    """
    if not s.is_valid() or not s.dom <= ident(source):
        return
    if bound is None:
        bound = len(s.dom) + len(s.restrictions) + 2
    start = canon(source)
    seen_state = set()
    seen_target = set()
    stack = [(start, frozenset(s.dom), [], True)]
    while stack:
        b, remaining, steps, unit_slot = stack.pop()
        key = (bkey(b), remaining, unit_slot)
        if key in seen_state or len(steps) > bound:
            continue
        seen_state.add(key)
        if not remaining and bkey(b) not in seen_target:
            seen_target.add(bkey(b))
            yield b, steps
        succ = []
        for ctx, sub, new, part, copies in _contractions(b, s, remaining):
            after = fill(ctx, new)
            st = BindingStep("contract", part, ctx, b, after, copies)
            succ.append((after, remaining - part.dom, steps + [st], unit_slot))
        for ctx, sub, part in _weakenings(b, s, remaining, unit_slot):
            after = fill(ctx, EmptyA())
            if after == b:
                continue
            st = BindingStep("weaken", part, ctx, b, after)
            slot = unit_slot and not (isinstance(sub, EmptyM) and not part.dom)
            succ.append((after, remaining - part.dom, steps + [st], slot))
        stack.extend(reversed(succ))


def check_binding(s: SpawnBinding, source: Bunch, target: Bunch,
                  bound: int | None = None) -> BindingDerivation | BindingFailure:
    if not s.is_valid():
        return BindingFailure(s, source, target, False, "not a spawn binding")
    if not s.dom <= ident(source):
        return BindingFailure(s, source, target, False, "binding domain not in the source bunch")
    goal = canon(target)
    for b, steps in binding_results(s, source, bound):
        if b == goal:
            return BindingDerivation(s, source, target, steps)
    return BindingFailure(s, source, target, False, "no derivation")
