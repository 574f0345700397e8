#!/usr/bin/env python3
"""
Tags record where a session comes from.

Two copies of one session carry the same tag; two separated sessions
must carry different ones.  Equal denotations are a sufficient test for
observational equivalence, and the tags tell apart processes that reduce
alike but share resources differently.
"""

from pibi.bunches import parse_bunch
from pibi.corpus import load
from pibi.denot import TagUniverse, denot_eq, sem_process
from pibi.syntax import parse_process, parse_type, show
from pibi.typing import check


def main():
    u = TagUniverse.of_size(2)
    for label in ("provenance_shared", "provenance_separate"):
        ex = load(label)
        print(show(ex.process))
        table = sem_process(check(*ex.judgment), u.all, u)
        for env, out in table.items():
            print(f"  {env}  |->  {out}")
        print()

    print("Copying one input versus using both")
    print("===================================")
    b, a = parse_bunch("y1:@s , y2:@s"), parse_type("@s /\\ @s")
    both = parse_process("x![a].(fwd a <- y1 || fwd x <- y2)")
    copy = parse_process("spawn{y2 -> {}}.spawn{y1 -> {y3, y4}}.x![a].(fwd a <- y3 || fwd x <- y4)")
    v = denot_eq(both, copy, b, "x", a, u)
    print(v.verdict)
    print(v.witness)


if __name__ == "__main__":
    main()
