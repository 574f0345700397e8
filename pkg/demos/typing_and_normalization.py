#!/usr/bin/env python3
"""
Type checking with bunched contexts and normalizing well-typed processes.

A session received linearly can still be used twice, while a linear
function cannot be turned into a shared one.  Every well-typed closed
process reaches a terminated state, and the normalizer shows the measure
going down round by round.
"""

from pibi.bunches import parse_bunch
from pibi.corpus import load
from pibi.normalize import normalize
from pibi.syntax import name, parse_process, parse_type, show
from pibi.typing import check


def main():
    print("Using a linear input twice")
    print("==========================")
    ex = load("unusual")
    print(show(ex.process))
    der = check(*ex.judgment)
    print(der.pretty())
    print()

    print("A linear function is not a shared one")
    print("=====================================")
    res = check(parse_bunch("x:@A -* @B"), parse_process("z?(a).x![b].(fwd b <- a || fwd z <- x)"),
                name("z"), parse_type("@A -> @B"))
    print(f"verdict: {'accepted' if res else 'rejected'}")
    print(res)
    print()

    print("Normalizing with a decreasing measure")
    print("=====================================")
    run = normalize(load("failures_available").process)
    for k, r in enumerate(run.rounds, 1):
        print(f"round {k} ({r.kind}): {r.before} -> {r.after}")
        for s in r.steps:
            print(f"    {s['rule']}: {s['after']}")
    print(f"normal form: {show(run.result)}")


if __name__ == "__main__":
    main()
