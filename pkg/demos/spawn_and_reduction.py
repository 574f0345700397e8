#!/usr/bin/env python3
"""
Spawn prefixes in action: merging bindings, copying and discarding a
server, and the two ways a spawn can travel when channels are delegated.
"""

from pibi.corpus import load
from pibi.reduction import redexes
from pibi.spawn import merge
from pibi.syntax import SpawnBinding, name, parse_process, show


def binding(pairs: dict[str, list[str]]) -> SpawnBinding:
    return SpawnBinding({name(k): {name(v) for v in vs} for k, vs in pairs.items()})


def main():
    print("Merging spawn bindings")
    print("======================")
    s1 = binding({"x": [], "y": ["y1", "y2", "y3"]})
    s2 = binding({"y2": [], "y3": ["y4", "y5"], "z": ["z1"]})
    print(f"{s1}  merged with  {s2}")
    print(f"  = {merge(s1, s2)}")
    print()

    print("A client asks for two copies of a server")
    print("========================================")
    p = parse_process("new x.(z?().x!() || spawn{x -> {x1, x2}}.x1?().x2?().v!())")
    print(show(p))
    for r in redexes(p):
        print(f"  --{r.rule}-->  {show(r.result)}")
    print("The server's own dependency z is copied along with it.")
    print()

    print("A client drops the server")
    print("=========================")
    p = parse_process("new x.(z?().x!() || spawn{x -> {}}.v!())")
    for r in redexes(p):
        print(f"{show(p)}\n  --{r.rule}-->  {show(r.result)}")
    print()

    print("Delegation decides where a spawn lands")
    print("======================================")
    p = load("delegation").process
    print(show(p))
    for r in redexes(p):
        print(f"  --{r.rule}-->  {show(r.result)}")
        for r2 in redexes(r.result):
            print(f"      --{r2.rule}-->  {show(r2.result)}")


if __name__ == "__main__":
    main()
