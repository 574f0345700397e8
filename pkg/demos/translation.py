#!/usr/bin/env python3
"""
From terms with two kinds of functions to processes.

A typed term is translated into a process; weakening and contraction in
the term's derivation become spawn prefixes.  The harnesses then follow
the term's reductions and check that the process keeps up, and that every
move of the process is matched by the term.
"""

from pibi.alphalambda import (
    completeness_harness, show_term, soundness_harness, translate, typecheck_term,
)
from pibi.corpus import load_term
from pibi.syntax import show


def main():
    for label in ("unusual", "shared_fn"):
        ex = load_term(label)
        print(f"Term: {show_term(ex.term)}")
        print("=" * (6 + len(show_term(ex.term))))
        der = typecheck_term(*ex.judgment)
        print(der.pretty())
        print(f"process: {show(translate(der, 'z'))}")
        comp = completeness_harness(*ex.judgment)
        for e in comp.closed:
            print(f"  {e['rule']}: {e['from']}  =>  {e['to']}   ({e['steps']} process steps)")
        sound = soundness_harness(*ex.judgment)
        print(f"  every reachable process lifts back: {sound.ok} ({len(sound.closed)} states)")
        print()


if __name__ == "__main__":
    main()
