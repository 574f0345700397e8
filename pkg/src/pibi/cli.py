"""Command-line interface: thin adapters over the library modules.

Exit codes: 0 success (accepted, equivalent, all checks passed), 1 a negative
verdict, 2 a parse or configuration error.
"""

from __future__ import annotations

import json
import random
import sys
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path

import click

from . import corpus
from .alphalambda import (
    TranslationError, completeness_harness, show_term, soundness_harness, translate, typecheck_term,
)
from .bunches import parse_bunch, show_bunch
from .denot import DenotError, TagUniverse, denot_eq
from .normalize import NormalizationError, normalize
from .observe import barbs, deadlock_check, weak_barbs
from .reduction import redexes, trace_record
from .syntax import ParseError, name, parse_type, show, show_type
from .typing import check, check_subject_reduction


@dataclass(frozen=True)
class Config:
    tags: int = 3
    max_steps: int = 10_000
    budget: int = 12
    seed: int = 0
    output: str = "text"

    def __post_init__(self):
        for k in ("tags", "max_steps", "budget"):
            if getattr(self, k) <= 0:
                raise click.BadParameter(f"{k} must be positive")
        if self.seed < 0:
            raise click.BadParameter("seed must be non-negative")


def _emit(cfg: Config, data: dict, text: str) -> None:
    if cfg.output == "json":
        click.echo(json.dumps(data, indent=2, ensure_ascii=False))
    else:
        click.echo(text)


def _die(msg: str, code: int = 2):
    click.echo(f"error: {msg}", err=True)
    raise SystemExit(code)


def _read(path: str) -> tuple[str, str]:
    """Text and label of a file, falling back to the shipped corpus."""
    p = Path(path)
    if p.exists():
        return p.read_text(encoding="utf-8"), p.stem
    label, suffix = p.stem, p.suffix or ".pibi"
    res = resources.files(corpus).joinpath(label + suffix)
    if res.is_file():
        return res.read_text(encoding="utf-8"), label
    _die(f"no such file or corpus entry: {path}")


def _example(path: str, bunch: str | None, chan: str | None, type_: str | None) -> corpus.Example:
    text, label = _read(path)
    try:
        ex = corpus.parse_example(text, label)
        return corpus.Example(
            ex.name, ex.process,
            parse_bunch(bunch) if bunch is not None else ex.bunch,
            name(chan) if chan is not None else ex.chan,
            parse_type(type_) if type_ is not None else ex.type,
            ex.typed, ex.source)
    except (ParseError, ValueError) as e:
        _die(f"{path}: {e}")


def _term_example(path: str, bunch: str | None, type_: str | None) -> corpus.TermExample:
    text, label = _read(path)
    try:
        ex = corpus.parse_term_example(text, label)
        return corpus.TermExample(
            ex.name, ex.term,
            parse_bunch(bunch) if bunch is not None else ex.bunch,
            parse_type(type_) if type_ is not None else ex.type,
            ex.source, ex.status)
    except (ParseError, ValueError) as e:
        _die(f"{path}: {e}")


def _options(*which: str):
    opts = {
        "bunch": click.option("--bunch", default=None, help="Typing bunch (overrides the file header)."),
        "chan": click.option("--chan", default=None, help="Provided channel (overrides the file header)."),
        "type": click.option("--type", "type_", default=None, help="Provided type (overrides the file header)."),
        "seed": click.option("--seed", default=0, show_default=True, help="Seed for the redex schedule."),
        "max_steps": click.option("--max-steps", default=10_000, show_default=True, help="Step limit."),
        "tags": click.option("--tags", default=3, show_default=True, help="Size of the tag universe."),
        "budget": click.option("--budget", default=12, show_default=True, help="Search budget per diagram."),
        "json": click.option("--json", "as_json", is_flag=True, help="Machine-readable output."),
    }

    def deco(f):
        for k in reversed(which):
            f = opts[k](f)
        return f

    return deco


def _config(as_json: bool = False, **kw) -> Config:
    return Config(output="json" if as_json else "text", **kw)


@click.group()
def main() -> None:
    """Type checker, reduction engine and semantics for bunched session processes."""


@main.command("check")
@click.argument("file")
@_options("bunch", "chan", "type", "json")
def cmd_check(file, bunch, chan, type_, as_json):
    """Type check a process (or an αλ term, for .al files) at its judgment."""
    cfg = _config(as_json)
    if file.endswith(".al"):
        ex = _term_example(file, bunch, type_)
        der = typecheck_term(ex.bunch, ex.term, ex.type)
        head = f"{show_bunch(ex.bunch)} ⊢ {show_term(ex.term)} : {show_type(ex.type)}"
    else:
        ex = _example(file, bunch, chan, type_)
        der = check(*ex.judgment)
        head = f"{show_bunch(ex.bunch)} ⊢ {show(ex.process)} :: {ex.chan} : {show_type(ex.type)}"
    if der:
        _emit(cfg, {"verdict": "accepted", "derivation": der.to_json()}, f"accepted: {head}\n{der.pretty()}")
        raise SystemExit(0)
    _emit(cfg, {"verdict": "rejected", "failure": str(der)}, f"rejected: {head}\n{der}")
    raise SystemExit(1)


@main.command("run")
@click.argument("file")
@_options("seed", "max_steps", "json")
def cmd_run(file, seed, max_steps, as_json):
    """Reduce along one maximal trace, choosing redexes at random from the seed."""
    cfg = _config(as_json, seed=seed, max_steps=max_steps)
    ex = _example(file, None, None, None)
    rng = random.Random(cfg.seed)
    q, trace = ex.process, []
    for i in range(cfg.max_steps):
        rs = redexes(q)
        if not rs:
            break
        r = rng.choice(rs)
        trace.append(trace_record(i, r, q, r.result))
        q = r.result
    stopped = bool(redexes(q))
    lines = [f"{t['step']}: {t['rule']} -> {t['after']}" for t in trace]
    lines.append(("stopped at the step limit: " if stopped else "normal form: ") + show(q))
    _emit(cfg, {"start": show(ex.process), "seed": cfg.seed, "trace": trace, "result": show(q),
                "normal": not stopped}, "\n".join(lines))


@main.command("normalize")
@click.argument("file")
@_options("max_steps", "json")
def cmd_normalize(file, max_steps, as_json):
    """Normalize with the measure-decreasing strategy, auditing every round."""
    cfg = _config(as_json, max_steps=max_steps)
    ex = _example(file, None, None, None)
    try:
        run = normalize(ex.process, cfg.max_steps)
    except NormalizationError as e:
        _die(str(e), 1)
    lines = []
    for k, r in enumerate(run.rounds, 1):
        lines.append(f"round {k} ({r.kind}): μ {r.before} -> {r.after}")
        lines += [f"  {s['step']}: {s['rule']} -> {s['after']}" for s in r.steps]
    lines.append(f"normal form after {run.steps} steps: {show(run.result)}")
    _emit(cfg, run.to_json(), "\n".join(lines))


@main.command("step")
@click.argument("file")
def cmd_step(file):
    """Step through reductions, choosing a redex by index each round ('q' quits)."""
    ex = _example(file, None, None, None)
    q = ex.process
    rnd = 1
    while True:
        click.echo(show(q))
        rs = redexes(q)
        if not rs:
            click.echo("normal form")
            return
        click.echo(f"round {rnd}: {len(rs)} redex{'es' if len(rs) != 1 else ''}")
        for i, r in enumerate(rs):
            click.echo(f"  [{i}] {r.rule} at {list(r.path)} -> {show(r.result)}")
        click.echo("choose> ", nl=False)
        line = sys.stdin.readline()
        if not line or line.strip() in ("q", "quit"):
            click.echo()
            return
        try:
            q = rs[int(line)].result
        except (ValueError, IndexError):
            click.echo(f"no redex {line.strip()!r}")
            continue
        rnd += 1


@main.command("barbs")
@click.argument("file")
@_options("json")
def cmd_barbs(file, as_json):
    """Immediate and weak barbs."""
    cfg = _config(as_json)
    ex = _example(file, None, None, None)
    now, weak = sorted(barbs(ex.process)), sorted(weak_barbs(ex.process))
    _emit(cfg, {"barbs": [b.to_json() for b in now], "weak_barbs": [b.to_json() for b in weak]},
          "barbs: " + ", ".join(map(str, now)) + "\nweak barbs: " + ", ".join(map(str, weak)))


@main.command("translate")
@click.argument("file")
@_options("chan", "bunch", "type", "json")
def cmd_translate(file, chan, bunch, type_, as_json):
    """Translate a typed αλ term into a process and re-check it."""
    cfg = _config(as_json)
    ex = _term_example(file, bunch, type_)
    der = typecheck_term(ex.bunch, ex.term, ex.type)
    if not der:
        _emit(cfg, {"verdict": "rejected", "failure": str(der)}, f"term does not type:\n{der}")
        raise SystemExit(1)
    z = name(chan or "z")
    try:
        p = translate(der, z)
    except TranslationError as e:
        _die(str(e), 1)
    ok = bool(check(ex.bunch, p, z, ex.type))
    judgment = f"{show_bunch(ex.bunch)} ⊢ P :: {z} : {show_type(ex.type)}"
    _emit(cfg, {"process": show(p), "rechecked": ok, "judgment": judgment},
          f"{show(p)}\n-- re-check {'ok' if ok else 'FAILED'}: {judgment}")
    raise SystemExit(0 if ok else 1)


@main.command("denot-eq")
@click.argument("left")
@click.argument("right")
@_options("bunch", "chan", "type", "tags", "json")
@click.option("--verbose", is_flag=True, help="Print the agreement table per tag set.")
def cmd_denot_eq(left, right, bunch, chan, type_, tags, as_json, verbose):
    """Compare two processes denotationally at the judgment of the first."""
    cfg = _config(as_json, tags=tags)
    p = _example(left, bunch, chan, type_)
    q = _example(right, bunch, chan, type_)
    try:
        v = denot_eq(p.process, q.process, p.bunch, p.chan, p.type, TagUniverse.of_size(cfg.tags))
    except DenotError as e:
        _die(str(e), 2)
    lines = [v.verdict]
    if v.witness:
        lines.append(f"witness: {v.witness}")
    if verbose:
        lines += [f"  D={d}: {a}/{n} agree" for d, a, n in v.per_tags]
    _emit(cfg, v.to_json(), "\n".join(lines))
    raise SystemExit(0 if v.equal else 1)


@main.command("corpus-test")
@_options("budget", "json")
def cmd_corpus_test(budget, as_json):
    """Run the shipped corpus through the checks of every module."""
    cfg = _config(as_json, budget=budget)
    rows = []
    for ex in corpus.examples():
        row = {"name": ex.name, "kind": "process"}
        if ex.typed:
            row["typed"] = bool(check(*ex.judgment))
            row["subject_reduction"] = check_subject_reduction(*ex.judgment, 2).ok
            if ex.closed_unit:
                row["deadlock_free"] = deadlock_check(ex.process, ex.chan).ok
        else:
            row["rejected"] = not check(*ex.judgment)
        try:
            row["normalizes"] = normalize(ex.process).audit_ok
        except NormalizationError:
            row["normalizes"] = False
        rows.append(row)
    for te in corpus.term_examples():
        row = {"name": te.name, "kind": "term", "status": te.status}
        row["completeness"] = completeness_harness(*te.judgment, depth=3, budget=cfg.budget).ok
        sound = soundness_harness(*te.judgment, depth=3, budget=cfg.budget).ok
        if te.status == "ok":
            row["soundness"] = sound
        else:
            row["known_gap_reproduced"] = not sound
        rows.append(row)
    failed = [r["name"] for r in rows if not all(v for k, v in r.items() if isinstance(v, bool))]
    text = "\n".join(
        f"{'ok  ' if r['name'] not in failed else 'FAIL'} {r['name']}: "
        + ", ".join(k for k, v in r.items() if v is True) for r in rows)
    text += f"\n{len(rows) - len(failed)}/{len(rows)} passed"
    _emit(cfg, {"config": asdict(cfg), "results": rows, "failed": failed}, text)
    raise SystemExit(1 if failed else 0)


if __name__ == "__main__":
    main()
