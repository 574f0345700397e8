"""Example processes shipped with the package.

Each ``*.pibi`` file starts with ``--`` header lines giving the judgment
(``bunch``, ``chan``, ``type``) and whether the process is expected to type
(``status: typed|untyped``), followed by the process text.  Each ``*.al``
file holds an αλ term with ``bunch`` and ``type`` headers and an optional
``status`` (``ok`` by default; ``reflection-gap`` marks a term whose
simulation diagram is known not to close).
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from ..bunches import Bunch, is_empty_bunch, parse_bunch
from ..alphalambda import Term, parse_term
from ..syntax import Name, OneA, OneM, Process, Type, name, parse_process, parse_type

__all__ = ["Example", "load", "load_file", "parse_example", "names", "examples",
           "TermExample", "parse_term_example", "load_term_file", "term_names", "load_term",
           "term_examples"]


@dataclass(frozen=True)
class Example:
    name: str
    process: Process
    bunch: Bunch
    chan: Name
    type: Type
    typed: bool
    source: str

    @property
    def judgment(self) -> tuple[Bunch, Process, Name, Type]:
        return self.bunch, self.process, self.chan, self.type

    @property
    def closed_unit(self) -> bool:
        return is_empty_bunch(self.bunch) and isinstance(self.type, (OneM, OneA))


def _header(text: str) -> dict[str, str]:
    header = {}
    for line in text.splitlines():
        s = line.strip()
        if s.startswith("--") and ":" in s:
            key, _, val = s[2:].partition(":")
            header[key.strip()] = val.strip()
    return header


def parse_example(text: str, label: str = "<text>") -> Example:
    header = _header(text)
    return Example(
        name=label,
        process=parse_process(text),
        bunch=parse_bunch(header.get("bunch", "0m")),
        chan=name(header.get("chan", "z")),
        type=parse_type(header.get("type", "1m")),
        typed=header.get("status", "typed") == "typed",
        source=text,
    )


def load_file(path: str | Path) -> Example:
    path = Path(path)
    return parse_example(path.read_text(encoding="utf-8"), path.stem)


def names() -> list[str]:
    root = resources.files(__package__)
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".pibi"))


def load(label: str) -> Example:
    text = resources.files(__package__).joinpath(label + ".pibi").read_text(encoding="utf-8")
    return parse_example(text, label)


def examples(typed: bool | None = None) -> list[Example]:
    out = [load(n) for n in names()]
    if typed is not None:
        out = [e for e in out if e.typed == typed]
    return out


@dataclass(frozen=True)
class TermExample:
    name: str
    term: Term
    bunch: Bunch
    type: Type
    source: str
    status: str = "ok"

    @property
    def judgment(self) -> tuple[Bunch, Term, Type]:
        return self.bunch, self.term, self.type


def parse_term_example(text: str, label: str = "<text>") -> TermExample:
    header = _header(text)
    return TermExample(label, parse_term(text), parse_bunch(header.get("bunch", "0m")),
                       parse_type(header.get("type", "1m")), text, header.get("status", "ok"))


def load_term_file(path: str | Path) -> TermExample:
    path = Path(path)
    return parse_term_example(path.read_text(encoding="utf-8"), path.stem)


def term_names() -> list[str]:
    root = resources.files(__package__)
    return sorted(p.name[:-3] for p in root.iterdir() if p.name.endswith(".al"))


def load_term(label: str) -> TermExample:
    text = resources.files(__package__).joinpath(label + ".al").read_text(encoding="utf-8")
    return parse_term_example(text, label)


def term_examples() -> list[TermExample]:
    return [load_term(n) for n in term_names()]
