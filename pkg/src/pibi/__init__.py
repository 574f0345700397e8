"""Bunched session processes: syntax, typing, reduction, normalization,
observation, a λ-calculus frontend and a finite denotational semantics."""

from .syntax import alpha_eq, free_names, parse_process, parse_type, show, show_type
from .bunches import parse_bunch, show_bunch
from .typing import check
from .reduction import redexes, step
from .normalize import normalize

__version__ = "0.1.0"

__all__ = [
    "alpha_eq", "free_names", "parse_process", "parse_type", "show", "show_type",
    "parse_bunch", "show_bunch", "check", "redexes", "step", "normalize",
]
