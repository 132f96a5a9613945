"""Generic traversal over syntax trees."""

from __future__ import annotations

import dataclasses
from typing import Iterator, Set

from . import syntax as S


def walk(node) -> Iterator[object]:
    """Pre-order walk over every AST node reachable from ``node``."""
    stack = [node]
    while stack:
        n = stack.pop()
        if isinstance(n, tuple):
            stack.extend(reversed(n))
            continue
        if not dataclasses.is_dataclass(n) or isinstance(n, type):
            continue
        yield n
        children = []
        for f in dataclasses.fields(n):
            if f.name in ("span", "annot"):
                continue
            children.append(getattr(n, f.name))
        stack.extend(reversed(children))


_OPEN = (S.Var, S.Pre, S.Post, S.EnvRef, S.Field, S.Index, S.Coerce)


def int_literals(node) -> Set[int]:
    """Integer literals plus the values of closed integer subterms such as ``-1 - 7``."""
    from .semantics import EvalError, eval_expr
    from .values import State

    out = set()
    for n in walk(node):
        if isinstance(n, S.IntLit):
            out.add(n.value)
        elif isinstance(n, (S.BinI, S.Ite)) and not any(isinstance(m, _OPEN) for m in walk(n)):
            try:
                v = eval_expr(State(), {}, None, n)
            except EvalError:
                continue
            if type(v) is int:
                out.add(v)
    return out


def env_vars_used(node) -> Set[str]:
    out = {n.var for n in walk(node) if isinstance(n, S.EnvRef)}
    if any(isinstance(n, S.New) for n in walk(node)):
        # a nested constructor receives origin from the caller's environment
        out.add("origin")
    return out


def names_used(node) -> Set[str]:
    out = set()
    for n in walk(node):
        if isinstance(n, (S.Var, S.Pre, S.Post)):
            out.add(n.name)
        elif isinstance(n, S.Field):
            out.add(n.name)
    return out
