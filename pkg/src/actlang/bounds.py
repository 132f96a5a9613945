"""Finite sample sets used wherever the semantics quantifies over all values."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from . import syntax as S
from .sigma import TypingState
from .values import Addr, State
from .valuetyping import typed_locations

BIG = 2 ** 256


@dataclass(frozen=True)
class BoundsConfig:
    extra_int_samples: Tuple[int, ...] = ()
    math_window: int = 3
    addr_domain: int = 3
    map_footprint: int = 2
    store_depth: Optional[int] = None
    harvest_literals: bool = True
    max_contexts: int = 200_000

    def __post_init__(self):
        if self.addr_domain < 1:
            raise ValueError("addr_domain must be at least 1")
        if self.map_footprint < 0 or self.math_window < 0:
            raise ValueError("bounds must be non-negative")


DEFAULT_BOUNDS = BoundsConfig()


def int_samples(t: S.IntType, cfg: BoundsConfig = DEFAULT_BOUNDS, literals: Iterable[int] = ()) -> List[int]:
    if t.is_math:
        base = set(range(-cfg.math_window, cfg.math_window + 1)) | {BIG, -BIG}
    else:
        lo, hi = t.min, t.max
        base = {lo, lo + 1, -1, 0, 1, hi - 1, hi}
    extra = set(cfg.extra_int_samples)
    if cfg.harvest_literals:
        for n in literals:
            extra |= {n - 1, n, n + 1, -n}
    return sorted(n for n in base | extra if t.contains(n))


def addr_samples(s: State, cfg: BoundsConfig = DEFAULT_BOUNDS) -> List[Addr]:
    return [Addr(n) for n in sorted(set(range(cfg.addr_domain)) | s.dom())]


def base_samples(t, s: State, cfg: BoundsConfig = DEFAULT_BOUNDS, literals: Iterable[int] = ()) -> list:
    if isinstance(t, S.IntType):
        return int_samples(t, cfg, literals)
    if isinstance(t, S.BoolType):
        return [False, True]
    if isinstance(t, S.AddressType):
        return addr_samples(s, cfg)
    raise TypeError(f"{t} is not a base type")


def abi_samples(sigma: TypingState, s: State, t, cfg: BoundsConfig = DEFAULT_BOUNDS,
                literals: Iterable[int] = ()) -> list:
    if isinstance(t, S.ContractAddr):
        return typed_locations(sigma, s, t.contract)
    return base_samples(t, s, cfg, literals)


def enumerate_envs(sigma: TypingState, s: State, iface: Sequence[S.Param], cfg: BoundsConfig = DEFAULT_BOUNDS,
                   literals: Iterable[int] = (), relevant_env: Optional[Iterable[str]] = None
                   ) -> Iterator[Dict[str, object]]:
    """Environments ρ with ``Σ ⊢ ρ :_s I``, drawn from the sample sets.

    Environment fields not in ``relevant_env`` get one representative value,
    which is sound when the code being run never reads them.
    """
    literals = tuple(literals)
    relevant = set(("caller", "origin", "callvalue") if relevant_env is None else relevant_env)
    columns: List[Tuple[str, list]] = []
    for p in iface:
        columns.append((p.name, abi_samples(sigma, s, p.type, cfg, literals)))
    for f in ("caller", "origin"):
        columns.append((f, addr_samples(s, cfg) if f in relevant else [Addr(0)]))
    columns.append(("callvalue", int_samples(S.UINT256, cfg, literals) if "callvalue" in relevant else [0]))
    names = [c[0] for c in columns]
    for combo in itertools.product(*(c[1] for c in columns)):
        yield dict(zip(names, combo))
