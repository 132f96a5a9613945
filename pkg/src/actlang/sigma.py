"""The typing state Σ: storage layouts, constructors and transitions per contract."""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Dict, Mapping, Tuple

from . import syntax as S

Layout = Tuple[Tuple[str, object], ...]


def _frozen(d=None):
    return MappingProxyType(dict(d or {}))


@dataclass(frozen=True)
class TypingState:
    storage: Mapping[str, Layout] = field(default_factory=_frozen)
    cnstr: Mapping[str, S.Constructor] = field(default_factory=_frozen)
    trans: Mapping[str, Tuple[S.Transition, ...]] = field(default_factory=_frozen)

    def with_storage(self, name: str, layout: Layout) -> "TypingState":
        d = dict(self.storage)
        d[name] = tuple(layout)
        return TypingState(_frozen(d), self.cnstr, self.trans)

    def with_cnstr(self, name: str, ctor: S.Constructor) -> "TypingState":
        d = dict(self.cnstr)
        d[name] = ctor
        return TypingState(self.storage, _frozen(d), self.trans)

    def with_trans(self, name: str, ts) -> "TypingState":
        d = dict(self.trans)
        d[name] = tuple(ts)
        return TypingState(self.storage, self.cnstr, _frozen(d))

    def layout(self, contract: str) -> Dict[str, object]:
        return dict(self.storage[contract])

    def field_type(self, contract: str, name: str):
        for x, t in self.storage.get(contract, ()):
            if x == name:
                return t
        return None

    def transition(self, contract: str, name: str) -> S.Transition:
        for t in self.trans.get(contract, ()):
            if t.name == name:
                return t
        raise KeyError(f"{contract}.{name}")

    def contracts(self):
        return list(self.storage)

    def to_json(self) -> dict:
        return {
            "storage": {c: [[x, str(t)] for x, t in lay] for c, lay in self.storage.items()},
            "constructors": {
                c: {"iface": [[p.name, str(p.type)] for p in k.iface], "payable": k.payable}
                for c, k in self.cnstr.items()
            },
            "transitions": {
                c: [
                    {"name": t.name, "iface": [[p.name, str(p.type)] for p in t.iface],
                     "payable": t.payable, "returns": str(t.ret_type) if t.ret_type else None}
                    for t in ts
                ]
                for c, ts in self.trans.items()
            },
        }


EMPTY_SIGMA = TypingState()
