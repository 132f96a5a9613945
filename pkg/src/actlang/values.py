"""Runtime values and states.

Integers are Python ``int``, booleans are Python ``bool`` and addresses are
:class:`Addr`.  Because ``bool`` is a subclass of ``int`` in Python, sort
checks always go through :func:`sort_of` rather than ``isinstance``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, Mapping, Optional, Tuple

from . import syntax as S


@dataclass(frozen=True, order=True)
class Addr:
    n: int

    def __repr__(self) -> str:
        return f"@{self.n}"


class _Unit:
    """Result of a transition whose case has no ``returns`` clause."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "unit"


UNIT = _Unit()


def sort_of(v) -> str:
    t = type(v)
    if t is bool:
        return "bool"
    if t is int:
        return "int"
    if t is Addr:
        return "addr"
    if t is MapVal:
        return "map"
    if v is UNIT:
        return "unit"
    raise TypeError(f"not a value: {v!r}")


def value_eq(a, b) -> bool:
    """Structural equality that keeps ``True`` and ``1`` apart."""
    return sort_of(a) == sort_of(b) and a == b


def _key_order(k):
    return (sort_of(k), k.n if type(k) is Addr else int(k))


class MapVal:
    """A total finite map: explicit entries plus a default for all other keys.

    Entries equal to the default are never stored, so two maps that agree on
    every lookup compare equal.
    """

    __slots__ = ("key_sort", "default", "_table", "_hash")

    def __init__(self, key_sort: str, default, entries: Optional[Mapping] = None):
        if key_sort not in ("int", "bool", "addr"):
            raise ValueError(f"bad key sort {key_sort!r}")
        self.key_sort = key_sort
        self.default = default
        table = {}
        for k, v in (entries or {}).items():
            if not value_eq(v, default):
                table[k] = v
        self._table = table
        self._hash = None

    def lookup(self, key):
        return self._table.get(key, self.default)

    def set_many(self, pairs: Iterable[Tuple]) -> "MapVal":
        table = dict(self._table)
        for k, v in pairs:
            table[k] = v
        return MapVal(self.key_sort, self.default, table)

    def items(self) -> Iterator[Tuple]:
        return iter(sorted(self._table.items(), key=lambda kv: _key_order(kv[0])))

    def __len__(self) -> int:
        return len(self._table)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MapVal):
            return NotImplemented
        if self.key_sort != other.key_sort or not value_eq(self.default, other.default):
            return False
        if self._table.keys() != other._table.keys():
            return False
        return all(value_eq(v, other._table[k]) for k, v in self._table.items())

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.key_sort, sort_of(self.default), self.default,
                               frozenset((k, sort_of(v), v) for k, v in self._table.items())))
        return self._hash

    def __repr__(self) -> str:
        body = ", ".join(f"{k!r} => {v!r}" for k, v in self.items())
        return f"[{body} | _ => {self.default!r}]"


def key_sort(t) -> str:
    if isinstance(t, S.IntType):
        return "int"
    if isinstance(t, S.BoolType):
        return "bool"
    if isinstance(t, (S.AddressType, S.ContractAddr)):
        return "addr"
    raise TypeError(f"{t} is not a base type")


def default(mu):
    if isinstance(mu, S.IntType):
        return 0
    if isinstance(mu, S.BoolType):
        return False
    if isinstance(mu, (S.AddressType, S.ContractAddr)):
        return Addr(0)
    if isinstance(mu, S.MappingType):
        return MapVal(key_sort(mu.key), default(mu.value))
    raise TypeError(f"no default value for {mu}")


@dataclass(frozen=True)
class Instance:
    contract: str
    vars: Mapping[str, object]

    def with_var(self, name: str, v) -> "Instance":
        d = dict(self.vars)
        d[name] = v
        return Instance(self.contract, d)

    def __hash__(self) -> int:
        return hash((self.contract, frozenset((k, sort_of(v), v) for k, v in self.vars.items())))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return (self.contract == other.contract and self.vars.keys() == other.vars.keys()
                and all(value_eq(v, other.vars[k]) for k, v in self.vars.items()))


class State:
    """Partial map from addresses (naturals) to contract instances."""

    __slots__ = ("slots", "_fp")

    def __init__(self, slots: Optional[Mapping[int, Instance]] = None):
        self.slots: Dict[int, Instance] = dict(slots or {})
        self._fp = None

    def __contains__(self, loc) -> bool:
        return _loc(loc) in self.slots

    def get(self, loc) -> Optional[Instance]:
        return self.slots.get(_loc(loc))

    def dom(self):
        return set(self.slots)

    def fresh(self) -> int:
        # max over the empty domain is taken to be -1
        return max(self.slots, default=-1) + 1

    def with_instance(self, loc, inst: Instance) -> "State":
        d = dict(self.slots)
        d[_loc(loc)] = inst
        return State(d)

    def with_var(self, loc, name: str, v) -> "State":
        return self.with_instance(loc, self.slots[_loc(loc)].with_var(name, v))

    def __eq__(self, other) -> bool:
        return isinstance(other, State) and self.slots == other.slots

    def __hash__(self) -> int:
        return hash(self.fingerprint())

    def fingerprint(self) -> str:
        if self._fp is None:
            text = json.dumps(state_to_json(self), sort_keys=True, separators=(",", ":"))
            self._fp = hashlib.sha256(text.encode()).hexdigest()
        return self._fp

    def __repr__(self) -> str:
        parts = ", ".join(f"{k}: {v.contract}{dict(v.vars)}" for k, v in sorted(self.slots.items()))
        return f"State({{{parts}}})"


EMPTY = State()


def _loc(loc) -> int:
    return loc.n if type(loc) is Addr else loc


@dataclass(frozen=True)
class Timed:
    pre: State
    post: State


# ---------------------------------------------------------------------------
# JSON encoding: ints are numbers, bools are booleans, addresses are decimal
# strings, mappings are objects with keySort/default/entries.


def value_to_json(v):
    s = sort_of(v)
    if s in ("int", "bool"):
        return v
    if s == "addr":
        return str(v.n)
    if s == "unit":
        return None
    return {
        "keySort": v.key_sort,
        "default": value_to_json(v.default),
        "entries": [[value_to_json(k), value_to_json(x)] for k, x in v.items()],
    }


def value_from_json(j):
    if isinstance(j, bool) or isinstance(j, int):
        return j
    if isinstance(j, str):
        return Addr(int(j))
    if j is None:
        return UNIT
    if isinstance(j, dict):
        entries = {value_from_json(k): value_from_json(x) for k, x in j.get("entries", [])}
        return MapVal(j["keySort"], value_from_json(j["default"]), entries)
    raise ValueError(f"cannot decode value {j!r}")


def state_to_json(s: State) -> dict:
    return {
        str(loc): {
            "contract": inst.contract,
            "vars": {k: value_to_json(v) for k, v in sorted(inst.vars.items())},
        }
        for loc, inst in sorted(s.slots.items())
    }


def state_from_json(j) -> State:
    if not isinstance(j, dict):
        raise ValueError("state must be a JSON object")
    slots = {}
    for loc, inst in j.items():
        slots[int(loc)] = Instance(
            inst["contract"], {k: value_from_json(v) for k, v in inst["vars"].items()}
        )
    return State(slots)
