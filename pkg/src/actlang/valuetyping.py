"""Value and environment typing: ``⊢ v : β``, ``⊢ v : μ``, ``Σ ⊢ v :_s σ`` and ``Σ ⊢ ρ :_s I``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

from . import syntax as S
from .sigma import TypingState
from .values import Addr, MapVal, State, sort_of

ENV_FIELDS = ("caller", "origin", "callvalue")


@dataclass(frozen=True)
class TypeJudgmentResult:
    holds: bool
    failure_path: Optional[Tuple[str, ...]] = None
    rule: Optional[str] = None

    def __bool__(self) -> bool:
        return self.holds

    def describe(self) -> str:
        if self.holds:
            return "ok"
        path = ".".join(self.failure_path or ())
        return f"{self.rule}: {path}" if path else str(self.rule)


OK = TypeJudgmentResult(True)


def _fail(rule: str, *path: str) -> TypeJudgmentResult:
    return TypeJudgmentResult(False, tuple(path), rule)


def _under(res: TypeJudgmentResult, step: str) -> TypeJudgmentResult:
    if res.holds:
        return res
    return TypeJudgmentResult(False, (step,) + (res.failure_path or ()), res.rule)


def value_has_base(v, beta) -> TypeJudgmentResult:
    try:
        sort = sort_of(v)
    except TypeError:
        return _fail("V-Base", repr(v))
    if isinstance(beta, S.IntType):
        if sort == "int" and beta.contains(v):
            return OK
        return _fail("V-Int", repr(v))
    if isinstance(beta, S.BoolType):
        return OK if sort == "bool" else _fail("V-Bool", repr(v))
    if isinstance(beta, S.AddressType):
        return OK if sort == "addr" and v.n >= 0 else _fail("V-Addr", repr(v))
    return _fail("V-Base", str(beta))


def value_has_mu(v, mu) -> TypeJudgmentResult:
    if not isinstance(mu, S.MappingType):
        return value_has_base(v, mu)
    if type(v) is not MapVal:
        return _fail("V-Mapping", repr(v))
    expected = {"int": S.IntType, "bool": S.BoolType, "addr": S.AddressType}[v.key_sort]
    if not isinstance(mu.key, expected):
        return _fail("V-Mapping", "keysort")
    # keys outside the table all map to the default, so checking the
    # default plus each explicit entry covers the universal premise
    res = value_has_mu(v.default, mu.value)
    if not res:
        return _under(res, "default")
    for k, x in v.items():
        kr = value_has_base(k, mu.key)
        if not kr:
            return _under(kr, f"key {k!r}")
        res = value_has_mu(x, mu.value)
        if not res:
            return _under(res, f"[{k!r}]")
    return OK


def value_has_sigma(sigma: TypingState, s: State, v, t) -> TypeJudgmentResult:
    """``Σ ⊢ v :_s σ``; ``t=None`` stands for ⊥ and accepts anything."""
    return _Checker(sigma, s).check(v, t)


def loc_has_contract(sigma: TypingState, s: State, loc, contract: str) -> TypeJudgmentResult:
    return value_has_sigma(sigma, s, loc, S.ContractType(contract))


class _Checker:
    def __init__(self, sigma: TypingState, s: State):
        self.sigma = sigma
        self.s = s
        self.done = {}
        self.active = set()

    def check(self, v, t) -> TypeJudgmentResult:
        if t is None:
            return OK
        if isinstance(t, (S.ContractAddr, S.ContractType)):
            return self.contract(v, t.contract)
        return value_has_mu(v, t)

    def contract(self, v, name: str) -> TypeJudgmentResult:
        if type(v) is not Addr:
            return _fail("V-AddrIsContract", repr(v))
        key = (v.n, name)
        if key in self.done:
            return self.done[key]
        if key in self.active:
            # only reachable for stores over a cyclic Σ; reject rather than loop
            return _fail("V-AddrIsContract", f"cycle at {v!r}")
        self.active.add(key)
        try:
            res = self._contract(v, name)
        finally:
            self.active.discard(key)
        self.done[key] = res
        return res

    def _contract(self, v: Addr, name: str) -> TypeJudgmentResult:
        inst = self.s.get(v)
        if inst is None:
            return _fail("V-AddrIsContract", f"{v!r} not in dom(s)")
        if name not in self.sigma.storage:
            return _fail("V-AddrIsContract", f"{name} not in Σ")
        if inst.contract != name:
            return _fail("V-AddrIsContract", f"{v!r} has type {inst.contract}")
        layout = self.sigma.layout(name)
        if set(inst.vars) != set(layout):
            return _fail("V-AddrIsContract", f"{v!r} fields differ from layout")
        for x, t in layout.items():
            res = self.check(inst.vars[x], t)
            if not res:
                return _under(res, f"{v!r}.{x}")
        return OK


def env_has_iface(sigma: TypingState, s: State, rho, iface) -> TypeJudgmentResult:
    names = [p.name for p in iface]
    if set(rho) != set(names) | set(ENV_FIELDS):
        return _fail("V-Env", "dom")
    for f in ("caller", "origin"):
        res = value_has_base(rho[f], S.ADDRESS)
        if not res:
            return _under(res, f)
    res = value_has_base(rho["callvalue"], S.UINT256)
    if not res:
        return _under(res, "callvalue")
    checker = _Checker(sigma, s)
    for p in iface:
        res = checker.check(rho[p.name], p.type)
        if not res:
            return _under(res, p.name)
    return OK


def typed_locations(sigma: TypingState, s: State, contract: str):
    """All ℓ with ``Σ ⊢ ℓ :_s A``, in address order."""
    checker = _Checker(sigma, s)
    return [Addr(n) for n in sorted(s.slots) if checker.contract(Addr(n), contract)]


def store_well_typed(sigma: TypingState, s: State) -> TypeJudgmentResult:
    """Every location is typable at the contract it claims to be."""
    checker = _Checker(sigma, s)
    for n in sorted(s.slots):
        res = checker.contract(Addr(n), s.slots[n].contract)
        if not res:
            return res
    return OK
