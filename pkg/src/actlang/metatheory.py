"""Seeded generators of well-typed specs, stores and environments, plus the
property suites run over them (determinism, type safety, frame, phase split).

Every generator is type-directed: it only builds terms that the checker
should accept.  Anything it produces is still run through the checker, and
the checked (annotated) term is what gets evaluated.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import syntax as S
from .bounds import BoundsConfig
from .diagnostics import ActError
from .entailment import discharge
from .semantics import (EvalError, MultipleCasesMatched, NoCaseMatched, ResourceLimit, Stuck, eval_creates,
                        eval_ctor, eval_expr, eval_mapping, eval_ref, eval_slot, eval_trans, eval_updates)
from .sigma import EMPTY_SIGMA, TypingState
from .typecheck import Checker, Ctx, check_ctor, check_expr, check_ref, check_slot, check_trans, check_updates
from .values import Addr, Instance, MapVal, State, Timed, key_sort, state_to_json, value_eq, value_to_json
from .valuetyping import env_has_iface, loc_has_contract, store_well_typed, typed_locations, value_has_sigma

INT_TYPES = (S.uint(8), S.uint(16), S.UINT256, S.sint(8), S.sint(256))
ABI_BASES = INT_TYPES + (S.BOOL, S.ADDRESS)
CATEGORIES = ("expr", "ref", "mapping", "slot", "creates", "updates", "ctor", "trans")

# bounds used to filter generated transitions by their obligations
FILTER_BOUNDS = BoundsConfig(addr_domain=2, map_footprint=1, max_contexts=4_000)


@dataclass(frozen=True)
class GenConfig:
    max_contracts: int = 3
    max_fields: int = 4
    max_params: int = 2
    max_transitions: int = 3
    expr_depth: int = 3


@dataclass
class Scope:
    """What a generated expression may mention."""

    sigma: TypingState
    contract: Optional[str]
    iface: Tuple[S.Param, ...]
    timed: bool = False
    env: bool = True


class Gen:
    """Type-directed random term generator."""

    def __init__(self, rng: random.Random, cfg: GenConfig = GenConfig()):
        self.rng = rng
        self.cfg = cfg

    def chance(self, p: float) -> bool:
        return self.rng.random() < p

    # -- types --------------------------------------------------------------

    def abi_type(self, sigma: TypingState):
        known = sigma.contracts()
        if known and self.chance(0.2):
            return S.ContractAddr(self.rng.choice(known))
        return self.rng.choice(ABI_BASES)

    def mu_type(self, depth: int = 0):
        if depth < 2 and self.chance(0.25):
            return S.MappingType(self.rng.choice(ABI_BASES), self.mu_type(depth + 1))
        return self.rng.choice(ABI_BASES + (S.INT,))

    def slot_type(self, sigma: TypingState):
        known = sigma.contracts()
        r = self.rng.random()
        if known and r < 0.2:
            return S.ContractType(self.rng.choice(known))
        if known and r < 0.3:
            return S.ContractAddr(self.rng.choice(known))
        return self.mu_type()

    def iface(self, sigma: TypingState, prefix: str = "p") -> Tuple[S.Param, ...]:
        n = self.rng.randint(0, self.cfg.max_params)
        return tuple(S.Param(f"{prefix}{i}", self.abi_type(sigma)) for i in range(n))

    # -- references ---------------------------------------------------------

    def _roots(self, sc: Scope):
        out = [(S.Var(p.name), p.type) for p in sc.iface]
        if sc.contract is not None:
            names = {p.name for p in sc.iface}
            for x, t in sc.sigma.storage[sc.contract]:
                if x in names:
                    continue
                if sc.timed:
                    out.append((S.Pre(x) if self.chance(0.5) else S.Post(x), t))
                else:
                    out.append((S.Var(x), t))
        if sc.env and not sc.timed:
            out += [(S.EnvRef("caller"), S.ADDRESS), (S.EnvRef("origin"), S.ADDRESS),
                    (S.EnvRef("callvalue"), S.UINT256)]
            if sc.contract is not None:
                out.append((S.EnvRef("this"), S.ContractAddr(sc.contract)))
        return out

    def refs(self, sc: Scope, want: Callable[[object], bool], depth: int = 3, budget: int = 2):
        """All references (up to ``depth`` steps from a root) whose type satisfies ``want``."""
        frontier = self._roots(sc)
        found = []
        for level in range(depth + 1):
            nxt = []
            for r, t in frontier:
                if want(t):
                    found.append((r, t))
                if level == depth:
                    continue
                if isinstance(t, S.ContractType):
                    for f, ft in sc.sigma.storage[t.contract]:
                        nxt.append((S.Field(r, f), ft))
                elif isinstance(t, S.ContractAddr):
                    nxt.append((S.Coerce(r, t.contract), S.ContractType(t.contract)))
                elif isinstance(t, S.MappingType) and budget > 0:
                    key = self.expr(sc, t.key, budget - 1)
                    nxt.append((S.Index(r, key), t.value))
            frontier = nxt
        return found

    def pick_ref(self, sc: Scope, want, budget: int = 2):
        cands = self.refs(sc, want, budget=budget)
        return self.rng.choice(cands) if cands else None

    # -- expressions --------------------------------------------------------

    def literal(self, t: S.IntType) -> S.IntLit:
        if t.is_math:
            pool = [-3, -1, 0, 1, 2, 3, 7, 2 ** 255, self.rng.randint(-(2 ** 64), 2 ** 64)]
        else:
            pool = [t.min, t.max, 0, 1, 2, t.max - 1, self.rng.randint(t.min, t.max)]
        return S.IntLit(self.rng.choice([n for n in pool if t.contains(n)]))

    def expr(self, sc: Scope, t, depth: Optional[int] = None):
        """An expression the checker accepts at type ``t`` (int types convert)."""
        depth = self.cfg.expr_depth if depth is None else depth
        if isinstance(t, S.BoolType):
            return self.bool_expr(sc, depth)
        if isinstance(t, (S.AddressType, S.ContractAddr)):
            return self.addr_expr(sc, depth)
        return self.int_expr(sc, t, depth)

    def int_expr(self, sc: Scope, t: S.IntType, depth: int):
        r = self.rng.random()
        # bounded targets mostly get terms that fit without a range obligation
        fits = (lambda u: isinstance(u, S.IntType) and not u.is_math and t.min <= u.min and u.max <= t.max) if not t.is_math \
            else (lambda u: isinstance(u, S.IntType))
        if depth <= 0 or r < 0.3 or (not t.is_math and self.chance(0.75)):
            if self.chance(0.5):
                ref = self.pick_ref(sc, fits if self.chance(0.8) else (lambda u: isinstance(u, S.IntType)), depth)
                if ref is not None:
                    return S.RefExpr(ref[0])
            return self.literal(t)
        if r < 0.85:
            op = self.rng.choice(["+", "-", "*", "div", "mod", "+", "-", "exp"])
            left = self.int_expr(sc, S.INT, depth - 1)
            if op == "exp":
                return S.BinI(op, left, S.IntLit(self.rng.randint(0, 3)))
            return S.BinI(op, left, self.int_expr(sc, S.INT, depth - 1))
        return S.Ite(self.bool_expr(sc, depth - 1), self.int_expr(sc, t, depth - 1), self.int_expr(sc, t, depth - 1))

    def bool_expr(self, sc: Scope, depth: int):
        r = self.rng.random()
        if depth <= 0 or r < 0.15:
            if self.chance(0.5):
                ref = self.pick_ref(sc, lambda u: isinstance(u, S.BoolType), depth)
                if ref is not None:
                    return S.RefExpr(ref[0])
            return S.BoolLit(self.chance(0.5))
        d = depth - 1
        if r < 0.4:
            return S.Cmp(self.rng.choice(["<", "<=", ">=", ">"]), self.int_expr(sc, S.INT, d), self.int_expr(sc, S.INT, d))
        if r < 0.55:
            kind = self.rng.choice([S.INT, S.BOOL, S.ADDRESS])
            return S.Eq(self.expr(sc, kind, d), self.expr(sc, kind, d))
        if r < 0.65:
            return S.Not(self.bool_expr(sc, d))
        if r < 0.8:
            return S.BinB(self.rng.choice(["and", "or", "==>"]), self.bool_expr(sc, d), self.bool_expr(sc, d))
        if r < 0.9:
            return S.InRange(self.rng.choice(INT_TYPES + (S.INT,)), self.int_expr(sc, S.INT, d))
        return S.Ite(self.bool_expr(sc, d), self.bool_expr(sc, d), self.bool_expr(sc, d))

    def addr_expr(self, sc: Scope, depth: int):
        if depth > 0 and self.chance(0.15):
            return S.Ite(self.bool_expr(sc, depth - 1), self.addr_expr(sc, depth - 1), self.addr_expr(sc, depth - 1))
        if not sc.timed and self.chance(0.2):
            ref = self.pick_ref(sc, lambda u: isinstance(u, S.ContractType), depth)
            if ref is not None:
                return S.AddrOf(ref[0])
        ref = self.pick_ref(sc, lambda u: isinstance(u, (S.AddressType, S.ContractAddr)), depth)
        if ref is not None:
            return S.RefExpr(ref[0])
        # no address in scope: fall back to the environment when allowed
        if sc.env and not sc.timed:
            return S.RefExpr(S.EnvRef(self.rng.choice(["caller", "origin"])))
        raise _NoTerm("no address expression in scope")

    # -- mapping and slot expressions -----------------------------------------

    def mapping(self, sc: Scope, mu, depth: int = 2):
        if not isinstance(mu, S.MappingType):
            return self.expr(sc, mu, depth)
        if self.chance(0.5):
            ref = self.pick_ref(sc, lambda u: u == mu, 1)
            if ref is not None:
                if self.chance(0.3):
                    return S.RefExpr(ref[0])
                return S.MapUpd(ref[0], self._pairs(sc, mu, depth))
        return S.MapLit(self._pairs(sc, mu, depth))

    def _pairs(self, sc: Scope, mu: S.MappingType, depth: int):
        n = self.rng.randint(0, 2)
        return tuple((self.expr(sc, mu.key, 1), self.mapping(sc, mu.value, depth - 1)) for _ in range(n))

    def slot(self, sc: Scope, t, depth: int = 2):
        sc = replace(sc, timed=False)
        if isinstance(t, S.ContractType):
            cands = self.refs(sc, lambda u: u == t, budget=1)
            if cands and (depth <= 0 or self.chance(0.4)):
                return S.SlotRef(self.rng.choice(cands)[0])
            if depth <= 0:
                raise _NoTerm(f"no reference of type {t}")
            ctor = sc.sigma.cnstr[t.contract]
            args = tuple(self.slot(sc, p.type, depth - 1) for p in ctor.iface)
            value = _slot_form(self.expr(sc, S.UINT256, 1)) if ctor.payable else None
            return S.New(t.contract, args, value)
        if isinstance(t, S.ContractAddr):
            return S.SlotAddr(self.slot(sc, S.ContractType(t.contract), depth))
        return _slot_form(self.mapping(sc, t))

    # -- declarations ---------------------------------------------------------

    def cases(self, sc: Scope):
        if self.chance(0.5):
            return [S.BoolLit(True)]
        c = self.bool_expr(sc, 2)
        return [c, S.Not(c)]

    def layout(self, sigma: TypingState):
        n = self.rng.randint(0, self.cfg.max_fields)
        names = self.rng.sample("abcdefgh", n)
        lay = [(x, self.slot_type(sigma)) for x in names]
        lay.insert(self.rng.randint(0, n), ("balance", S.UINT256))
        return lay

    def creates(self, sc: Scope, layout):
        out = []
        for x, t in layout:
            if x == "balance" and self.chance(0.5):
                rhs = S.SlotRef(S.EnvRef("callvalue"))
            else:
                rhs = self.slot(sc, t)
            out.append(S.Create(t, x, rhs))
        return tuple(out)

    def constructor(self, sigma: TypingState, name: str):
        iface = self.iface(sigma)
        sc = Scope(sigma, None, iface)
        iff = tuple(self.bool_expr(sc, 1) for _ in range(self.rng.randint(0, 1)) if self.chance(0.3))
        layout = self.layout(sigma)
        cases = tuple(S.CtorCase(c, self.creates(sc, layout)) for c in self.cases(sc))
        post_sc = Scope(sigma.with_storage(name, layout), name, iface)
        ensures = tuple(self.bool_expr(post_sc, 2) for _ in range(self.rng.randint(0, 1)))
        return S.Constructor(iface, self.chance(0.3), iff, cases, ensures)

    def update_targets(self, sigma: TypingState, contract: str):
        cands = [S.Var(x) for x, _ in sigma.storage[contract]]
        for x, t in sigma.storage[contract]:
            if isinstance(t, S.ContractType):
                cands += [S.Field(S.Var(x), f) for f, _ in sigma.storage[t.contract]]
        self.rng.shuffle(cands)
        chosen = []
        for r in cands[: self.rng.randint(0, 3)]:
            if all(not S.at_least_as_specific(c, r) and not S.at_least_as_specific(r, c) for c in chosen):
                chosen.append(r)
        return chosen

    def target_type(self, sigma: TypingState, contract: str, r):
        if isinstance(r, S.Var):
            return sigma.field_type(contract, r.name)
        inner = sigma.field_type(contract, r.inner.name)
        return sigma.field_type(inner.contract, r.name)

    def updates(self, sc: Scope):
        return tuple(S.Update(r, self.slot(sc, self.target_type(sc.sigma, sc.contract, r)))
                     for r in self.update_targets(sc.sigma, sc.contract))

    def transition(self, sigma: TypingState, contract: str, name: str):
        iface = self.iface(sigma, "q")
        sc = Scope(sigma, contract, iface)
        timed = replace(sc, timed=True)
        ret = self.rng.choice(ABI_BASES) if self.chance(0.5) else None
        iff = tuple(self.bool_expr(sc, 2) for _ in range(self.rng.randint(0, 2)))
        cases = []
        for c in self.cases(sc):
            rets = self.expr(timed, ret, 2) if ret is not None else None
            cases.append(S.TransCase(c, self.updates(sc), rets))
        ensures = tuple(self.bool_expr(timed, 2) for _ in range(self.rng.randint(0, 1)))
        return S.Transition(name, iface, self.chance(0.3), ret, iff, tuple(cases), ensures)

    def contract(self, sigma: TypingState, name: str, sid: int = 0):
        """Generate and check one contract; returns ``(raw, typed, Σ′)``."""
        ctor = self.constructor(sigma, name)
        k, layout, _ = check_ctor(sigma, name, ctor, sid)
        sigma2 = sigma.with_storage(name, layout).with_cnstr(name, k)
        trans = tuple(self.transition(sigma2, name, f"t{i}") for i in range(self.rng.randint(0, self.cfg.max_transitions)))
        inv_sc = Scope(sigma2, name, (), env=False)
        invs = tuple(self.bool_expr(inv_sc, 2) for _ in range(self.rng.randint(0, 1)))
        raw = S.Contract(name, ctor, trans, invs)
        typed, sigma3 = Checker().contract(sigma, sid, raw)
        return raw, typed, sigma3

    def spec(self) -> Tuple[S.Spec, S.Spec, TypingState]:
        """``(untyped spec, typed spec, Σ)``; retries on generator dead ends."""
        while True:
            try:
                return self._spec()
            except _NoTerm:
                continue

    def _spec(self):
        sigma = EMPTY_SIGMA
        raw, typed = [], []
        for i in range(self.rng.randint(1, self.cfg.max_contracts)):
            r, c, sigma = self.contract(sigma, f"C{i}", i)
            raw.append(r)
            typed.append(c)
        return S.Spec(tuple(raw)), S.Spec(tuple(typed)), sigma


def _slot_form(e):
    """The shape the parser gives a bare reference or ``addr(r)`` in slot position."""
    if isinstance(e, S.RefExpr):
        return S.SlotRef(e.ref)
    if isinstance(e, S.AddrOf):
        return S.SlotAddr(S.SlotRef(e.ref))
    return e


class _NoTerm(Exception):
    """The generator painted itself into a corner; the caller retries."""


# ---------------------------------------------------------------------------
# random well-typed stores and environments


class StoreGen:
    def __init__(self, rng: random.Random, sigma: TypingState):
        self.rng = rng
        self.sigma = sigma

    def int_value(self, t: S.IntType) -> int:
        lo, hi = (-(2 ** 256), 2 ** 256) if t.is_math else (t.min, t.max)
        r = self.rng.random()
        if r < 0.4:
            pool = [n for n in (0, 1, 2, 3, 9, 10, -1, lo, lo + 1, hi - 1, hi) if lo <= n <= hi]
            return self.rng.choice(pool)
        if r < 0.75:
            return self.rng.randint(max(lo, -20), min(hi, 20))
        return self.rng.randint(lo, hi)

    def addr(self, s: Optional[State] = None) -> Addr:
        pool = list(range(4)) + sorted(s.dom() if s is not None else ())
        return Addr(self.rng.choice(pool))

    def value(self, t, s: Optional[State] = None):
        if isinstance(t, S.IntType):
            return self.int_value(t)
        if isinstance(t, S.BoolType):
            return self.rng.random() < 0.5
        if isinstance(t, S.AddressType):
            return self.addr(s)
        if isinstance(t, S.MappingType):
            entries = {}
            for _ in range(self.rng.randint(0, 3)):
                entries[self.value(t.key, s)] = self.value(t.value, s)
            d = self.value(t.value, s) if self.rng.random() < 0.3 else None
            from .values import default
            return MapVal(key_sort(t.key), default(t.value) if d is None else d, entries)
        raise TypeError(t)

    def store(self, roots: Sequence[str], s: Optional[State] = None) -> Tuple[State, List[Addr]]:
        """Add one instance per root (plus whatever they reference) to ``s``."""
        s = s if s is not None else State()
        out = []
        for r in roots:
            loc, s = self._instance(r, s)
            out.append(loc)
        return s, out

    def _fresh(self, s: State) -> int:
        return s.fresh() + (self.rng.randint(1, 3) if self.rng.random() < 0.2 else 0)

    def _instance(self, contract: str, s: State) -> Tuple[Addr, State]:
        loc = self._fresh(s)
        # reserve the location so nested instances go elsewhere
        s = s.with_instance(loc, Instance(contract, {}))
        vals = {}
        for x, t in self.sigma.storage[contract]:
            if isinstance(t, (S.ContractType, S.ContractAddr)):
                existing = [Addr(n) for n, i in sorted(s.slots.items()) if i.contract == t.contract and n != loc]
                if existing and self.rng.random() < 0.35:
                    vals[x] = self.rng.choice(existing)
                else:
                    sub, s = self._instance(t.contract, s)
                    vals[x] = sub
            else:
                vals[x] = self.value(t, s)
        return Addr(loc), s.with_instance(loc, Instance(contract, vals))

    def env(self, s: State, iface: Sequence[S.Param]) -> Optional[Dict[str, object]]:
        rho = {}
        for p in iface:
            if isinstance(p.type, S.ContractAddr):
                locs = typed_locations(self.sigma, s, p.type.contract)
                if not locs:
                    return None
                rho[p.name] = self.rng.choice(locs)
            else:
                rho[p.name] = self.value(p.type, s)
        rho["caller"] = self.addr(s)
        rho["origin"] = self.addr(s)
        rho["callvalue"] = self.int_value(S.UINT256)
        return rho

    def context(self, iface: Sequence[S.Param], contract: Optional[str]):
        """A well-typed ``(s, ρ, ℓ)`` with one instance for ``contract`` and each address param."""
        roots = [contract] if contract is not None else []
        roots += [p.type.contract for p in iface if isinstance(p.type, S.ContractAddr)]
        if self.sigma.contracts() and self.rng.random() < 0.3:
            roots.append(self.rng.choice(self.sigma.contracts()))
        s, locs = self.store(roots)
        rho = self.env(s, iface)
        loc = locs[0] if contract is not None else None
        return s, rho, loc

    def perturb(self, s: State) -> State:
        """Same shape, fresh base values: a plausible post-state for timed terms."""
        out = {}
        for n, inst in s.slots.items():
            layout = dict(self.sigma.storage[inst.contract])
            vals = {}
            for x, v in inst.vars.items():
                t = layout[x]
                keep = isinstance(t, (S.ContractType, S.ContractAddr)) or self.rng.random() < 0.4
                vals[x] = v if keep else self.value(t, s)
            out[n] = Instance(inst.contract, vals)
        return State(out)


# ---------------------------------------------------------------------------
# table permutation


def _permute_value(v, rng):
    if isinstance(v, MapVal):
        items = [(k, _permute_value(x, rng)) for k, x in v._table.items()]
        rng.shuffle(items)
        return MapVal(v.key_sort, _permute_value(v.default, rng), dict(items))
    return v


def permute_state(s, rng: random.Random):
    if isinstance(s, Timed):
        return Timed(permute_state(s.pre, rng), permute_state(s.post, rng))
    slots = list(s.slots.items())
    rng.shuffle(slots)
    out = {}
    for n, inst in slots:
        vs = list(inst.vars.items())
        rng.shuffle(vs)
        out[n] = Instance(inst.contract, {k: _permute_value(v, rng) for k, v in vs})
    return State(out)


def permute_env(rho, rng: random.Random):
    items = list(rho.items())
    rng.shuffle(items)
    return {k: _permute_value(v, rng) for k, v in items}


def permute_sigma(sigma: TypingState, rng: random.Random) -> TypingState:
    def shuf(m):
        items = list(m.items())
        rng.shuffle(items)
        return dict(items)

    from types import MappingProxyType
    return TypingState(MappingProxyType(shuf(sigma.storage)), MappingProxyType(shuf(sigma.cnstr)),
                       MappingProxyType(shuf(sigma.trans)))


# ---------------------------------------------------------------------------
# outcomes


def outcome(fn) -> tuple:
    try:
        return ("ok", fn())
    except EvalError as exc:
        return ("err", type(exc).__name__, exc.rule)


def _same(a, b) -> bool:
    if isinstance(a, tuple) and isinstance(b, tuple):
        return len(a) == len(b) and all(_same(x, y) for x, y in zip(a, b))
    if isinstance(a, State) or isinstance(b, State):
        return isinstance(a, State) and isinstance(b, State) and a == b and a.fingerprint() == b.fingerprint()
    if isinstance(a, str) or a is None:
        return a == b
    return value_eq(a, b)


def same_outcome(a: tuple, b: tuple) -> bool:
    return _same(a, b)


# ---------------------------------------------------------------------------
# instance generation per category


@dataclass
class Instance_:
    category: str
    sigma: TypingState
    term: object
    state: object
    rho: Dict[str, object]
    loc: Optional[Addr]
    run: Callable[[TypingState, object, Dict[str, object]], object]

    def describe(self) -> str:
        st = self.state
        if isinstance(st, Timed):
            sj = {"pre": state_to_json(st.pre), "post": state_to_json(st.post)}
        else:
            sj = state_to_json(st)
        return (f"category: {self.category}\nterm: {_pretty_any(self.term)}\nloc: {self.loc!r}\n"
                f"env: { {k: value_to_json(v) for k, v in sorted(self.rho.items())} }\nstate: {sj}")


def _pretty_any(t) -> str:
    if isinstance(t, tuple):
        return ", ".join(_pretty_any(x) for x in t)
    if isinstance(t, S.REF_TYPES):
        return S.pretty_ref(t)
    if isinstance(t, S.Create):
        return f"{t.type} {t.name} := {S.pretty_slot(t.rhs)}"
    if isinstance(t, S.Update):
        return f"{S.pretty_ref(t.target)} := {S.pretty_slot(t.rhs)}"
    if isinstance(t, S.EXPR_TYPES):
        return S.pretty_expr(t)
    try:
        return S.pretty_slot(t)
    except Exception:
        return S.pretty(t) if isinstance(t, S.Spec) else repr(t)


class InstanceGen:
    """Produces well-typed (term, state, ρ) instances for one category."""

    def __init__(self, rng: random.Random, cfg: GenConfig = GenConfig()):
        self.rng = rng
        self.gen = Gen(rng, cfg)
        self.cfg = cfg
        self._specs: List[Tuple[TypingState, S.Spec]] = []

    def _sigma(self) -> Tuple[TypingState, S.Spec]:
        # reuse a handful of specs so most time goes to terms, not specs
        if len(self._specs) < 16 or self.rng.random() < 0.05:
            _, typed, sigma = self.gen.spec()
            self._specs.append((sigma, typed))
            return sigma, typed
        return self.rng.choice(self._specs)

    def make(self, category: str, attempts: int = 50) -> Instance_:
        for _ in range(attempts):
            try:
                inst = getattr(self, f"_{category}")()
            except (_NoTerm, ActError):
                continue
            if inst is not None:
                return inst
        raise RuntimeError(f"could not generate a {category} instance")

    def _scope_ctx(self, sigma, contract: Optional[str], timed: bool = False):
        iface = self.gen.iface(sigma, "q")
        sc = Scope(sigma, contract, iface, timed=timed)
        sg = StoreGen(self.rng, sigma)
        s, rho, loc = sg.context(iface, contract)
        if rho is None:
            raise _NoTerm("no typed location for an address parameter")
        if timed:
            s = Timed(s, sg.perturb(s))
        return sc, s, rho, loc

    def _contract(self, sigma):
        names = sigma.contracts()
        return self.rng.choice(names) if names and self.rng.random() < 0.85 else None

    def _expr(self):
        sigma, _ = self._sigma()
        contract = self._contract(sigma)
        timed = contract is not None and self.rng.random() < 0.3
        sc, s, rho, loc = self._scope_ctx(sigma, contract, timed)
        t = self.rng.choice([S.BOOL, S.INT, S.ADDRESS] + list(INT_TYPES))
        e = self.gen.expr(sc, t)
        typed, _, _ = check_expr(sigma, sc.iface, (), e, contract, timed)
        return Instance_("expr", sigma, typed, s, rho, loc, lambda sg, st, r: eval_expr(st, r, loc, typed))

    def _ref(self):
        sigma, _ = self._sigma()
        contract = self._contract(sigma)
        timed = contract is not None and self.rng.random() < 0.3
        sc, s, rho, loc = self._scope_ctx(sigma, contract, timed)
        cands = self.gen.refs(sc, lambda t: True)
        if not cands:
            return None
        r, _ = self.rng.choice(cands)
        typed, _, _ = check_ref(sigma, sc.iface, r, contract, timed)
        return Instance_("ref", sigma, typed, s, rho, loc, lambda sg, st, rr: eval_ref(st, rr, loc, typed))

    def _mapping(self):
        sigma, _ = self._sigma()
        contract = self._contract(sigma)
        sc, s, rho, loc = self._scope_ctx(sigma, contract)
        mu = self.gen.mu_type()
        if not isinstance(mu, S.MappingType):
            mu = S.MappingType(self.rng.choice(ABI_BASES), mu)
        m = self.gen.mapping(sc, mu)
        if isinstance(m, S.RefExpr):
            m = S.MapUpd(m.ref, ())
        typed = Checker().mapping(Ctx(sigma, 0, sc.iface, (), contract), m, mu)
        return Instance_("mapping", sigma, typed, s, rho, loc, lambda sg, st, r: eval_mapping(st, r, loc, typed))

    def _slot(self):
        sigma, _ = self._sigma()
        contract = self._contract(sigma)
        sc, s, rho, loc = self._scope_ctx(sigma, contract)
        t = self.gen.slot_type(sigma)
        se = self.gen.slot(sc, t)
        typed, _ = check_slot(sigma, sc.iface, (), se, t, contract)
        return Instance_("slot", sigma, typed, s, rho, loc, lambda sg, st, r: eval_slot(sg, st, r, loc, typed))

    def _creates(self):
        sigma, _ = self._sigma()
        sc, s, rho, _ = self._scope_ctx(sigma, None)
        layout = self.gen.layout(sigma)
        creates = self.gen.creates(sc, layout)
        typed, _ = Checker().creates(Ctx(sigma, 0, sc.iface, (), None), creates)
        name = "Fresh"
        sigma2 = sigma.with_storage(name, layout)
        return Instance_("creates", sigma2, typed, s, rho, None,
                         lambda sg, st, r: eval_creates(sg, st, r, name, typed))

    def _updates(self):
        sigma, _ = self._sigma()
        contract = self.rng.choice(sigma.contracts())
        sc, s, rho, loc = self._scope_ctx(sigma, contract)
        ups = self.gen.updates(sc)
        typed, _ = check_updates(sigma, sc.iface, (), contract, ups)
        return Instance_("updates", sigma, typed, s, rho, loc,
                         lambda sg, st, r: eval_updates(sg, st, r, loc, typed))

    def _ctor(self):
        sigma, _ = self._sigma()
        name = "Fresh"
        k = self.gen.constructor(sigma, name)
        typed, layout, _ = check_ctor(sigma, name, k)
        sigma2 = sigma.with_storage(name, layout).with_cnstr(name, typed)
        sg = StoreGen(self.rng, sigma)
        s, rho, _ = sg.context(typed.iface, None)
        if rho is None:
            return None
        return Instance_("ctor", sigma2, typed, s, rho, None,
                         lambda sgm, st, r: eval_ctor(sgm, st, r, name, typed))

    def _trans(self):
        sigma, _ = self._sigma()
        contract = self.rng.choice(sigma.contracts())
        t = self.gen.transition(sigma, contract, "t")
        typed, _ = check_trans(sigma, contract, t)
        sg = StoreGen(self.rng, sigma)
        s, rho, loc = sg.context(typed.iface, contract)
        if rho is None:
            return None
        return Instance_("trans", sigma, typed, s, rho, loc,
                         lambda sgm, st, r: eval_trans(sgm, st, r, loc, typed))


# ---------------------------------------------------------------------------
# property suites


@dataclass
class Failure:
    suite: str
    message: str
    reproducer: str

    def describe(self) -> str:
        return f"[{self.suite}] {self.message}\n{self.reproducer}"


@dataclass
class SuiteResult:
    name: str
    checked: int = 0
    skipped: int = 0
    failures: List[Failure] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {"suite": self.name, "checked": self.checked, "skipped": self.skipped, "ok": self.ok,
                "failures": [{"message": f.message, "reproducer": f.reproducer} for f in self.failures]}


def determinism_suite(seed: int, n: int, categories: Sequence[str] = CATEGORIES) -> List[SuiteResult]:
    """Evaluate each instance twice, the second time with shuffled tables."""
    out = []
    for cat in categories:
        rng = random.Random(f"{seed}:{cat}")
        ig = InstanceGen(rng)
        res = SuiteResult(f"determinism/{cat}")
        for _ in range(n):
            inst = ig.make(cat)
            first = outcome(lambda: inst.run(inst.sigma, inst.state, inst.rho))
            prng = random.Random(rng.random())
            second = outcome(lambda: inst.run(permute_sigma(inst.sigma, prng), permute_state(inst.state, prng),
                                              permute_env(inst.rho, prng)))
            res.checked += 1
            if not same_outcome(first, second):
                res.failures.append(Failure(res.name, f"outcomes differ: {first!r} vs {second!r}", inst.describe()))
        out.append(res)
    return out


@dataclass
class SafetyCase:
    sigma: TypingState
    spec: S.Spec
    contract: str
    trans: S.Transition

    def reproducer(self, s: State, rho, loc: Addr) -> str:
        return (f"spec:\n{S.pretty(self.spec)}\ntransition: {self.contract}.{self.trans.name} at {loc!r}\n"
                f"env: { {k: value_to_json(v) for k, v in sorted(rho.items())} }\n"
                f"state: {state_to_json(s)}")


def _obligations_pass(checked_obligations, bounds: BoundsConfig) -> bool:
    for ob in checked_obligations:
        if not discharge(ob, bounds).ok:
            return False
    return True


def safety_cases(seed: int, n: int, bounds: BoundsConfig = FILTER_BOUNDS, max_specs: int = 100_000):
    """Yield ``n`` generated transitions whose spec's obligations all pass within bounds."""
    rng = random.Random(f"{seed}:safety")
    gen = Gen(rng)
    produced = 0
    for _ in range(max_specs):
        if produced >= n:
            return
        try:
            raw, typed, sigma = gen.spec()
            from .typecheck import check_spec
            result = check_spec(raw)
        except ActError:
            continue
        if not _obligations_pass(result.obligations, bounds):
            continue
        for c in result.spec.contracts:
            for t in c.transitions:
                if produced >= n:
                    return
                produced += 1
                yield SafetyCase(result.sigma, raw, c.name, t)


def _lemma_violations(sigma, case: SafetyCase, s: State, rho, loc: Addr, v, s2: State) -> List[str]:
    bad = []
    if not loc_has_contract(sigma, s2, loc, case.contract):
        bad.append(f"ℓ no longer typed at {case.contract}")
    if not env_has_iface(sigma, s2, rho, case.trans.iface):
        bad.append("ρ no longer typed at I")
    if not s.dom() <= s2.dom():
        bad.append(f"locations disappeared: {sorted(s.dom() - s2.dom())}")
    for n in sorted(s2.dom() - s.dom()):
        if not loc_has_contract(sigma, s2, Addr(n), s2.slots[n].contract):
            bad.append(f"new location @{n} is not typable")
    if case.trans.ret_type is not None and not value_has_sigma(sigma, s2, v, case.trans.ret_type):
        bad.append(f"return value {v!r} not typed at {case.trans.ret_type}")
    return bad


def _reachable(sigma: TypingState, s: State, loc: Addr) -> set:
    """Locations reachable from ``loc`` through contract-typed fields."""
    seen, todo = set(), [loc.n]
    while todo:
        n = todo.pop()
        if n in seen or n not in s.slots:
            continue
        seen.add(n)
        inst = s.slots[n]
        for x, t in sigma.storage[inst.contract]:
            if isinstance(t, S.ContractType):
                todo.append(inst.vars[x].n)
    return seen


def _phase_oracle(sigma, case_updates, s: State, rho, loc: Addr, s2: State) -> List[str]:
    """Direct-storage targets must hold their right-hand side as computed on the pre-state."""
    bad = []
    st = s
    rhs_vals = []
    for u in case_updates:
        v, st = eval_slot(sigma, st, rho, loc, u.rhs)
        rhs_vals.append(v)
    for u, v in zip(case_updates, rhs_vals):
        if isinstance(u.target, S.Var) and not _same(s2.slots[loc.n].vars[u.target.name], v):
            bad.append(f"{u.target.name} holds {s2.slots[loc.n].vars[u.target.name]!r}, expected {v!r}")
    return bad


def _chosen_case(s, rho, loc, t: S.Transition):
    for c in t.cases:
        if eval_expr(s, rho, loc, c.cond) is True:
            return c
    return None


def type_safety_suite(seed: int, n: int, tries_per_case: int = 40, bounds: BoundsConfig = FILTER_BOUNDS
                      ) -> List[SuiteResult]:
    """Preservation, progress, frame and phase-split checks on generated transitions.

    Only transitions from specs whose obligations pass within ``bounds`` are
    used, and only stores where the precondition holds are run.
    """
    safety = SuiteResult("type-safety")
    frame = SuiteResult("frame")
    phase = SuiteResult("phase-split")
    rng = random.Random(f"{seed}:stores")
    for case in safety_cases(seed, 10 * n + 100, bounds):
        if safety.checked >= n:
            break
        sg = StoreGen(rng, case.sigma)
        ran = False
        for _ in range(tries_per_case):
            s, rho, loc = sg.context(case.trans.iface, case.contract)
            if rho is None:
                continue
            try:
                if not all(eval_expr(s, rho, loc, e) is True for e in case.trans.iff):
                    continue
            except EvalError as exc:
                safety.failures.append(Failure(safety.name, f"iff evaluation failed: {exc}",
                                               case.reproducer(s, rho, loc)))
                ran = True
                break
            ran = True
            try:
                v, s2 = eval_trans(case.sigma, s, rho, loc, case.trans)
            except (Stuck, NoCaseMatched, MultipleCasesMatched) as exc:
                s_small = shrink_state(case.sigma, s, lambda st: _raises(case, st, rho, loc))
                safety.failures.append(Failure(safety.name, f"{type(exc).__name__}: {exc}",
                                               case.reproducer(s_small, rho, loc)))
                break
            except ResourceLimit:
                safety.skipped += 1
                break
            safety.checked += 1
            bad = _lemma_violations(case.sigma, case, s, rho, loc, v, s2)
            if bad:
                safety.failures.append(Failure(safety.name, "; ".join(bad), case.reproducer(s, rho, loc)))
            frame.checked += 1
            keep = _reachable(case.sigma, s, loc)
            changed = [m for m in sorted(s.dom() - keep) if s.slots[m] != s2.slots.get(m)]
            if changed:
                frame.failures.append(Failure(frame.name, f"unreachable locations changed: {changed}",
                                              case.reproducer(s, rho, loc)))
            c = _chosen_case(s, rho, loc, case.trans)
            phase.checked += 1
            pb = _phase_oracle(case.sigma, c.updates, s, rho, loc, s2)
            if pb:
                phase.failures.append(Failure(phase.name, "; ".join(pb), case.reproducer(s, rho, loc)))
            break
        if not ran:
            safety.skipped += 1
    return [safety, frame, phase]


def _raises(case: SafetyCase, s: State, rho, loc) -> bool:
    try:
        if not all(eval_expr(s, rho, loc, e) is True for e in case.trans.iff):
            return False
        eval_trans(case.sigma, s, rho, loc, case.trans)
    except (Stuck, NoCaseMatched, MultipleCasesMatched):
        return True
    except EvalError:
        return False
    return False


def shrink_state(sigma: TypingState, s: State, still_fails: Callable[[State], bool], rounds: int = 3) -> State:
    """Greedy shrinking: zero out base values and drop map entries while the failure persists."""
    from .values import default
    for _ in range(rounds):
        progress = False
        for n in sorted(s.slots):
            inst = s.slots[n]
            layout = dict(sigma.storage[inst.contract])
            for x, v in sorted(inst.vars.items()):
                t = layout[x]
                if isinstance(t, (S.ContractType, S.ContractAddr)):
                    continue
                d = default(t)
                if _same(v, d):
                    continue
                cand = s.with_var(n, x, d)
                if store_well_typed(sigma, cand) and still_fails(cand):
                    s, progress = cand, True
        if not progress:
            break
    return s


def run_all(seed: int, n: int) -> List[SuiteResult]:
    return determinism_suite(seed, n) + type_safety_suite(seed, n)
