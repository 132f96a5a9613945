"""Declarative type system made algorithmic.

``check_spec`` threads Σ through the contracts left to right, returns the
final Σ, an annotated copy of the input and the entailment obligations that
typing could not settle syntactically.  Obligations are discharged elsewhere
(:mod:`actlang.entailment`).

Integer typing is the one place where the rules leave freedom.  The checker
pushes an expected type down from the context (update targets, constructor
arguments, return types, mapping keys) and uses it as the result type of
untimed arithmetic; without one, arithmetic is typed at ``int``.  Conversions
emit an ``inrange`` obligation only when the target range does not already
contain the source range.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

from . import syntax as S
from .diagnostics import TypeCheckError, error
from .sigma import EMPTY_SIGMA, TypingState
from .traverse import walk


@dataclass(frozen=True)
class Obligation:
    """An entailment side condition ``Σ; I; Φ ⊨_{A?} goals``.

    For ``kind == "iffs"`` the goals are the callee constructor's iff
    conditions, to be evaluated after binding ``args`` to ``binder``.
    ``timed`` obligations come from timed positions (returns, ensures) and
    are checked over pre/post store pairs.
    """

    kind: str
    sigma: TypingState = field(repr=False, compare=False)
    sigma_id: int
    iface: Tuple[S.Param, ...]
    phi: Tuple[object, ...]
    contract: Optional[str]
    goals: Tuple[object, ...]
    rule: str
    span: Optional[S.Span] = field(default=None, compare=False)
    timed: bool = False
    args: Tuple[object, ...] = ()
    value: Optional[object] = None
    callee: Optional[str] = None
    binder: Tuple[S.Param, ...] = ()

    def to_json(self) -> dict:
        d = {
            "kind": self.kind,
            "rule": self.rule,
            "sigma": self.sigma_id,
            "contract": self.contract,
            "timed": self.timed,
            "iface": [[p.name, str(p.type)] for p in self.iface],
            "phi": [S.pretty_expr(e) for e in self.phi],
            "goals": [S.pretty_expr(e) for e in self.goals],
        }
        if self.kind == "iffs":
            d["callee"] = self.callee
            d["binder"] = [[p.name, str(p.type)] for p in self.binder]
            d["args"] = [S.pretty_slot(a) for a in self.args]
            d["value"] = S.pretty_slot(self.value) if self.value is not None else None
        return d

    @property
    def hash(self) -> str:
        text = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def location(self) -> str:
        return str(self.span) if self.span else "<unknown>"


@dataclass(frozen=True)
class Ctx:
    sigma: TypingState
    sigma_id: int
    iface: Tuple[S.Param, ...]
    phi: Tuple[object, ...]
    contract: Optional[str]
    timed: bool = False

    def calldata(self, name: str):
        for p in self.iface:
            if p.name == name:
                return p.type
        return None

    def at(self, **kw) -> "Ctx":
        return replace(self, **kw)


@dataclass
class CheckResult:
    sigma: TypingState
    spec: S.Spec
    obligations: List[Obligation]
    prefixes: List[TypingState]


def _err(message: str, node, rule: str):
    raise TypeCheckError([error(message, getattr(node, "span", None), rule)])


def _contains(outer: S.IntType, inner: S.IntType) -> bool:
    if outer.is_math:
        return True
    if inner.is_math:
        return False
    return outer.min <= inner.min and inner.max <= outer.max


class Checker:
    def __init__(self):
        self.obligations: List[Obligation] = []

    # -- obligations --------------------------------------------------------

    def emit(self, ctx: Ctx, goals, rule: str, node, **kw):
        self.obligations.append(Obligation(
            kind=kw.pop("kind", "exprs"), sigma=ctx.sigma, sigma_id=ctx.sigma_id, iface=ctx.iface,
            phi=ctx.phi, contract=ctx.contract, goals=tuple(goals), rule=rule,
            span=getattr(node, "span", None), timed=ctx.timed, **kw))

    # -- well-formedness ----------------------------------------------------

    def wf_abi(self, sigma: TypingState, t, node):
        if isinstance(t, S.IntType) and t.is_math:
            _err("`int` is not allowed in an interface", node, "WFInt")
        if isinstance(t, S.ContractAddr) and t.contract not in sigma.storage:
            _err(f"{t.contract} is not a known contract", node, "WFContractAddr")

    def wf_slot(self, sigma: TypingState, t, node):
        if isinstance(t, S.ContractType):
            if t.contract not in sigma.storage:
                _err(f"{t.contract} is not a known contract", node, "T-WFContract")
        elif isinstance(t, S.ContractAddr):
            self.wf_abi(sigma, t, node)
        # mapping and base types have no premise

    def wf_iface(self, sigma: TypingState, iface, node):
        for p in iface:
            self.wf_abi(sigma, p.type, p)

    # -- references ---------------------------------------------------------

    def ref(self, ctx: Ctx, r) -> Tuple[object, object, str]:
        """Return ``(annotated ref, σ, tag)``."""
        if isinstance(r, S.Var):
            t = ctx.calldata(r.name)
            if t is not None:
                return replace(r, annot=t), t, "N"
            if ctx.contract is not None:
                t = ctx.sigma.field_type(ctx.contract, r.name)
                if t is not None:
                    if ctx.timed:
                        _err(f"storage variable {r.name} must be written pre({r.name}) or post({r.name}) here",
                             r, "T-Storage")
                    return replace(r, annot=t), t, "S"
            _err(f"unbound name {r.name}", r, "T-Storage")
        if isinstance(r, (S.Pre, S.Post)):
            rule = "T-StoragePre" if isinstance(r, S.Pre) else "T-StoragePost"
            if not ctx.timed:
                _err(f"{S.pretty_ref(r)} is only allowed in timed positions", r, rule)
            if ctx.contract is None or ctx.calldata(r.name) is not None:
                _err(f"{r.name} is not a storage variable", r, rule)
            t = ctx.sigma.field_type(ctx.contract, r.name)
            if t is None:
                _err(f"unbound storage variable {r.name}", r, rule)
            return replace(r, annot=t), t, "S"
        if isinstance(r, S.EnvRef):
            if ctx.timed:
                _err(f"{r.var} is only allowed in untimed positions", r, "T-Environment")
            if r.var == "this":
                if ctx.contract is None:
                    _err("`this` needs a current contract", r, "T-This")
                t = S.ContractAddr(ctx.contract)
            elif r.var == "callvalue":
                t = S.UINT256
            else:
                t = S.ADDRESS
            return replace(r, annot=t), t, "N"
        if isinstance(r, S.Coerce):
            inner, t, _ = self.ref(ctx, r.inner)
            if t != S.ContractAddr(r.contract):
                _err(f"cannot coerce a reference of type {t} to {r.contract}", r, "T-Coerce")
            out = S.ContractType(r.contract)
            return replace(r, inner=inner, annot=out), out, "N"
        if isinstance(r, S.Field):
            inner, t, tag = self.ref(ctx, r.inner)
            if not isinstance(t, S.ContractType):
                hint = " (coerce with `as` first)" if isinstance(t, S.ContractAddr) else ""
                _err(f"field access .{r.name} on a reference of type {t}{hint}", r, "T-Field")
            ft = ctx.sigma.field_type(t.contract, r.name)
            if ft is None:
                _err(f"{t.contract} has no field {r.name}", r, "T-Field")
            return replace(r, inner=inner, annot=ft), ft, tag
        if isinstance(r, S.Index):
            inner, t, _ = self.ref(ctx, r.inner)
            if not isinstance(t, S.MappingType):
                _err(f"indexing a reference of type {t}", r, "T-MapIndex")
            key, _ = self.expr(ctx, r.key, t.key)
            return replace(r, inner=inner, key=key, annot=t.value), t.value, "N"
        _err(f"unknown reference {r!r}", r, "T-Ref")

    # -- expressions --------------------------------------------------------

    def expr(self, ctx: Ctx, e, expected=None) -> Tuple[object, object]:
        """Check ``e``; when ``expected`` is given the result has exactly that type."""
        e2, t = self._synth(ctx, e, expected)
        if expected is None:
            return e2, t
        return e2, self._convert(ctx, e2, t, expected)

    def _convert(self, ctx: Ctx, e, t, expected):
        if t == expected:
            return t
        if isinstance(t, S.IntType) and isinstance(expected, S.IntType):
            if not _contains(expected, t):
                self.emit(ctx, [S.InRange(expected, e, span=e.span)], "T-NumConv", e)
            return expected
        _err(f"expected {expected}, found {t}", e, "T-Exp" if not isinstance(expected, S.IntType) else "T-NumConv")

    def _bool(self, ctx: Ctx, e):
        return self.expr(ctx, e, S.BOOL)[0]

    def _int_operand(self, ctx: Ctx, e, rule: str):
        e2, t = self.expr(ctx, e)
        if not isinstance(t, S.IntType):
            _err(f"expected an integer, found {t}", e, rule)
        return e2, t

    def _synth(self, ctx: Ctx, e, expected):
        if isinstance(e, S.IntLit):
            if isinstance(expected, S.IntType):
                if not expected.contains(e.value):
                    _err(f"literal {e.value} is out of range for {expected}", e, "T-Int")
                return e, expected
            return e, S.INT
        if isinstance(e, S.BoolLit):
            return e, S.BOOL
        if isinstance(e, S.RefExpr):
            r, t, _ = self.ref(ctx, e.ref)
            if isinstance(t, S.ContractAddr):
                t = S.ADDRESS  # T-Upcast
            if not S.is_base(t):
                _err(f"a reference of type {t} cannot be used as an expression", e, "T-Ref")
            return replace(e, ref=r), t
        if isinstance(e, S.AddrOf):
            if ctx.timed:
                _err("addr(...) is only allowed in untimed positions", e, "T-Addr")
            r, t, _ = self.ref(ctx, e.ref)
            if not isinstance(t, S.ContractType):
                _err(f"addr(...) needs a contract reference, found {t}", e, "T-Addr")
            return replace(e, ref=r), S.ADDRESS
        if isinstance(e, S.InRange):
            inner, _ = self._int_operand(ctx, e.operand, "T-Range")
            return replace(e, operand=inner), S.BOOL
        if isinstance(e, S.BinI):
            left, _ = self._int_operand(ctx, e.left, "T-BopI")
            right, _ = self._int_operand(ctx, e.right, "T-BopI")
            out = replace(e, left=left, right=right)
            if ctx.timed or not isinstance(expected, S.IntType):
                return out, S.INT
            if not expected.is_math:
                self.emit(ctx, [S.InRange(expected, out, span=e.span)], "T-BopI", e)
            return out, expected
        if isinstance(e, S.BinB):
            return replace(e, left=self._bool(ctx, e.left), right=self._bool(ctx, e.right)), S.BOOL
        if isinstance(e, S.Not):
            return replace(e, operand=self._bool(ctx, e.operand)), S.BOOL
        if isinstance(e, S.Cmp):
            left, _ = self._int_operand(ctx, e.left, "T-Cmp")
            right, _ = self._int_operand(ctx, e.right, "T-Cmp")
            return replace(e, left=left, right=right), S.BOOL
        if isinstance(e, S.Eq):
            left, lt = self.expr(ctx, e.left)
            right, rt = self.expr(ctx, e.right)
            if not (lt == rt or (isinstance(lt, S.IntType) and isinstance(rt, S.IntType))):
                _err(f"cannot compare {lt} with {rt}", e, "T-Eq")
            return replace(e, left=left, right=right), S.BOOL
        if isinstance(e, S.Ite):
            cond = self._bool(ctx, e.cond)
            if expected is not None:
                a, _ = self.expr(ctx, e.then, expected)
                b, _ = self.expr(ctx, e.orelse, expected)
                return replace(e, cond=cond, then=a, orelse=b), expected
            a, at = self.expr(ctx, e.then)
            b, bt = self.expr(ctx, e.orelse)
            if at == bt:
                return replace(e, cond=cond, then=a, orelse=b), at
            if isinstance(at, S.IntType) and isinstance(bt, S.IntType):
                return replace(e, cond=cond, then=a, orelse=b), S.INT
            _err(f"branches have types {at} and {bt}", e, "T-ITE")
        _err(f"unknown expression {e!r}", e, "T-Exp")

    # -- mapping and slot expressions ---------------------------------------

    def _pairs(self, ctx: Ctx, pairs, mu: S.MappingType):
        return tuple((self.expr(ctx, k, mu.key)[0], self.mapping(ctx, m, mu.value)) for k, m in pairs)

    def mapping(self, ctx: Ctx, m, mu):
        if isinstance(m, S.MapLit):
            if not isinstance(mu, S.MappingType):
                _err(f"mapping literal where {mu} is expected", m, "T-Mapping")
            return replace(m, pairs=self._pairs(ctx, m.pairs, mu), annot=mu)
        if isinstance(m, S.MapUpd):
            base, t, _ = self.ref(ctx, m.base)
            if not isinstance(t, S.MappingType):
                _err(f"mapping update of a reference of type {t}", m, "T-MappingUpd")
            if t != mu:
                _err(f"expected {mu}, found {t}", m, "T-MappingUpd")
            return replace(m, base=base, pairs=self._pairs(ctx, m.pairs, mu), annot=mu)
        if isinstance(mu, S.MappingType):
            if isinstance(m, S.RefExpr):
                # a bare mapping reference is read as the empty update ref[]
                return self.mapping(ctx, S.MapUpd(m.ref, (), span=m.span), mu)
            _err(f"expected {mu}, found an expression", m, "T-MapExp")
        return self.expr(ctx, m, mu)[0]

    def slot(self, ctx: Ctx, se, sigma_t):
        """Check a slot expression against the slot type ``sigma_t``."""
        ctx = ctx.at(timed=False)
        if isinstance(se, S.New):
            return self.new(ctx, se, sigma_t)
        if isinstance(se, S.SlotAddr):
            if isinstance(sigma_t, S.ContractAddr):
                inner = self.slot(ctx, se.inner, S.ContractType(sigma_t.contract))
                return replace(se, inner=inner)
            if sigma_t == S.ADDRESS and isinstance(se.inner, S.SlotRef):
                return self.expr(ctx, S.AddrOf(se.inner.ref, span=se.span), S.ADDRESS)[0]
            _err(f"addr(...) where {sigma_t} is expected", se, "T-SlotAddr")
        if isinstance(se, S.SlotRef):
            r, t, _ = self.ref(ctx, se.ref)
            if isinstance(t, S.ContractType):
                if t != sigma_t:
                    _err(f"expected {sigma_t}, found {t}", se, "T-SlotRef")
                return replace(se, ref=r)
            return self.mapping(ctx, S.RefExpr(se.ref, span=se.span), self._mu_or_fail(sigma_t, se))
        return self.mapping(ctx, se, self._mu_or_fail(sigma_t, se))

    def _mu_or_fail(self, sigma_t, node):
        if isinstance(sigma_t, (S.ContractType, S.ContractAddr)):
            hint = " (use addr(r as A) to pass a contract address)" if isinstance(sigma_t, S.ContractAddr) else ""
            _err(f"expected {sigma_t}{hint}", node, "T-MapExp")
        return sigma_t

    def new(self, ctx: Ctx, se: S.New, sigma_t):
        rule = "T-CreatePayable" if se.value is not None else "T-Create"
        ctor = ctx.sigma.cnstr.get(se.contract)
        if ctor is None:
            _err(f"{se.contract} has no constructor in scope", se, rule)
        if ctor.payable and se.value is None:
            _err(f"{se.contract} has a payable constructor; pass {{value: ...}}", se, "T-Create")
        if not ctor.payable and se.value is not None:
            _err(f"{se.contract} has a non-payable constructor; remove {{value: ...}}", se, "T-CreatePayable")
        if len(se.args) != len(ctor.iface):
            _err(f"{se.contract} expects {len(ctor.iface)} arguments, got {len(se.args)}", se, rule)
        if sigma_t != S.ContractType(se.contract):
            _err(f"`new {se.contract}` has type {se.contract}, expected {sigma_t}", se, rule)
        args = tuple(self.slot(ctx, a, p.type) for a, p in zip(se.args, ctor.iface))
        value = self.slot(ctx, se.value, S.UINT256) if se.value is not None else None
        out = replace(se, args=args, value=value)
        self.emit(ctx, ctor.iff, rule, se, kind="iffs", args=args, value=value,
                  callee=se.contract, binder=ctor.iface)
        return out

    # -- creates and updates ------------------------------------------------

    def creates(self, ctx: Ctx, creates) -> Tuple[tuple, Tuple[Tuple[str, object], ...]]:
        seen = set()
        out = []
        for c in creates:
            self.wf_slot(ctx.sigma, c.type, c)
            if c.name in seen:
                _err(f"duplicate storage name {c.name}", c, "T-Creates")
            seen.add(c.name)
            out.append(replace(c, rhs=self.slot(ctx.at(contract=None), c.rhs, c.type)))
        layout = tuple((c.name, c.type) for c in creates)
        if ("balance", S.UINT256) not in layout:
            node = creates[0] if creates else None
            _err("created storage must contain `uint256 balance`", node, "T-Creates")
        return tuple(out), layout

    def updates(self, ctx: Ctx, updates):
        out = []
        for i, u in enumerate(updates):
            target, t, tag = self.ref(ctx.at(timed=False), u.target)
            if tag != "S":
                _err(f"{S.pretty_ref(u.target)} is not a storage reference and cannot be updated",
                     u, "T-Update")
            rhs = self.slot(ctx, u.rhs, t)
            for j in range(i):
                if S.at_least_as_specific(updates[j].target, u.target):
                    _err(f"update of {S.pretty_ref(updates[j].target)} conflicts with later update of "
                         f"{S.pretty_ref(u.target)}", u, "T-Updates")
            out.append(replace(u, target=target, rhs=rhs))
        return tuple(out)

    # -- constructors, transitions, contracts ---------------------------------

    @staticmethod
    def _case_obligation(iff, conds):
        n = len(conds)
        parts = [S.disj(conds)]
        for i in range(n):
            for j in range(i + 1, n):
                parts.append(S.Not(S.BinB("and", conds[i], conds[j])))
        return S.BinB("==>", S.conj(iff), S.conj(parts))

    def _names_distinct(self, iface, node, rule):
        names = [p.name for p in iface]
        if len(set(names)) != len(names):
            _err("interface names must be distinct", node, rule)

    def ctor(self, sigma: TypingState, sid: int, name: str, k: S.Constructor):
        self.wf_iface(sigma, k.iface, k)
        self._names_distinct(k.iface, k, "T-Ctor")
        base = Ctx(sigma, sid, k.iface, (), None)
        iff = tuple(self._bool(base, e) for e in k.iff)
        cases, layout = [], None
        for c in k.cases:
            cond = self._bool(base, c.cond)
            phi = (cond,) + iff
            creates, lay = self.creates(base.at(phi=phi), c.creates)
            if layout is not None and lay != layout:
                _err("every case must create the same storage layout", c, "T-Ctor")
            layout = lay
            cases.append(replace(c, cond=cond, creates=creates))
        if layout is None:
            _err("a constructor needs at least one case", k, "T-Ctor")
        clash = {x for x, _ in layout} & {p.name for p in k.iface}
        if clash:
            _err(f"storage and interface share names: {', '.join(sorted(clash))}", k, "T-Ctor")
        sigma2 = sigma.with_storage(name, layout)
        post_ctx = Ctx(sigma2, sid, k.iface, (), name)
        ensures = tuple(self._bool(post_ctx, e) for e in k.ensures)
        self.emit(base, [self._case_obligation(iff, [c.cond for c in cases])], "T-Ctor", k)
        return replace(k, iff=iff, cases=tuple(cases), ensures=ensures), layout

    def trans(self, sigma: TypingState, sid: int, name: str, t: S.Transition):
        self.wf_iface(sigma, t.iface, t)
        self._names_distinct(t.iface, t, "T-Trans")
        base = Ctx(sigma, sid, t.iface, (), name)
        timed = base.at(timed=True)
        iff = tuple(self._bool(base, e) for e in t.iff)
        cases = []
        for c in t.cases:
            cond = self._bool(base, c.cond)
            ups = self.updates(base.at(phi=(cond,) + iff), c.updates)
            if (c.returns is None) != (t.ret_type is None):
                what = "has no `returns`" if c.returns is None else "returns a value but no return type is declared"
                _err(f"case {what}", c, "T-Trans")
            ret = None
            if c.returns is not None:
                if not S.is_base(t.ret_type):
                    _err(f"no expression has type {t.ret_type}; return `address` instead", t, "T-Trans")
                ret, _ = self.expr(timed, c.returns, t.ret_type)
            cases.append(replace(c, cond=cond, updates=ups, returns=ret))
        ensures = tuple(self._bool(timed, e) for e in t.ensures)
        self.emit(base, [self._case_obligation(iff, [c.cond for c in cases])], "T-Trans", t)
        return replace(t, iff=iff, cases=tuple(cases), ensures=ensures)

    def contract(self, sigma: TypingState, sid: int, c: S.Contract):
        if c.name in sigma.storage:
            _err(f"duplicate contract {c.name}", c, "T-Spec")
        ctor, layout = self.ctor(sigma, sid, c.name, c.ctor)
        sigma2 = sigma.with_storage(c.name, layout).with_cnstr(c.name, ctor)
        names = [t.name for t in c.transitions]
        if len(set(names)) != len(names):
            _err("transition names must be distinct", c, "T-Contract")
        trans = tuple(self.trans(sigma2, sid, c.name, t) for t in c.transitions)
        inv_ctx = Ctx(sigma2, sid, (), (), c.name)
        invs = tuple(self._bool(inv_ctx, e) for e in c.invariants)
        sigma3 = sigma2.with_trans(c.name, trans)
        return replace(c, ctor=ctor, transitions=trans, invariants=invs), sigma3


def check_spec(spec: S.Spec, sigma: TypingState = EMPTY_SIGMA) -> CheckResult:
    """Type-check a whole specification.  Raises :class:`TypeCheckError`."""
    checker = Checker()
    out, prefixes = [], [sigma]
    for i, c in enumerate(spec.contracts):
        c2, sigma = checker.contract(sigma, i, c)
        out.append(c2)
        prefixes.append(sigma)
    return CheckResult(sigma, S.Spec(tuple(out)), checker.obligations, prefixes)


def check_ctor(sigma: TypingState, contract: str, ctor: S.Constructor, sigma_id: int = 0):
    checker = Checker()
    k, layout = checker.ctor(sigma, sigma_id, contract, ctor)
    return k, layout, checker.obligations


def check_trans(sigma: TypingState, contract: str, t: S.Transition, sigma_id: int = 0):
    checker = Checker()
    return checker.trans(sigma, sigma_id, contract, t), checker.obligations


def check_expr(sigma: TypingState, iface, phi, e, contract: Optional[str] = None, timed: bool = False,
               expected=None):
    """Check a single expression; returns ``(annotated, type, obligations)``."""
    checker = Checker()
    e2, t = checker.expr(Ctx(sigma, 0, tuple(iface), tuple(phi), contract, timed), e, expected)
    return e2, t, checker.obligations


def check_ref(sigma: TypingState, iface, ref, contract: Optional[str] = None, timed: bool = False):
    checker = Checker()
    return checker.ref(Ctx(sigma, 0, tuple(iface), (), contract, timed), ref)


def check_slot(sigma: TypingState, iface, phi, se, sigma_t, contract: Optional[str] = None):
    checker = Checker()
    out = checker.slot(Ctx(sigma, 0, tuple(iface), tuple(phi), contract), se, sigma_t)
    return out, checker.obligations


def check_updates(sigma: TypingState, iface, phi, contract: str, updates):
    checker = Checker()
    out = checker.updates(Ctx(sigma, 0, tuple(iface), tuple(phi), contract), updates)
    return out, checker.obligations


def recheck_obligation(ob: Obligation) -> bool:
    """Goals of an obligation type-check at bool in its recorded context."""
    checker = Checker()
    ctx = Ctx(ob.sigma, ob.sigma_id, ob.iface, ob.phi, ob.contract, ob.timed)
    try:
        for e in ob.phi:
            checker._bool(ctx.at(timed=False), e)
        if ob.kind == "iffs":
            callee = Ctx(ob.sigma, ob.sigma_id, ob.binder, (), None)
            for e in ob.goals:
                checker._bool(callee, e)
        else:
            for e in ob.goals:
                checker._bool(ctx, e)
    except TypeCheckError:
        return False
    return True


def missing_annotations(node) -> List[object]:
    """References and mapping literals lacking an annotation (empty after a successful check)."""
    missing = []
    for n in walk(node):
        if isinstance(n, S.REF_TYPES + (S.MapLit, S.MapUpd)) and n.annot is None:
            missing.append(n)
    return missing


def sigma_to_json(sigma: TypingState) -> dict:
    return sigma.to_json()
