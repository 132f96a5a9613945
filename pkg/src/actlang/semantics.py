"""Big-step pointer semantics.

Every ``eval_*`` function is a direct transcription of the corresponding
rule family.  Locations are :class:`Addr` values, or ``None`` where the rules
evaluate "at ·" (constructor bodies, which have no ``this`` yet).
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass
from typing import Dict, Iterator, Optional, Tuple

from . import syntax as S
from .bounds import DEFAULT_BOUNDS, BoundsConfig, enumerate_envs
from .sigma import TypingState
from .traverse import env_vars_used, int_literals
from .values import UNIT, Addr, Instance, MapVal, State, Timed, default, key_sort, sort_of, value_eq
from .valuetyping import typed_locations

U, PRE, POST = "U", "pre", "post"

# Results of exp are capped at this many bits; beyond it evaluation gives up
# rather than exhausting memory.
EXP_BIT_LIMIT = 1 << 20


class EvalError(Exception):
    kind = "Stuck"

    def __init__(self, message: str, rule: Optional[str] = None):
        self.message = message
        self.rule = rule
        super().__init__(f"{self.kind}: {message}" + (f" ({rule})" if rule else ""))


class Stuck(EvalError):
    kind = "Stuck"


class Unbound(Stuck):
    kind = "Unbound"


class NotAnAddress(Stuck):
    kind = "NotAnAddress"


class NotAMapping(Stuck):
    kind = "NotAMapping"


class MissingField(Stuck):
    kind = "MissingField"


class PreconditionFailed(EvalError):
    kind = "PreconditionFailed"


class NoCaseMatched(EvalError):
    kind = "NoCaseMatched"


class MultipleCasesMatched(EvalError):
    kind = "MultipleCasesMatched"


class ResourceLimit(EvalError):
    kind = "ResourceLimit"


# ---------------------------------------------------------------------------
# integer operators


def int_div(a: int, b: int) -> int:
    """Division truncating toward zero; division by zero gives 0."""
    if b == 0:
        return 0
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b > 0) else -q


def int_mod(a: int, b: int) -> int:
    """Remainder with the sign of the dividend; modulo zero gives 0."""
    if b == 0:
        return 0
    return a - b * int_div(a, b)


def int_exp(a: int, b: int) -> int:
    if b < 0:
        raise Stuck("negative exponent", "E-BopI")
    if abs(a) > 1 and b * a.bit_length() > EXP_BIT_LIMIT:
        raise ResourceLimit(f"exp result exceeds {EXP_BIT_LIMIT} bits", "E-BopI")
    return a ** b


_INT_OPS = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "div": int_div,
    "mod": int_mod,
    "exp": int_exp,
}

_CMP_OPS = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">=": lambda a, b: a >= b,
    ">": lambda a, b: a > b,
}


def _int(v, rule: str) -> int:
    if type(v) is not int:
        raise Stuck(f"expected an integer, got {v!r}", rule)
    return v


def _bool(v, rule: str) -> bool:
    if type(v) is not bool:
        raise Stuck(f"expected a boolean, got {v!r}", rule)
    return v


# ---------------------------------------------------------------------------
# references


def eval_env(rho, var: str, loc: Optional[Addr]):
    if var == "this":
        if loc is None:
            raise Stuck("`this` evaluated without a location", "E-This")
        return loc
    if var not in rho:
        raise Unbound(f"{var} not in environment", "E-Environment")
    return rho[var]


def _timed(s) -> bool:
    return isinstance(s, Timed)


def _store_at(s: State, loc, name: str, rule: str):
    if loc is None:
        raise Stuck(f"storage variable {name} read without a location", rule)
    inst = s.get(loc)
    if inst is None:
        raise NotAnAddress(f"{loc!r} not in dom(s)", rule)
    if name not in inst.vars:
        raise MissingField(f"{name} not in dom(s({loc!r}))", rule)
    return inst.vars[name]


def eval_ref(s, rho, loc: Optional[Addr], ref) -> Tuple[object, str]:
    """``s; ρ; ref ⇓_ℓ (v, t_p)`` where ``s`` is a :class:`State` or :class:`Timed`."""
    if isinstance(ref, S.Var):
        if ref.name in rho:
            return rho[ref.name], (PRE if _timed(s) else U)
        if _timed(s):
            raise Stuck(f"untimed storage reference {ref.name} in a timed state", "E-Storage")
        return _store_at(s, loc, ref.name, "E-Storage"), U
    if isinstance(ref, (S.Pre, S.Post)):
        rule = "E-StoragePre" if isinstance(ref, S.Pre) else "E-StoragePost"
        if not _timed(s):
            raise Stuck(f"timed reference {ref.name} in an untimed state", rule)
        if ref.name in rho:
            raise Stuck(f"{ref.name} is calldata", rule)
        if isinstance(ref, S.Pre):
            return _store_at(s.pre, loc, ref.name, rule), PRE
        return _store_at(s.post, loc, ref.name, rule), POST
    if isinstance(ref, S.EnvRef):
        return eval_env(rho, ref.var, loc), U
    if isinstance(ref, S.Coerce):
        return eval_ref(s, rho, loc, ref.inner)
    if isinstance(ref, S.Field):
        v, t = eval_ref(s, rho, loc, ref.inner)
        if type(v) is not Addr:
            raise NotAnAddress(f"field {ref.name} of non-address {v!r}", "E-Field")
        if _timed(s):
            if t == PRE:
                return _store_at(s.pre, v, ref.name, "E-FieldPre"), PRE
            if t == POST:
                return _store_at(s.post, v, ref.name, "E-FieldPost"), POST
            raise Stuck(f"field {ref.name} of an untimed reference in a timed state", "E-Field")
        if t != U:
            raise Stuck("timed reference in an untimed state", "E-Field")
        return _store_at(s, v, ref.name, "E-Field"), U
    if isinstance(ref, S.Index):
        key = eval_expr(s, rho, loc, ref.key)
        m, t = eval_ref(s, rho, loc, ref.inner)
        if type(m) is not MapVal:
            raise NotAMapping(f"indexing non-mapping {m!r}", "E-RefMapping")
        if sort_of(key) != m.key_sort:
            raise Stuck(f"key {key!r} outside the key domain", "E-RefMapping")
        return m.lookup(key), t
    raise Stuck(f"unknown reference {ref!r}")


# ---------------------------------------------------------------------------
# expressions


def eval_expr(s, rho, loc: Optional[Addr], e):
    fn = _EXPR_RULES.get(type(e))
    if fn is None:
        raise Stuck(f"unknown expression {e!r}")
    return fn(s, rho, loc, e)


def _e_lit(s, rho, loc, e):
    return e.value


def _e_ref(s, rho, loc, e):
    return eval_ref(s, rho, loc, e.ref)[0]


def _e_range(s, rho, loc, e):
    return e.type.contains(_int(eval_expr(s, rho, loc, e.operand), "E-RangeTrue"))


def _e_bini(s, rho, loc, e):
    a = _int(eval_expr(s, rho, loc, e.left), "E-BopI")
    b = _int(eval_expr(s, rho, loc, e.right), "E-BopI")
    return _INT_OPS[e.op](a, b)


def _e_binb(s, rho, loc, e):
    a = _bool(eval_expr(s, rho, loc, e.left), "E-BopB")
    b = _bool(eval_expr(s, rho, loc, e.right), "E-BopB")
    if e.op == "and":
        return a and b
    if e.op == "or":
        return a or b
    return (not a) or b


def _e_not(s, rho, loc, e):
    return not _bool(eval_expr(s, rho, loc, e.operand), "E-Neg")


def _e_cmp(s, rho, loc, e):
    a = _int(eval_expr(s, rho, loc, e.left), "E-Cmp")
    b = _int(eval_expr(s, rho, loc, e.right), "E-Cmp")
    return _CMP_OPS[e.op](a, b)


def _e_ite(s, rho, loc, e):
    c = _bool(eval_expr(s, rho, loc, e.cond), "E-ITETrue")
    return eval_expr(s, rho, loc, e.then if c else e.orelse)


def _e_eq(s, rho, loc, e):
    return value_eq(eval_expr(s, rho, loc, e.left), eval_expr(s, rho, loc, e.right))


_EXPR_RULES = {
    S.IntLit: _e_lit, S.BoolLit: _e_lit, S.RefExpr: _e_ref, S.AddrOf: _e_ref, S.InRange: _e_range,
    S.BinI: _e_bini, S.BinB: _e_binb, S.Not: _e_not, S.Cmp: _e_cmp, S.Ite: _e_ite, S.Eq: _e_eq,
}


# ---------------------------------------------------------------------------
# mapping expressions


def _pairs(s, rho, loc, pairs, ksort: str, rule: str):
    out = []
    for k, m in pairs:
        kv = eval_expr(s, rho, loc, k)
        if sort_of(kv) != ksort:
            raise Stuck(f"key {kv!r} outside the key domain", rule)
        out.append((kv, eval_mapping(s, rho, loc, m)))
    return out


def eval_mapping(s, rho, loc: Optional[Addr], m):
    if isinstance(m, S.MapLit):
        if m.annot is None:
            raise Stuck("mapping literal without a type annotation", "E-Mapping")
        base = default(m.annot)
        # later pairs override earlier ones for duplicate keys
        return base.set_many(_pairs(s, rho, loc, m.pairs, base.key_sort, "E-Mapping"))
    if isinstance(m, S.MapUpd):
        f, _ = eval_ref(s, rho, loc, m.base)
        if type(f) is not MapVal:
            raise NotAMapping(f"updating non-mapping {f!r}", "E-MappingUpd")
        return f.set_many(_pairs(s, rho, loc, m.pairs, f.key_sort, "E-MappingUpd"))
    return eval_expr(s, rho, loc, m)


# ---------------------------------------------------------------------------
# slot expressions, creates, updates


def eval_slot(sigma: TypingState, s: State, rho, loc: Optional[Addr], se) -> Tuple[object, State]:
    if isinstance(se, S.SlotRef):
        return eval_ref(s, rho, loc, se.ref)[0], s
    if isinstance(se, S.SlotAddr):
        return eval_slot(sigma, s, rho, loc, se.inner)
    if isinstance(se, S.New):
        return eval_new(sigma, s, rho, loc, se)
    return eval_mapping(s, rho, loc, se), s


def eval_new(sigma: TypingState, s: State, rho, loc: Optional[Addr], se: S.New) -> Tuple[Addr, State]:
    rule = "E-CreatePayable" if se.value is not None else "E-Create"
    ctor = sigma.cnstr.get(se.contract)
    if ctor is None:
        raise Stuck(f"unknown contract {se.contract}", rule)
    if ctor.payable != (se.value is not None):
        raise Stuck(f"payability of {se.contract} does not match", rule)
    if len(ctor.iface) != len(se.args):
        raise Stuck(f"{se.contract} expects {len(ctor.iface)} arguments", rule)
    vals = []
    for arg in se.args:
        v, s = eval_slot(sigma, s, rho, loc, arg)
        vals.append(v)
    callvalue = 0
    if se.value is not None:
        callvalue, s = eval_slot(sigma, s, rho, loc, se.value)
    if "origin" not in rho:
        raise Unbound("origin not in environment", rule)
    rho2 = {p.name: v for p, v in zip(ctor.iface, vals)}
    # at "·" there is no current location; the zero address stands in
    rho2.update(caller=loc if loc is not None else Addr(0), origin=rho["origin"], callvalue=callvalue)
    return eval_ctor_cases(sigma, s, rho2, se.contract, ctor.cases)


def eval_creates(sigma: TypingState, s: State, rho, contract: str, creates) -> Tuple[Addr, State]:
    vals = {}
    for c in creates:
        v, s = eval_slot(sigma, s, rho, None, c.rhs)
        vals[c.name] = v
    loc = s.fresh()
    return Addr(loc), s.with_instance(loc, Instance(contract, vals))


def insert_value(sigma: TypingState, s: State, rho, loc: Optional[Addr], target, v) -> State:
    if isinstance(target, S.Var):
        _store_at(s, loc, target.name, "E-InsStorage")
        return s.with_var(loc, target.name, v)
    if isinstance(target, S.Field):
        l2, t = eval_ref(s, rho, loc, target.inner)
        if type(l2) is not Addr or t != U:
            raise NotAnAddress(f"field target base {l2!r} is not an address", "E-InsField")
        _store_at(s, l2, target.name, "E-InsField")
        return s.with_var(l2, target.name, v)
    raise Stuck(f"no insertion rule for {S.pretty_ref(target)}", "E-Ins")


# Mutation hook: when set, updates are applied one at a time, each right-hand
# side seeing the previous assignments.  This is a deliberately wrong build
# used to show that the test-suite tells the two apart.
_MUTANTS: set = set()


@contextmanager
def mutant(name: str):
    """Temporarily enable a known-wrong evaluation variant (``"sequential-updates"``)."""
    if name not in ("sequential-updates",):
        raise ValueError(f"unknown mutant {name!r}")
    _MUTANTS.add(name)
    try:
        yield
    finally:
        _MUTANTS.discard(name)


def eval_updates(sigma: TypingState, s: State, rho, loc: Optional[Addr], updates) -> State:
    if "sequential-updates" in _MUTANTS:
        for u in updates:
            v, s = eval_slot(sigma, s, rho, loc, u.rhs)
            s = insert_value(sigma, s, rho, loc, u.target, v)
        return s
    vals = []
    for u in updates:
        v, s = eval_slot(sigma, s, rho, loc, u.rhs)
        vals.append(v)
    for u, v in zip(updates, vals):
        s = insert_value(sigma, s, rho, loc, u.target, v)
    return s


# ---------------------------------------------------------------------------
# cases, constructors, transitions


def _select_case(s, rho, loc, cases, rule: str) -> int:
    chosen = None
    for i, c in enumerate(cases):
        if _bool(eval_expr(s, rho, loc, c.cond), rule):
            if chosen is not None:
                raise MultipleCasesMatched(f"cases {chosen} and {i} both hold", rule)
            chosen = i
    if chosen is None:
        raise NoCaseMatched("no case condition holds", rule)
    return chosen


def eval_ctor_cases(sigma: TypingState, s: State, rho, contract: str, cases) -> Tuple[Addr, State]:
    j = _select_case(s, rho, None, cases, "E-CtorCases")
    return eval_creates(sigma, s, rho, contract, cases[j].creates)


def eval_trans_cases(sigma: TypingState, s: State, rho, loc: Addr, cases) -> Tuple[object, State]:
    j = _select_case(s, rho, loc, cases, "E-TransCases")
    s2 = eval_updates(sigma, s, rho, loc, cases[j].updates)
    ret = cases[j].returns
    v = UNIT if ret is None else eval_expr(Timed(s, s2), rho, loc, ret)
    return v, s2


def _check_iff(s, rho, loc, iff, rule):
    for i, e in enumerate(iff):
        if not _bool(eval_expr(s, rho, loc, e), rule):
            raise PreconditionFailed(f"iff condition {i} is false", rule)


def eval_ctor(sigma: TypingState, s: State, rho, contract: str, ctor: S.Constructor) -> Tuple[Addr, State]:
    _check_iff(s, rho, None, ctor.iff, "E-Ctor")
    return eval_ctor_cases(sigma, s, rho, contract, ctor.cases)


def eval_trans(sigma: TypingState, s: State, rho, loc: Addr, t: S.Transition) -> Tuple[object, State]:
    _check_iff(s, rho, loc, t.iff, "E-Trans")
    return eval_trans_cases(sigma, s, rho, loc, t.cases)


# ---------------------------------------------------------------------------
# small-step transition relation over whole states


@dataclass(frozen=True)
class Label:
    kind: str  # "ctor" or "trans"
    contract: str
    name: str
    loc: int
    env: Tuple[Tuple[str, object], ...]

    @property
    def rho(self) -> Dict[str, object]:
        return dict(self.env)

    def describe(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in self.env)
        if self.kind == "ctor":
            return f"{self.contract}.constructor({args}) -> @{self.loc}"
        return f"@{self.loc}.{self.name}({args}) [{self.contract}]"

    def to_json(self) -> dict:
        from .values import value_to_json

        return {"kind": self.kind, "contract": self.contract, "name": self.name, "loc": self.loc,
                "env": {k: value_to_json(v) for k, v in self.env}}


@dataclass(frozen=True)
class Edge:
    label: Label
    pre: State
    post: State
    result: object = None


def _env_key(rho) -> Tuple[Tuple[str, object], ...]:
    return tuple(sorted(rho.items()))


# id(node) -> (node, literals, env vars); the node is kept to pin its id
_SCAN: Dict[int, tuple] = {}


def _scan(node):
    hit = _SCAN.get(id(node))
    if hit is None or hit[0] is not node:
        hit = (node, tuple(sorted(int_literals(node))), frozenset(env_vars_used(node)))
        _SCAN[id(node)] = hit
    return hit[1], hit[2]


def ctor_envs(sigma: TypingState, s: State, contract: str, cfg: BoundsConfig = DEFAULT_BOUNDS):
    ctor = sigma.cnstr[contract]
    lits, env = _scan(ctor)
    return enumerate_envs(sigma, s, ctor.iface, cfg, lits, env)


def trans_envs(sigma: TypingState, s: State, contract: str, t: S.Transition, cfg: BoundsConfig = DEFAULT_BOUNDS):
    lits, env = _scan(t)
    return enumerate_envs(sigma, s, t.iface, cfg, lits, env)


def step(sigma: TypingState, s: State, cfg: BoundsConfig = DEFAULT_BOUNDS) -> Iterator[Edge]:
    """All successors of ``s``: every constructor, and every transition at every typed location.

    Candidates whose evaluation fails (precondition, case dispatch, stuck)
    are not successors and are skipped.
    """
    for contract in sigma.contracts():
        ctor = sigma.cnstr[contract]
        for rho in ctor_envs(sigma, s, contract, cfg):
            try:
                loc, s2 = eval_ctor(sigma, s, rho, contract, ctor)
            except EvalError:
                continue
            yield Edge(Label("ctor", contract, "constructor", loc.n, _env_key(rho)), s, s2, loc)
        trans = sigma.trans.get(contract, ())
        if not trans:
            continue
        for loc in typed_locations(sigma, s, contract):
            for t in trans:
                for rho in trans_envs(sigma, s, contract, t, cfg):
                    try:
                        v, s2 = eval_trans(sigma, s, rho, loc, t)
                    except EvalError:
                        continue
                    yield Edge(Label("trans", contract, t.name, loc.n, _env_key(rho)), s, s2, v)


def replay(sigma: TypingState, labels, s: Optional[State] = None) -> State:
    """Re-run a list of labels from ``s`` (default: the empty state)."""
    s = s if s is not None else State()
    for lab in labels:
        rho = lab.rho
        if lab.kind == "ctor":
            loc, s = eval_ctor(sigma, s, rho, lab.contract, sigma.cnstr[lab.contract])
            if loc.n != lab.loc:
                raise Stuck(f"replay allocated @{loc.n}, expected @{lab.loc}")
        else:
            _, s = eval_trans(sigma, s, rho, Addr(lab.loc), sigma.transition(lab.contract, lab.name))
    return s
