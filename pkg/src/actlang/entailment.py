"""Bounded discharge and export of entailment obligations.

``Σ; I; Φ ⊨_{A?} ē`` quantifies over every well-typed store, environment and
location.  Here the quantifier ranges over finite sample sets instead
(:class:`~actlang.bounds.BoundsConfig`), so a "valid" verdict always means
valid within those bounds.  Counterexamples are real: they replay.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from . import syntax as S
from .bounds import DEFAULT_BOUNDS, BoundsConfig, base_samples, enumerate_envs, int_samples
from .semantics import EvalError, eval_expr, eval_slot
from .sigma import TypingState
from .traverse import env_vars_used, int_literals, names_used
from .typecheck import Obligation
from .values import Addr, Instance, MapVal, State, Timed, default, key_sort, state_to_json, value_to_json
from .valuetyping import env_has_iface, loc_has_contract, typed_locations


# ---------------------------------------------------------------------------
# verdicts


@dataclass(frozen=True)
class ValidWithinBounds:
    contexts: int

    ok = True
    name = "ValidWithinBounds"

    def to_json(self) -> dict:
        return {"verdict": self.name, "contexts": self.contexts}


@dataclass(frozen=True)
class Counterexample:
    state: State
    rho: Dict[str, object]
    loc: Optional[Addr]
    goal_index: int
    post_state: Optional[State] = None

    ok = False
    name = "Counterexample"

    def to_json(self) -> dict:
        d = {
            "verdict": self.name,
            "goal": self.goal_index,
            "state": state_to_json(self.state),
            "env": {k: value_to_json(v) for k, v in sorted(self.rho.items())},
            "loc": self.loc.n if self.loc is not None else None,
        }
        if self.post_state is not None:
            d["postState"] = state_to_json(self.post_state)
        return d


@dataclass(frozen=True)
class Unknown:
    reason: str

    ok = False
    name = "Unknown"

    def to_json(self) -> dict:
        return {"verdict": self.name, "reason": self.reason}


# ---------------------------------------------------------------------------
# context enumeration


@dataclass
class _Relevance:
    names: set
    env: set
    literals: set


def _relevance(nodes) -> _Relevance:
    names, env, lits = set(), set(), set()
    for n in nodes:
        names |= names_used(n)
        env |= env_vars_used(n)
        lits |= int_literals(n)
    return _Relevance(names, env, lits)


class _StoreBuilder:
    """Enumerates stores holding one instance per requested root contract.

    Contract-typed fields either point at a freshly built instance or alias
    an already allocated one of the same contract.  Fields whose name never
    occurs in the obligation get a single representative value.
    """

    def __init__(self, sigma: TypingState, cfg: BoundsConfig, rel: _Relevance):
        self.sigma = sigma
        self.cfg = cfg
        self.rel = rel

    def field_values(self, t, depth: int) -> list:
        if isinstance(t, S.MappingType):
            return self.map_values(t, depth)
        if isinstance(t, S.AddressType):
            return [Addr(n) for n in range(self.cfg.addr_domain)]
        return base_samples(t, State(), self.cfg, self.rel.literals)

    def map_values(self, t: S.MappingType, depth: int) -> list:
        base = default(t)
        if depth > 0 or self.cfg.map_footprint == 0:
            return [base]
        keys = base_samples(t.key, State(), self.cfg, self.rel.literals)
        # prefer small keys and literals from the obligation
        pref = sorted(keys, key=lambda k: (0 if k in self.rel.literals else 1, abs(k.n) if isinstance(k, Addr) else abs(int(k))))
        keys = pref[: self.cfg.map_footprint]
        vals = self.field_values(t.value, depth + 1)
        out = []
        for combo in itertools.product(vals, repeat=len(keys)):
            out.append(base.set_many(zip(keys, combo)))
        return out

    def build(self, roots: Sequence[str]) -> Iterator[Tuple[State, List[Addr]]]:
        """Yield ``(store, root locations)``."""
        def go(pending, store, root_locs):
            if not pending:
                yield store, root_locs
                return
            contract, slot = pending[0]
            rest = pending[1:]
            options = []
            if slot is not None:
                # alias an existing instance of the same contract
                for n in sorted(store.slots):
                    if store.slots[n].contract == contract:
                        options.append(("alias", n))
            roomy = self.cfg.store_depth is None or len(store.slots) < self.cfg.store_depth
            if roomy or not options:
                options.append(("fresh", None))
            for kind, n in options:
                if kind == "alias":
                    yield from go(rest, self._point(store, slot, Addr(n)), root_locs)
                    continue
                loc = store.fresh()
                for inst_store, subs in self._instances(contract, store, loc):
                    s2 = inst_store
                    if slot is not None:
                        s2 = self._point(s2, slot, Addr(loc))
                    rl = root_locs + [Addr(loc)] if slot is None else root_locs
                    yield from go(subs + rest, s2, rl)

        yield from go([(r, None) for r in roots], State(), [])

    @staticmethod
    def _point(store: State, slot, target: Addr) -> State:
        loc, name = slot
        return store.with_var(loc, name, target)

    def _instances(self, contract: str, store: State, loc: int):
        layout = self.sigma.storage[contract]
        columns, subs = [], []
        for x, t in layout:
            if isinstance(t, (S.ContractType, S.ContractAddr)):
                columns.append([Addr(-1)])  # placeholder, filled by the pending sub-build
                subs.append((t.contract, (loc, x)))
            elif x in self.rel.names:
                columns.append(self.field_values(t, 0))
            else:
                columns.append([default(t)])
        names = [x for x, _ in layout]
        for combo in itertools.product(*columns):
            yield store.with_instance(loc, Instance(contract, dict(zip(names, combo)))), subs


class BudgetExceeded(Exception):
    """Raised when enumeration visits more than ``max_contexts`` candidates."""


def enumerate_contexts(sigma: TypingState, iface: Sequence[S.Param], contract: Optional[str],
                       cfg: BoundsConfig = DEFAULT_BOUNDS, relevant_nodes: Sequence = ()
                       ) -> Iterator[Tuple[State, Dict[str, object], Optional[Addr]]]:
    """Well-typed ``(s, ρ, ℓ)`` triples drawn from the bounds.

    ``relevant_nodes`` are the AST fragments that will be evaluated; fields,
    parameters and environment entries they never mention are held at one
    representative value.  Without them everything is enumerated.
    Raises :class:`BudgetExceeded` after ``cfg.max_contexts`` candidate stores,
    counting those rejected by the typing filter.
    """
    if relevant_nodes:
        rel = _relevance(relevant_nodes)
    else:
        everything = {p.name for p in iface}
        for lay in sigma.storage.values():
            everything |= {x for x, _ in lay}
        rel = _Relevance(everything, {"caller", "origin", "callvalue"}, set())
    roots = []
    if contract is not None:
        roots.append(contract)
    for p in iface:
        if isinstance(p.type, S.ContractAddr):
            roots.append(p.type.contract)
    builder = _StoreBuilder(sigma, cfg, rel)
    for seen, (s, root_locs) in enumerate(builder.build(roots), 1):
        if seen > cfg.max_contexts:
            raise BudgetExceeded(f"context budget of {cfg.max_contexts} exhausted")
        if contract is not None:
            loc = root_locs[0]
            if not loc_has_contract(sigma, s, loc, contract):
                continue
        else:
            loc = None
        for rho in _envs(sigma, s, iface, cfg, rel):
            yield s, rho, loc


def _envs(sigma, s, iface, cfg, rel):
    columns = []
    for p in iface:
        if isinstance(p.type, S.ContractAddr):
            vals = typed_locations(sigma, s, p.type.contract)
            if p.name not in rel.names:
                vals = vals[:1]
        elif p.name in rel.names:
            vals = base_samples(p.type, s, cfg, rel.literals)
        else:
            vals = [default(p.type)]
        columns.append(vals)
    names = [p.name for p in iface]
    for env in enumerate_envs(sigma, s, (), cfg, rel.literals, rel.env):
        for combo in itertools.product(*columns):
            rho = dict(env)
            rho.update(zip(names, combo))
            yield rho


# ---------------------------------------------------------------------------
# deciding obligations


def _holds(s, rho, loc, exprs) -> bool:
    return all(eval_expr(s, rho, loc, e) is True for e in exprs)


def entails_exprs(ob: Obligation, cfg: BoundsConfig = DEFAULT_BOUNDS):
    nodes = list(ob.phi) + list(ob.goals)
    contexts = enumerate_contexts(ob.sigma, ob.iface, ob.contract, cfg, nodes)
    try:
        if ob.timed:
            first = list(itertools.islice(contexts, cfg.max_contexts + 1))
            if len(first) > cfg.max_contexts:
                return Unknown(f"context budget of {cfg.max_contexts} exhausted")
            return _entails_timed(ob, cfg, first)
        return _entails_untimed(ob, cfg, contexts)
    except BudgetExceeded as exc:
        return Unknown(str(exc))


def _entails_untimed(ob: Obligation, cfg: BoundsConfig, contexts):
    count = 0
    for s, rho, loc in contexts:
        count += 1
        if count > cfg.max_contexts:
            return Unknown(f"context budget of {cfg.max_contexts} exhausted")
        try:
            if not _holds(s, rho, loc, ob.phi):
                continue
            for i, g in enumerate(ob.goals):
                if eval_expr(s, rho, loc, g) is not True:
                    return Counterexample(s, rho, loc, i)
        except EvalError as exc:
            return Unknown(f"evaluation stuck: {exc}")
    return ValidWithinBounds(count)


def _entails_timed(ob: Obligation, cfg: BoundsConfig, contexts):
    stores = []
    seen = set()
    for s, _, loc in contexts:
        key = (s.fingerprint(), loc)
        if key not in seen:
            seen.add(key)
            stores.append((s, loc))
    count = 0
    for (pre, rho, loc) in contexts:
        for post, loc2 in stores:
            if loc2 != loc:
                continue
            count += 1
            if count > cfg.max_contexts:
                return Unknown(f"context budget of {cfg.max_contexts} exhausted")
            try:
                if not _holds(pre, rho, loc, ob.phi):
                    continue
                ts = Timed(pre, post)
                for i, g in enumerate(ob.goals):
                    if eval_expr(ts, rho, loc, g) is not True:
                        return Counterexample(pre, rho, loc, i, post)
            except EvalError as exc:
                return Unknown(f"evaluation stuck: {exc}")
    return ValidWithinBounds(count)


def entails_iffs(ob: Obligation, cfg: BoundsConfig = DEFAULT_BOUNDS):
    try:
        return _entails_iffs(ob, cfg)
    except BudgetExceeded as exc:
        return Unknown(str(exc))


def _entails_iffs(ob: Obligation, cfg: BoundsConfig):
    nodes = list(ob.phi) + list(ob.args) + ([ob.value] if ob.value is not None else []) + list(ob.goals)
    count = 0
    for s0, rho, loc in enumerate_contexts(ob.sigma, ob.iface, ob.contract, cfg, nodes):
        count += 1
        if count > cfg.max_contexts:
            return Unknown(f"context budget of {cfg.max_contexts} exhausted")
        try:
            if not _holds(s0, rho, loc, ob.phi):
                continue
        except EvalError as exc:
            return Unknown(f"evaluation stuck: {exc}")
        s = s0
        vals = []
        try:
            for a in ob.args:
                v, s = eval_slot(ob.sigma, s, rho, loc, a)
                vals.append(v)
            callvalue = 0
            if ob.value is not None:
                callvalue, s = eval_slot(ob.sigma, s, rho, loc, ob.value)
        except EvalError:
            # the arguments do not evaluate, so the implication holds vacuously
            continue
        rho2 = {p.name: v for p, v in zip(ob.binder, vals)}
        rho2.update(caller=loc if loc is not None else Addr(0), origin=rho["origin"], callvalue=callvalue)
        try:
            for i, g in enumerate(ob.goals):
                if eval_expr(s, rho2, None, g) is not True:
                    return Counterexample(s0, rho, loc, i)
        except EvalError as exc:
            return Unknown(f"evaluation stuck: {exc}")
    return ValidWithinBounds(count)


def discharge(ob: Obligation, cfg: BoundsConfig = DEFAULT_BOUNDS):
    if ob.kind == "iffs":
        return entails_iffs(ob, cfg)
    return entails_exprs(ob, cfg)


def replay_counterexample(ob: Obligation, cex: Counterexample) -> bool:
    """True when the counterexample really falsifies the obligation."""
    try:
        if not _holds(cex.state, cex.rho, cex.loc, ob.phi):
            return False
        if ob.kind == "iffs":
            s, vals = cex.state, []
            for a in ob.args:
                v, s = eval_slot(ob.sigma, s, cex.rho, cex.loc, a)
                vals.append(v)
            callvalue = 0
            if ob.value is not None:
                callvalue, s = eval_slot(ob.sigma, s, cex.rho, cex.loc, ob.value)
            rho2 = {p.name: v for p, v in zip(ob.binder, vals)}
            rho2.update(caller=cex.loc if cex.loc is not None else Addr(0), origin=cex.rho["origin"],
                        callvalue=callvalue)
            return eval_expr(s, rho2, None, ob.goals[cex.goal_index]) is False
        st = Timed(cex.state, cex.post_state) if ob.timed else cex.state
        return eval_expr(st, cex.rho, cex.loc, ob.goals[cex.goal_index]) is False
    except EvalError:
        return False


# ---------------------------------------------------------------------------
# SMT-LIB export


class NotExportable(Exception):
    pass


def _sort(t) -> str:
    if isinstance(t, S.BoolType):
        return "Bool"
    if isinstance(t, S.MappingType):
        return f"(Array {_sort(t.key)} {_sort(t.value)})"
    return "Int"


def _range(name: str, t) -> List[str]:
    if isinstance(t, S.IntType) and not t.is_math:
        return [f"(assert (<= {t.min} {name} {t.max})) ; {t}"]
    if isinstance(t, (S.AddressType, S.ContractAddr, S.ContractType)):
        return [f"(assert (<= 0 {name})) ; {t}"]
    return []


def _lit(n: int) -> str:
    return str(n) if n >= 0 else f"(- {-n})"


class _Smt:
    def __init__(self, ob: Obligation):
        self.ob = ob
        self.decls: Dict[str, str] = {}
        self.asserts: List[str] = []
        self.rename: Dict[str, str] = {}

    def const(self, name: str, t) -> str:
        if name not in self.decls:
            self.decls[name] = f"(declare-const {name} {_sort(t)})"
            self.asserts.extend(_range(name, t))
        return name

    def fun(self, name: str, t) -> str:
        if name not in self.decls:
            self.decls[name] = f"(declare-fun {name} (Int) {_sort(t)})"
        return name

    def term(self, text: str, t) -> str:
        for a in _range(text, t):
            if a not in self.asserts:
                self.asserts.append(a)
        return text

    def ref(self, r, timing: str) -> Tuple[str, str]:
        if isinstance(r, S.Var):
            if r.name in self.rename:
                return self.rename[r.name], timing
            if any(p.name == r.name for p in self.ob.iface):
                return self.const(f"cd_{r.name}", r.annot), "pre" if self.ob.timed else "U"
            return self.term(f"({self.fun(f'{self.ob.contract}_{r.name}', r.annot)} this)", r.annot), "U"
        if isinstance(r, (S.Pre, S.Post)):
            tag = "pre" if isinstance(r, S.Pre) else "post"
            return self.term(f"({self.fun(f'{tag}_{self.ob.contract}_{r.name}', r.annot)} this)", r.annot), tag
        if isinstance(r, S.EnvRef):
            if r.var == "this":
                return self.const("this", S.ADDRESS), "U"
            if r.var in self.rename:
                return self.rename[r.var], "U"
            return self.const(f"env_{r.var}", S.UINT256 if r.var == "callvalue" else S.ADDRESS), "U"
        if isinstance(r, S.Coerce):
            return self.ref(r.inner, timing)
        if isinstance(r, S.Field):
            inner, t = self.ref(r.inner, timing)
            contract = r.inner.annot.contract
            prefix = "" if t == "U" else f"{t}_"
            return self.term(f"({self.fun(f'{prefix}{contract}_{r.name}', r.annot)} {inner})", r.annot), t
        if isinstance(r, S.Index):
            inner, t = self.ref(r.inner, timing)
            return self.term(f"(select {inner} {self.expr(r.key)})", r.annot), t
        raise NotExportable(f"reference {r!r}")

    def expr(self, e) -> str:
        if isinstance(e, S.IntLit):
            return _lit(e.value)
        if isinstance(e, S.BoolLit):
            return "true" if e.value else "false"
        if isinstance(e, (S.RefExpr, S.AddrOf)):
            return self.ref(e.ref, "U")[0]
        if isinstance(e, S.InRange):
            if e.type.is_math:
                return "true"
            x = self.expr(e.operand)
            return f"(<= {_lit(e.type.min)} {x} {_lit(e.type.max)})"
        if isinstance(e, S.BinI):
            a, b = self.expr(e.left), self.expr(e.right)
            if e.op in ("+", "-", "*"):
                return f"({e.op} {a} {b})"
            if e.op == "div":
                return f"(tdiv {a} {b})"
            if e.op == "mod":
                return f"(tmod {a} {b})"
            if isinstance(e.right, S.IntLit) and 0 <= e.right.value <= 64:
                if e.right.value == 0:
                    return "1"
                return "(* " + " ".join([a] * e.right.value) + ")" if e.right.value > 1 else a
            raise NotExportable("exp with a non-literal exponent")
        if isinstance(e, S.BinB):
            op = {"and": "and", "or": "or", "==>": "=>"}[e.op]
            return f"({op} {self.expr(e.left)} {self.expr(e.right)})"
        if isinstance(e, S.Not):
            return f"(not {self.expr(e.operand)})"
        if isinstance(e, S.Cmp):
            return f"({e.op} {self.expr(e.left)} {self.expr(e.right)})"
        if isinstance(e, S.Ite):
            return f"(ite {self.expr(e.cond)} {self.expr(e.then)} {self.expr(e.orelse)})"
        if isinstance(e, S.Eq):
            return f"(= {self.expr(e.left)} {self.expr(e.right)})"
        raise NotExportable(f"expression {e!r}")

    def slot(self, se) -> str:
        if isinstance(se, S.New):
            raise NotExportable("`new` in constructor arguments")
        if isinstance(se, S.SlotAddr):
            return self.slot(se.inner)
        if isinstance(se, S.SlotRef):
            return self.ref(se.ref, "U")[0]
        if isinstance(se, (S.MapLit, S.MapUpd)):
            raise NotExportable("mapping-valued constructor argument")
        return self.expr(se)


_PRELUDE = """(set-logic ALL)
(define-fun tdiv ((a Int) (b Int)) Int
  (ite (= b 0) 0 (ite (= (>= a 0) (> b 0)) (div (abs a) (abs b)) (- (div (abs a) (abs b))))))
(define-fun tmod ((a Int) (b Int)) Int
  (ite (= b 0) 0 (- a (* b (tdiv a b)))))"""


def export_obligation(ob: Obligation, fmt: str = "smt2") -> str:
    """Render an obligation as an SMT-LIB query whose satisfiability refutes it.

    Returns a comment-only document marked ``not exportable`` when the
    obligation uses constructs outside the encoding.
    """
    if fmt != "smt2":
        raise ValueError(f"unknown export format {fmt!r}")
    smt = _Smt(ob)
    header = [f"; obligation {ob.hash} ({ob.rule}) at {ob.location()}"]
    try:
        if ob.contract is not None:
            smt.const("this", S.ADDRESS)
        for p in ob.iface:
            smt.const(f"cd_{p.name}", p.type)
        phi = [smt.expr(e) for e in ob.phi]
        if ob.kind == "iffs":
            for p, a in zip(ob.binder, ob.args):
                smt.rename[p.name] = smt.slot(a)
            smt.rename["caller"] = "this" if ob.contract is not None else "0"
            smt.rename["callvalue"] = smt.slot(ob.value) if ob.value is not None else "0"
        goals = [smt.expr(g) for g in ob.goals]
    except NotExportable as exc:
        return "\n".join(header + [f"; not exportable: {exc}"]) + "\n"
    lines = header + [_PRELUDE]
    lines += [smt.decls[k] for k in sorted(smt.decls)]
    lines += smt.asserts
    lines += [f"(assert {p})" for p in phi]
    goal = goals[0] if len(goals) == 1 else "(and " + " ".join(goals) + ")" if goals else "true"
    lines.append(f"(assert (not {goal}))")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


def is_exportable(text: str) -> bool:
    return "; not exportable" not in text


def solve_smt(text: str) -> Optional[str]:
    """Run an exported query through z3 when it is installed; ``None`` otherwise."""
    try:
        import z3
    except ImportError:
        return None
    solver = z3.Solver()
    solver.from_string(text)
    return str(solver.check())
