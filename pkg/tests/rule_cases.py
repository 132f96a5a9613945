"""Single-rule micro cases, each anchored to the rule it exercises.

Every entry is a tiny, self-contained check whose expected value follows
directly from one rule.  The table is shared by the per-module tests and
the acceptance suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List

from actlang import (ActError, Addr, MultipleCasesMatched, NoCaseMatched, PreconditionFailed, State,
                     Stuck, TypeCheckError, check_spec, eval_ctor, eval_expr, eval_trans, parse_expr, parse_slot_expr,
                     parse_spec, parse_type)
from actlang import syntax as S
from actlang.semantics import eval_mapping
from actlang.sigma import EMPTY_SIGMA
from actlang.typecheck import check_expr, check_slot
from actlang.values import Instance, MapVal, Timed, default, value_eq
from actlang.valuetyping import loc_has_contract, value_has_base, value_has_mu
from actlang.wellfounded import build_prec, check_wf, length


@dataclass(frozen=True)
class RuleCase:
    rule: str
    what: str
    check: Callable[[], bool]


def ev(src, rho=None, loc=None, s=None):
    return eval_expr(s if s is not None else State(), rho or {}, loc, parse_expr(src))


def raises(exc, fn, rule=None) -> bool:
    try:
        fn()
    except exc as e:
        return rule is None or getattr(e, "rule", None) == rule
    return False


def rejects(src: str, rule: str) -> bool:
    try:
        check_spec(parse_spec(src))
    except TypeCheckError as e:
        return e.rule == rule
    return False


def accepts(src: str) -> bool:
    try:
        check_spec(parse_spec(src))
    except ActError:
        return False
    return True


def obligation_rules(src: str) -> List[str]:
    return [o.rule for o in check_spec(parse_spec(src)).obligations]


BAL = "uint256 balance := 0"
A = f"contract A {{ constructor(y: uint256) creates {BAL}, uint256 z := y }}\n"
ENV = {"caller": Addr(1), "origin": Addr(2), "callvalue": 0}


def _field_state():
    # @0 is an A with z = 7; @1 is a B whose slot a points at @0
    return (State().with_instance(0, Instance("A", {"z": 7, "balance": 0}))
            .with_instance(1, Instance("B", {"a": Addr(0), "balance": 0})))


def _run(src, contract, trans=None, rho=None, args=None):
    """Construct ``contract`` on the empty store, then optionally run ``trans``."""
    r = check_spec(parse_spec(src))
    sigma = r.sigma
    loc, s = eval_ctor(sigma, State(), dict(ENV, **(args or {})), contract, sigma.cnstr[contract])
    if trans is None:
        return loc, s
    return eval_trans(sigma, s, dict(ENV, **(rho or {})), loc, sigma.transition(contract, trans))


def _mapping(src, ty):
    typed, _ = check_slot(EMPTY_SIGMA, [], [], parse_slot_expr(src), parse_type(ty))
    return eval_mapping(State(), {}, None, typed)


SWAP = f"""contract W {{
  constructor() creates uint8 x := 1, uint8 y := 2, {BAL}
  transition swap() updates x := y, y := x
}}"""

CASES2 = f"""contract K {{
  constructor() creates uint8 x := 0, {BAL}
  transition t(v: uint8)
  case v < 5: updates x := 1
  case v > 3: updates x := 2
}}"""

CYCLE = {"P": (("q", S.ContractType("Q")),), "Q": (("p", S.ContractAddr("P")),)}

RULE_CASES: List[RuleCase] = [
    # expressions
    RuleCase("E-DivZero", "5 div 0 = 0", lambda: ev("5 div 0") == 0),
    RuleCase("E-ModZero", "5 mod 0 = 0", lambda: ev("5 mod 0") == 0),
    RuleCase("E-Div", "-7 div 2 truncates to -3", lambda: ev("(0 - 7) div 2") == -3),
    RuleCase("E-Mod", "-7 mod 2 keeps the dividend sign", lambda: ev("(0 - 7) mod 2") == -1),
    RuleCase("E-BopI", "2 + 3 * 4 = 14", lambda: ev("2 + 3 * 4") == 14),
    RuleCase("E-BopI", "2 exp 10 = 1024", lambda: ev("2 exp 10") == 1024),
    RuleCase("E-BopI", "negative exponent is stuck", lambda: raises(Stuck, lambda: ev("2 exp (0 - 1)"))),
    RuleCase("E-RangeTrue", "inrange(int, 5) is True", lambda: ev("inrange(int, 5)") is True),
    RuleCase("E-RangeTrue", "inrange(int8, -128) is True", lambda: ev("inrange(int8, 0 - 128)") is True),
    RuleCase("E-RangeFalse", "inrange(uint8, 256) is False", lambda: ev("inrange(uint8, 256)") is False),
    RuleCase("E-BopB", "true and false is False", lambda: ev("true and false") is False),
    RuleCase("E-BopB", "false ==> false is True", lambda: ev("false ==> false") is True),
    RuleCase("E-Neg", "not true is False", lambda: ev("not true") is False),
    RuleCase("E-Cmp", "3 < 4", lambda: ev("3 < 4") is True),
    RuleCase("E-Eq", "addresses compare structurally", lambda: ev("a = b", {"a": Addr(2), "b": Addr(2)}) is True),
    RuleCase("E-Eq", "1 and true are different values", lambda: not value_eq(1, True) and value_eq(Addr(1), Addr(1))),
    RuleCase("E-ITETrue", "untaken branch is not evaluated", lambda: ev("if true then 1 else zz") == 1),
    RuleCase("E-ITEFalse", "else branch taken", lambda: ev("if 1 > 2 then 1 else 9") == 9),
    # references
    RuleCase("E-This", "this yields the current location", lambda: ev("this", loc=Addr(7)) == Addr(7)),
    RuleCase("E-This", "this at the top level is stuck", lambda: raises(Stuck, lambda: ev("this"), "E-This")),
    RuleCase("E-Caller", "caller read from the environment", lambda: ev("caller", dict(ENV)) == Addr(1)),
    RuleCase("E-Calldata", "parameter read from the environment", lambda: ev("y + 1", {"y": 4}) == 5),
    RuleCase("E-Storage", "storage read at the current location",
             lambda: ev("z", loc=Addr(0), s=_field_state()) == 7),
    RuleCase("E-Storage", "untimed read in a timed state is stuck",
             lambda: raises(Stuck, lambda: ev("x", loc=Addr(0), s=Timed(State(), State())))),
    RuleCase("E-Field", "field read through a contract slot",
             lambda: ev("a.z", loc=Addr(1), s=_field_state()) == 7),
    RuleCase("E-Pre", "pre/post read the two halves of a timed state",
             lambda: ev("post(x) - pre(x)", loc=Addr(0),
                        s=Timed(State().with_instance(0, Instance("C", {"x": 1})),
                                State().with_instance(0, Instance("C", {"x": 4})))) == 3),
    RuleCase("E-Index", "missing key reads the default",
             lambda: ev("m[5]", {"m": MapVal("int", 0, {1: 9})}) == 0),
    # values and mappings
    RuleCase("fresh", "fresh({0,3}) = 4",
             lambda: State().with_instance(0, Instance("C", {})).with_instance(3, Instance("C", {})).fresh() == 4),
    RuleCase("fresh", "fresh of the empty store is 0", lambda: State().fresh() == 0),
    RuleCase("default", "default(bool) = False", lambda: default(S.BOOL) is False),
    RuleCase("default", "default(uint8) = 0 and default(address) = @0",
             lambda: default(S.uint(8)) == 0 and default(S.ADDRESS) == Addr(0)),
    RuleCase("E-Mapping", "duplicate keys: last occurrence wins",
             lambda: _mapping("[1 => false, 1 => true]", "mapping(uint8 => bool)").lookup(1) is True),
    RuleCase("E-Mapping", "nested mapping default is a mapping of defaults",
             lambda: _mapping("[]", "mapping(uint8 => mapping(bool => uint8))").lookup(3).lookup(True) == 0),
    # statements
    RuleCase("E-Create", "constructor on the empty store allocates @0",
             lambda: _run(SWAP, "W")[0] == Addr(0)),
    RuleCase("E-Creates", "created instance holds the evaluated slots",
             lambda: _run(SWAP, "W")[1].get(0).vars == {"x": 1, "y": 2, "balance": 0}),
    RuleCase("E-Updates", "right-hand sides all read the pre-state",
             lambda: _run(SWAP, "W", "swap")[1].get(0).vars == {"x": 2, "y": 1, "balance": 0}),
    RuleCase("E-CreatePayable", "payable constructor stores callvalue as balance",
             lambda: _run(f"contract P {{ constructor() payable creates uint256 balance := callvalue }}", "P",
                          args={"callvalue": 5})[1].get(0).vars["balance"] == 5),
    RuleCase("E-InsField", "update through a field writes the referenced instance",
             lambda: _run(A + f"contract B {{ constructor() creates {BAL}, A a := new A(3) "
                              f"transition t() updates a.z := 5 }}", "B", "t")[1].get(0).vars["z"] == 5),
    RuleCase("E-Trans", "false iff is a PreconditionFailed",
             lambda: raises(PreconditionFailed, lambda: _run(
                 f"contract G {{ constructor() creates {BAL} transition t(v: uint8) iff v > 3 }}",
                 "G", "t", {"v": 1}))),
    RuleCase("E-TransCases", "no true case is NoCaseMatched",
             lambda: raises(NoCaseMatched, lambda: _run(
                 f"contract G {{ constructor() creates uint8 x := 0, {BAL} transition t(v: uint8) "
                 f"case v = 1: updates x := 1 case v = 2: updates x := 2 }}", "G", "t", {"v": 7}))),
    RuleCase("E-TransCases", "two true cases is MultipleCasesMatched",
             lambda: raises(MultipleCasesMatched, lambda: _run(CASES2, "K", "t", {"v": 4}))),
    RuleCase("E-TransCases", "exactly one true case runs",
             lambda: _run(CASES2, "K", "t", {"v": 9})[1].get(0).vars["x"] == 2),
    # typing
    RuleCase("T-Int", "256 is rejected at uint8",
             lambda: raises(TypeCheckError, lambda: check_expr(EMPTY_SIGMA, [], [], parse_expr("256"),
                                                               expected=S.uint(8)), "T-Int")),
    RuleCase("T-Int", "255 is accepted at uint8",
             lambda: check_expr(EMPTY_SIGMA, [], [], parse_expr("255"), expected=S.uint(8))[1] == S.uint(8)),
    RuleCase("WFInt", "`int` is rejected in an interface",
             lambda: rejects(f"contract C {{ constructor(x: int) creates {BAL} }}", "WFInt")),
    RuleCase("T-Create", "value argument on a non-payable constructor is rejected",
             lambda: rejects(A + f"contract B {{ constructor() creates {BAL}, A a := new A{{value: 1}}(3) }}",
                             "T-CreatePayable")),
    RuleCase("T-Creates", "`uint256 balance` is required",
             lambda: rejects("contract C { constructor() creates uint8 x := 1 }", "T-Creates")),
    RuleCase("T-Creates", "duplicate created names are rejected",
             lambda: rejects(f"contract C {{ constructor() creates {BAL}, uint8 x := 0, uint8 x := 1 }}",
                             "T-Creates")),
    RuleCase("T-Updates", "a later, less specific target conflicts",
             lambda: rejects(A + f"contract B {{ constructor() creates {BAL}, A a := new A(3) "
                                 f"transition t() updates a.z := 5, a := new A(1) }}", "T-Updates")),
    RuleCase("T-Updates", "an earlier, less specific target is allowed",
             lambda: accepts(A + f"contract B {{ constructor() creates {BAL}, A a := new A(3) "
                                 f"transition t() updates a := new A(1), a.z := 5 }}")),
    RuleCase("T-Environment", "caller is rejected in a timed position",
             lambda: rejects(f"contract C {{ constructor() creates {BAL}, address a := caller "
                             f"transition t() ensures post(a) = caller }}", "T-Environment")),
    RuleCase("T-Storage", "unbound names are rejected",
             lambda: rejects(f"contract C {{ constructor() creates {BAL}, uint256 x := y }}", "T-Storage")),
    RuleCase("T-Spec", "duplicate contract names are rejected",
             lambda: rejects(f"contract C {{ constructor() creates {BAL} }}\n"
                             f"contract C {{ constructor() creates {BAL} }}", "T-Spec")),
    RuleCase("T-Contract", "transition names must be distinct",
             lambda: rejects(f"contract C {{ constructor() creates {BAL} transition t() updates balance := 1 "
                             f"transition t() updates balance := 2 }}", "T-Contract")),
    RuleCase("T-Ctor", "storage and interface names must be disjoint",
             lambda: rejects("contract C { constructor(x: uint8) payable creates uint256 balance := callvalue, "
                             "uint8 x := x }", "T-Ctor")),
    RuleCase("T-WFContract", "a contract cannot create itself",
             lambda: rejects(f"contract C {{ constructor() creates {BAL}, C c := new C() }}", "T-WFContract")),
    RuleCase("T-Exp", "an iff must be boolean",
             lambda: rejects(f"contract C {{ constructor() iff 3 creates {BAL} }}", "T-Exp")),
    RuleCase("T-BopI", "arithmetic into a bounded slot emits an inrange obligation",
             lambda: "T-BopI" in obligation_rules(f"contract C {{ constructor() creates {BAL}, uint8 x := 0 "
                                                 f"transition t(y: uint8) updates x := x + y }}")),
    RuleCase("T-MapExp", "a plain address does not fit an address_A slot",
             lambda: rejects(A + f"contract B {{ constructor() creates {BAL}, address_A a := addr(new A(3)) "
                                 f"transition t(w: address) updates a := w }}", "T-MapExp")),
    # value typing
    RuleCase("V-Int", "256 is not a uint8 value", lambda: not value_has_base(256, S.uint(8))),
    RuleCase("V-Bool", "1 is not a bool value", lambda: value_has_base(1, S.BOOL).rule == "V-Bool"),
    RuleCase("V-Mapping", "an out-of-range entry breaks the mapping type",
             lambda: value_has_mu(MapVal("int", 0, {1: 300}), parse_type("mapping(uint8 => uint8)")).rule
             == "V-Int"),
    RuleCase("V-AddrIsContract", "a well-formed instance is typable",
             lambda: bool(loc_has_contract(check_spec(parse_spec(A)).sigma,
                                           State().with_instance(0, Instance("A", {"z": 1, "balance": 0})),
                                           Addr(0), "A"))),
    RuleCase("V-AddrIsContract", "a dangling address is not typable",
             lambda: not loc_has_contract(check_spec(parse_spec(A)).sigma, State(), Addr(0), "A")),
    # well-foundedness
    RuleCase("WF-Acc", "a cyclic storage relation yields a witness", lambda: check_wf(build_prec(CYCLE)) is not None),
    RuleCase("len", "len of a contract holding a leaf contract is 1",
             lambda: length({"A": (), "B": (("a", S.ContractType("A")),)}, "B") == 1),
]


def run_rule_cases():
    """Evaluate every case; returns a list of ``(case, ok, error)``."""
    out = []
    for c in RULE_CASES:
        try:
            out.append((c, bool(c.check()), None))
        except Exception as e:  # a crash is a failure, reported with its message
            out.append((c, False, f"{type(e).__name__}: {e}"))
    return out
