import importlib.util

import pytest

from actlang import (Addr, BoundsConfig, Counterexample, Unknown, ValidWithinBounds, check_spec, discharge,
                     enumerate_contexts, export_obligation, parse_expr, parse_file, parse_spec)
from actlang import syntax as S
from actlang.bounds import int_samples
from actlang.entailment import is_exportable, replay_counterexample, solve_smt
from actlang.sigma import EMPTY_SIGMA
from actlang.typecheck import Obligation, check_expr

from conftest import CORPUS

HAS_Z3 = importlib.util.find_spec("z3") is not None
ONE = BoundsConfig(addr_domain=1)
U8 = "contract C { constructor() creates uint256 balance := 0, uint8 f := 0 }"


def obligation(sigma, iface, phi, goals, contract=None, timed=False):
    tp = tuple(check_expr(sigma, iface, (), parse_expr(p), contract, False, S.BOOL)[0] for p in phi)
    tg = tuple(check_expr(sigma, iface, tp, parse_expr(g), contract, timed, S.BOOL)[0] for g in goals)
    return Obligation(kind="exprs", sigma=sigma, sigma_id=0, iface=tuple(iface), phi=tp, contract=contract,
                      goals=tg, rule="test", timed=timed)


def test_empty_interface_without_contract_has_one_context_per_env():
    ctxs = list(enumerate_contexts(EMPTY_SIGMA, (), None, ONE))
    assert ctxs and all(s.dom() == set() and loc is None for s, _, loc in ctxs)
    # one caller, one origin, every callvalue sample
    assert len(ctxs) == len(int_samples(S.UINT256, ONE))
    flags = list(enumerate_contexts(EMPTY_SIGMA, (S.Param("b", S.BOOL),), None, ONE))
    assert len(flags) == 2 * len(ctxs)


def test_uint8_field_enumerates_its_samples():
    sigma = check_spec(parse_spec(U8)).sigma
    f = S.RefExpr(S.Var("f"))
    ctxs = list(enumerate_contexts(sigma, (), "C", ONE, [f]))
    assert sorted({s.get(loc).vars["f"] for s, _, loc in ctxs}) == int_samples(S.uint(8), ONE)
    assert len(ctxs) == len(int_samples(S.uint(8), ONE))


def test_tautology_is_valid():
    v = discharge(obligation(EMPTY_SIGMA, [S.Param("x", S.uint(8))], [], ["x <= 255"]))
    assert isinstance(v, ValidWithinBounds) and v.contexts > 0


def test_weaker_hypothesis_yields_boundary_counterexample():
    ob = obligation(EMPTY_SIGMA, [S.Param("x", S.uint(8))], ["x < 10"], ["x < 5"])
    v = discharge(ob)
    assert isinstance(v, Counterexample)
    assert 5 <= v.rho["x"] < 10 and replay_counterexample(ob, v)
    assert v.to_json()["verdict"] == "Counterexample"


def test_timed_obligation_over_pre_post_pairs():
    sigma = check_spec(parse_spec(U8)).sigma
    ob = obligation(sigma, [], [], ["pre(f) = post(f)"], "C", timed=True)
    assert isinstance(discharge(ob), Counterexample)
    ob = obligation(sigma, [], [], ["pre(f) <= 255 and post(f) >= 0"], "C", timed=True)
    assert isinstance(discharge(ob), ValidWithinBounds)


def _iff_obligation(src):
    r = check_spec(parse_spec(src))
    (ob,) = [o for o in r.obligations if o.rule == "T-CreatePayable"]
    return ob


CALLEE = "contract A { constructor() payable iff callvalue > 0 creates uint256 balance := callvalue }\n"


def test_literal_value_satisfies_callee_iff():
    ob = _iff_obligation(CALLEE + "contract B { constructor() creates uint256 balance := 0, A a := new A{value: 1}() }")
    assert isinstance(discharge(ob), ValidWithinBounds)


def test_calldata_value_can_violate_callee_iff():
    ob = _iff_obligation(CALLEE + "contract B { constructor(x: uint256) creates uint256 balance := 0, "
                                  "A a := new A{value: x}() }")
    v = discharge(ob)
    assert isinstance(v, Counterexample) and v.rho["x"] == 0
    assert replay_counterexample(ob, v)


def test_budget_exhaustion_is_unknown():
    ob = obligation(EMPTY_SIGMA, [S.Param(n, S.uint(8)) for n in "abc"], [], ["a + b + c >= 0"])
    v = discharge(ob, BoundsConfig(max_contexts=10))
    assert isinstance(v, Unknown) and not v.ok


def test_bounds_config_validation():
    with pytest.raises(ValueError):
        BoundsConfig(addr_domain=0)


def test_export_mentions_declarations():
    ob = obligation(EMPTY_SIGMA, [S.Param("x", S.uint(8))], ["x < 10"], ["x < 5"])
    text = export_obligation(ob)
    assert "(declare-const" in text and "(check-sat)" in text and is_exportable(text)
    with pytest.raises(ValueError):
        export_obligation(ob, "json")


@pytest.mark.skipif(not HAS_Z3, reason="z3 not installed")
def test_solver_agrees_with_enumeration():
    bad = obligation(EMPTY_SIGMA, [S.Param("x", S.uint(8))], ["x < 10"], ["x < 5"])
    good = obligation(EMPTY_SIGMA, [S.Param("x", S.uint(8))], ["x < 5"], ["x < 10"])
    assert solve_smt(export_obligation(bad)) == "sat"
    assert solve_smt(export_obligation(good)) == "unsat"


@pytest.mark.skipif(not HAS_Z3, reason="z3 not installed")
def test_corpus_exports_are_solvable():
    for ob in check_spec(parse_file(CORPUS / "token.act")).obligations:
        text = export_obligation(ob)
        if is_exportable(text):
            assert solve_smt(text) in ("sat", "unsat", "unknown")
