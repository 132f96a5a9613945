import pytest

from actlang import TypeCheckError, check_spec, parse_expr, parse_file, parse_ref, parse_slot_expr, parse_spec, parse_type
from actlang import syntax as S
from actlang.entailment import ValidWithinBounds, discharge
from actlang.sigma import EMPTY_SIGMA
from actlang.typecheck import check_expr, check_ref, check_slot, missing_annotations, recheck_obligation

from conftest import CORPUS

BAL = "uint256 balance := 0"


def checked(src):
    return check_spec(parse_spec(src))


def rule_of(src):
    with pytest.raises(TypeCheckError) as e:
        checked(src)
    return e.value.rule


def goals(result, rule):
    return [[S.pretty_expr(g) for g in o.goals] for o in result.obligations if o.rule == rule]


def test_empty_spec():
    r = checked("")
    assert dict(r.sigma.storage) == {} and r.obligations == [] and r.spec.contracts == ()


def test_contract_must_be_declared_before_use():
    src = f"contract B {{ constructor() creates {BAL}, A a := new A() }}\ncontract A {{ constructor() creates {BAL} }}"
    assert rule_of(src) == "T-WFContract"


def test_address_of_earlier_contract_accepted():
    r = checked(f"contract A {{ constructor() creates {BAL} }}\n"
                f"contract B {{ constructor() creates {BAL}, address_A a := addr(new A()) }}")
    assert set(r.sigma.storage) == {"A", "B"}
    assert r.sigma.field_type("B", "a") == S.ContractAddr("A")


def test_prefixes_grow_one_contract_at_a_time():
    r = check_spec(parse_file(CORPUS / "vault.act"))
    assert [sorted(p.storage) for p in r.prefixes] == [[], ["Vault"], ["Pool", "Vault"]]


def test_single_case_constructor_still_emits_exhaustiveness():
    r = checked(f"contract A {{ constructor() creates {BAL} }}")
    assert goals(r, "T-Ctor") == [["true ==> true"]]


def test_two_complementary_cases_are_exhaustive_and_disjoint():
    r = checked(f"contract A {{ constructor() creates {BAL}, bool b := true "
                f"transition t() case b: updates b := false case not b: updates b := true }}")
    (ob,) = [o for o in r.obligations if o.rule == "T-Trans"]
    assert isinstance(discharge(ob), ValidWithinBounds)


def test_timed_arithmetic_is_unbounded():
    r = checked(f"contract A {{ constructor() creates {BAL}, uint256 x := 0 transition t() : int "
                f"returns pre(x) + post(x) }}")
    assert goals(r, "T-NumConv") == []
    # narrowing the same sum to uint256 needs a range check
    r = checked(f"contract A {{ constructor() creates {BAL}, uint256 x := 0 transition t() : uint256 "
                f"returns pre(x) + post(x) }}")
    assert goals(r, "T-NumConv") == [["inrange(uint256, pre(x) + post(x))"]]


def test_untimed_arithmetic_emits_inrange():
    r = checked(f"contract A {{ constructor() creates {BAL}, uint8 x := 0 transition t() updates x := x + 1 }}")
    assert goals(r, "T-BopI") == [["inrange(uint8, x + 1)"]]


def test_update_of_calldata_rejected():
    assert rule_of(f"contract A {{ constructor() creates {BAL} transition t(y: uint8) updates y := 1 }}") == "T-Update"


def test_plain_storage_name_in_timed_position_rejected():
    assert rule_of(f"contract A {{ constructor() creates {BAL}, uint8 x := 0 transition t() "
                   f"ensures x = 1 }}") == "T-Storage"


def test_this_needs_a_current_contract():
    assert rule_of(f"contract A {{ constructor() creates {BAL}, address me := this }}") == "T-This"


def test_coerce_then_field():
    sigma = checked(f"contract A {{ constructor() creates {BAL}, uint8 f := 0 }}").sigma
    _, t, tag = check_ref(sigma, [S.Param("r", S.ContractAddr("A"))], parse_ref("(r as A).f"))
    assert (t, tag) == (S.uint(8), "N")


def test_coerce_needs_a_contract_address():
    sigma = checked(f"contract A {{ constructor() creates {BAL}, uint8 f := 0 }}").sigma
    for src, ty in [("(r as A).f", S.ADDRESS), ("((r as A) as A).f", S.ContractAddr("A"))]:
        with pytest.raises(TypeCheckError) as e:
            check_ref(sigma, [S.Param("r", ty)], parse_ref(src))
        assert e.value.rule == "T-Coerce"


def test_int_literal_bounds():
    _, t, _ = check_expr(EMPTY_SIGMA, [], [], parse_expr("255"), expected=S.uint(8))
    assert t == S.uint(8)
    with pytest.raises(TypeCheckError) as e:
        check_expr(EMPTY_SIGMA, [], [], parse_expr("256"), expected=S.uint(8))
    assert e.value.rule == "T-Int"


def test_new_on_payable_needs_value():
    src = (f"contract A {{ constructor() payable creates uint256 balance := callvalue }}\n"
           f"contract B {{ constructor() creates {BAL}, A a := new A() }}")
    assert rule_of(src) == "T-Create"


def test_payable_new_emits_iff_obligation():
    r = checked(f"contract A {{ constructor() payable iff callvalue > 0 creates uint256 balance := callvalue }}\n"
                f"contract B {{ constructor(v: uint256) creates {BAL}, A a := new A{{value: v}}() }}")
    (ob,) = [o for o in r.obligations if o.rule == "T-CreatePayable"]
    assert ob.kind == "iffs" and ob.callee == "A"
    assert [S.pretty_expr(g) for g in ob.goals] == ["callvalue > 0"]


def test_mapping_literal_gets_annotation():
    m, obs = check_slot(EMPTY_SIGMA, [], [], parse_slot_expr("[1 => 2]"), parse_type("mapping(uint8 => uint8)"))
    assert m.annot == parse_type("mapping(uint8 => uint8)")
    assert obs == []


@pytest.mark.parametrize("updates, ok", [
    ("x := 1, x := 2", False),
    ("a.z := 5, a := new A(1)", False),
    ("a := new A(1), a.z := 5", True),
])
def test_update_specificity(updates, ok):
    src = (f"contract A {{ constructor(y: uint256) creates {BAL}, uint256 z := y }}\n"
           f"contract B {{ constructor() creates {BAL}, uint8 x := 0, A a := new A(3) transition t() "
           f"updates {updates} }}")
    if ok:
        checked(src)
    else:
        assert rule_of(src) == "T-Updates"


def test_math_int_storage_slot_accepted():
    r = checked(f"contract A {{ constructor() creates {BAL}, int x := 0 }}")
    assert r.sigma.field_type("A", "x") == S.INT


def test_duplicate_created_names_rejected():
    assert rule_of(f"contract A {{ constructor() creates {BAL}, uint8 x := 0, bool x := true }}") == "T-Creates"


def test_invariant_may_not_mention_calldata():
    assert rule_of(f"contract A {{ constructor(y: uint8) creates {BAL} invariants y > 0 }}") == "T-Storage"


def test_address_return_of_contract_address_rejected():
    src = (f"contract A {{ constructor() creates {BAL} }}\n"
           f"contract B {{ constructor() creates {BAL}, address_A a := addr(new A()) transition t() : address_A "
           f"returns pre(a) }}")
    assert rule_of(src) == "T-Trans"


@pytest.mark.parametrize("name", ["counter", "swap", "token", "vault", "broken_invariant", "weak_guard"])
def test_corpus_checks_and_is_fully_annotated(name):
    r = check_spec(parse_file(CORPUS / f"{name}.act"))
    assert missing_annotations(r.spec) == []


def test_bad_width_corpus_rejected():
    with pytest.raises(TypeCheckError) as e:
        check_spec(parse_file(CORPUS / "bad_width.act"))
    assert e.value.rule == "T-Int"


def test_obligations_recheck_and_hash_stably():
    a = check_spec(parse_file(CORPUS / "token.act")).obligations
    b = check_spec(parse_file(CORPUS / "token.act")).obligations
    assert [o.hash for o in a] == [o.hash for o in b]
    assert len({o.hash for o in a}) == len(a)
    assert all(recheck_obligation(o) for o in a)
