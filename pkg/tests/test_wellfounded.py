import pytest

from actlang import build_prec, check_spec, check_wf, length, parse_file, parse_spec
from actlang import syntax as S
from actlang.wellfounded import is_wf

from conftest import CORPUS

BAL = ("balance", S.UINT256)


def test_edges_for_contract_and_address_fields():
    g = build_prec({"A": (BAL,), "B": (("a", S.ContractType("A")), ("p", S.ContractAddr("A")), BAL)})
    assert g.edges == {("A", "B")}
    assert g.preds("B") == ["A"] and g.preds("A") == []


def test_chain_is_well_founded_with_lengths():
    storage = {"A": (BAL,), "B": (("a", S.ContractType("A")), BAL), "C": (("b", S.ContractAddr("B")), BAL)}
    g = build_prec(storage)
    assert check_wf(g) is None and is_wf(g)
    assert [length(storage, c) for c in "ABC"] == [0, 1, 2]
    assert length(storage, S.uint(8)) == 0
    assert length(storage, S.ContractAddr("C")) == 2


def test_self_reference_is_a_cycle():
    g = build_prec({"A": (("me", S.ContractAddr("A")), BAL)})
    assert check_wf(g) == ["A"]
    with pytest.raises(ValueError):
        length({"A": (("me", S.ContractAddr("A")), BAL)}, "A")


def test_shortest_cycle_is_reported():
    storage = {
        "A": (("b", S.ContractType("B")),), "B": (("a", S.ContractType("A")), ("c", S.ContractType("C"))),
        "C": (("d", S.ContractType("D")),), "D": (("b", S.ContractType("B")),),
    }
    assert sorted(check_wf(build_prec(storage))) == ["A", "B"]


def test_typed_specs_are_well_founded():
    r = check_spec(parse_file(CORPUS / "vault.act"))
    assert check_wf(build_prec(r.sigma)) is None
    assert length(r.sigma, "Pool") >= 1


def test_dot_output():
    r = check_spec(parse_spec("contract A { constructor() creates uint256 balance := 0 }\n"
                              "contract B { constructor() creates uint256 balance := 0, A a := new A() }"))
    dot = build_prec(r.sigma).to_dot()
    assert dot.startswith("digraph prec {") and '"A" -> "B";' in dot
