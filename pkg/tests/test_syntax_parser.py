import pprint
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from actlang import LexError, ParseError, parse_expr, parse_file, parse_spec, parse_type, pretty, tokenize
from actlang import syntax as S
from actlang.metatheory import Gen

from conftest import CORPUS

GOLDEN = CORPUS.parent / "tests" / "golden" / "token_ast.txt"


def test_keyword_and_identifier_kinds():
    toks = tokenize("iff Counter count 0x1f :=")
    assert [(t.kind, t.lexeme) for t in toks[:-1]] == [
        ("keyword", "iff"), ("capIdentifier", "Counter"), ("identifier", "count"),
        ("intLit", "0x1f"), ("symbol", ":="),
    ]


def test_lex_error_points_at_bad_character():
    with pytest.raises(LexError) as e:
        tokenize("0x?")
    d = e.value.diagnostics[0]
    assert (d.span.line, d.span.col, d.rule) == (1, 3, "lex")


def test_hex_and_big_literals():
    assert parse_expr("0xff").value == 255
    assert parse_expr(str(2 ** 300)).value == 2 ** 300


def test_minimal_contract():
    spec = parse_spec("contract C { constructor() iff true creates uint256 balance := 0 ensures true invariants true }")
    assert len(spec.contracts) == 1
    c = spec.contracts[0]
    assert len(c.ctor.cases) == 1 and len(c.ctor.cases[0].creates) == 1
    assert c.invariants == (S.BoolLit(True),)


def test_caseless_body_desugars_to_true_case():
    spec = parse_spec("contract C { constructor() creates uint256 balance := 0 "
                      "transition t() updates balance := 1 }")
    (case,) = spec.contracts[0].transitions[0].cases
    assert case.cond == S.BoolLit(True)


def test_implication_is_right_associative():
    e = parse_expr("a ==> b ==> c")
    assert isinstance(e.right, S.BinB) and e.right.op == "==>"
    assert e.left == S.RefExpr(S.Var("a"))


@pytest.mark.parametrize("src, expected", [
    ("1 + 2 * 3", "1 + 2 * 3"),
    ("(1 + 2) * 3", "(1 + 2) * 3"),
    ("a or b and c", "a or b and c"),
    ("not a and b", "not a and b"),
    ("x < 1 = true", "x < 1 = true"),
    ("2 exp 3 exp 2", "2 exp 3 exp 2"),
    ("(a ==> b) ==> c", "(a ==> b) ==> c"),
])
def test_precedence_survives_pretty(src, expected):
    e = parse_expr(src)
    assert S.pretty_expr(e) == expected
    assert parse_expr(S.pretty_expr(e)) == e


def test_multiplication_binds_tighter():
    e = parse_expr("1 + 2 * 3")
    assert e.op == "+" and e.right.op == "*"


def test_literal_and_inrange_rendering():
    assert S.pretty_expr(S.IntLit(0)) == "0"
    assert S.pretty_expr(S.InRange(S.uint(8), S.RefExpr(S.Var("x")))) == "inrange(uint8, x)"


@pytest.mark.parametrize("src", ["uint8", "int", "int256", "bool", "address", "address_Vault", "Vault",
                                 "mapping(address => mapping(uint8 => bool))"])
def test_types_round_trip(src):
    assert str(parse_type(src)) == src


def test_invalid_width_rejected():
    with pytest.raises(LexError):
        parse_type("uint7")


def test_post_of_field_is_a_parse_error():
    with pytest.raises(ParseError):
        parse_expr("post(v.keeper)")
    assert isinstance(parse_expr("post(v).keeper").ref, S.Field)


def test_chained_coercion_parses():
    r = parse_expr("((r as A) as B).f").ref
    assert isinstance(r.inner, S.Coerce) and isinstance(r.inner.inner, S.Coerce)


def test_parse_error_has_position():
    with pytest.raises(ParseError) as e:
        parse_spec("contract C {\n  constructor( }")
    d = e.value.diagnostics[0]
    assert d.span.line == 2 and d.rule == "parse"
    assert d.to_json()["severity"] == "error"


def test_spans_do_not_affect_equality():
    a = parse_spec("contract C { constructor() creates uint256 balance := 0 }")
    b = parse_spec("contract C {\n\n constructor()\n creates uint256 balance := 0 }")
    assert a == b


@pytest.mark.parametrize("path", sorted(CORPUS.glob("*.act")), ids=lambda p: p.name)
def test_corpus_round_trip(path):
    ast = parse_file(path)
    text = pretty(ast)
    assert parse_spec(text) == ast
    assert pretty(parse_spec(text)) == text


def test_golden_token_ast():
    # recorded from the first successful parse and frozen
    got = pprint.pformat(parse_file(CORPUS / "token.act"), width=110) + "\n"
    assert got == GOLDEN.read_text()


# -- properties ---------------------------------------------------------------

names = st.sampled_from(["a", "b", "x", "y"])
int_atoms = st.one_of(st.integers(-300, 300).map(S.IntLit), names.map(lambda n: S.RefExpr(S.Var(n))))
bool_atoms = st.one_of(st.booleans().map(S.BoolLit), names.map(lambda n: S.RefExpr(S.Var(n))))

int_exprs = st.recursive(
    int_atoms,
    lambda sub: st.builds(S.BinI, st.sampled_from(S.INT_OPS), sub, sub),
    max_leaves=8,
)


def _bool_ext(sub):
    return st.one_of(
        st.builds(S.BinB, st.sampled_from(S.BOOL_OPS), sub, sub),
        st.builds(S.Not, sub),
        st.builds(S.Cmp, st.sampled_from(S.CMP_OPS), int_exprs, int_exprs),
        st.builds(S.Eq, int_exprs, int_exprs),
        st.builds(S.Ite, sub, sub, sub),
        st.builds(S.InRange, st.sampled_from([S.uint(8), S.INT, S.sint(16)]), int_exprs),
    )


bool_exprs = st.recursive(bool_atoms, _bool_ext, max_leaves=10)


@given(st.one_of(int_exprs, bool_exprs))
@settings(max_examples=300, deadline=None)
def test_expression_round_trip(e):
    assert parse_expr(S.pretty_expr(e)) == e


@given(st.integers(0, 2 ** 32))
@settings(max_examples=40, deadline=None)
def test_generated_spec_round_trip(seed):
    raw, _, _ = Gen(random.Random(seed)).spec()
    assert parse_spec(pretty(raw)) == raw
