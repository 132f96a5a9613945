"""Lexer and recursive-descent parser for ``.act`` files.

Operator precedence, loosest first::

    if-then-else  ==>  or  and  =  (< <= >= >)  (+ -)  (* div mod)  exp  not

``==>`` and ``exp`` associate to the right, everything else to the left.
"""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass
from typing import List, Optional

from . import syntax as S
from .diagnostics import Diagnostic, LexError, ParseError, error

KEYWORDS = frozenset(
    """
    contract constructor transition payable iff case creates updates returns
    ensures invariants new value as pre post inrange caller origin callvalue
    this true false div mod exp and or not if then else addr mapping bool
    address int
    """.split()
)

_UNICODE = {"⇒": "==>", "∧": "and", "∨": "or", "¬": "not", "≤": "<=", "≥": ">="}
_SYMBOLS = ["==>", ":=", "=>", "<=", ">=", "<", ">", "=", "+", "-", "*", "(", ")",
            "[", "]", "{", "}", ",", ":", "."]

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER = re.compile(r"0[xX][0-9a-fA-F]+|[0-9]+")
_INT_TYPE = re.compile(r"(u?)int([0-9]+)")


@dataclass(frozen=True)
class Token:
    kind: str  # keyword | identifier | capIdentifier | intLit | symbol | eof
    lexeme: str
    span: S.Span
    value: Optional[int] = None


def tokenize(source: str, file: str = "<input>") -> List[Token]:
    tokens: List[Token] = []
    i, line, col = 0, 1, 1
    n = len(source)

    def advance(k: int):
        nonlocal i, line, col
        for ch in source[i : i + k]:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1
        i += k

    while i < n:
        ch = source[i]
        if ch in " \t\r\n":
            advance(1)
            continue
        if source.startswith("//", i):
            j = source.find("\n", i)
            advance((n if j < 0 else j) - i)
            continue
        span = S.Span(file, line, col)
        if ch in _UNICODE:
            tok = _UNICODE[ch]
            kind = "keyword" if tok.isalpha() else "symbol"
            tokens.append(Token(kind, tok, span))
            advance(1)
            continue
        m = _NUMBER.match(source, i)
        if m:
            text = m.group()
            tokens.append(Token("intLit", text, span, int(text, 0)))
            advance(len(text))
            continue
        m = _IDENT.match(source, i)
        if m:
            text = m.group()
            tokens.append(Token(_classify(text, span), text, span))
            advance(len(text))
            continue
        for sym in _SYMBOLS:
            if source.startswith(sym, i):
                tokens.append(Token("symbol", sym, span))
                advance(len(sym))
                break
        else:
            raise LexError([error(f"unexpected character {ch!r}", span, "lex")])
    tokens.append(Token("eof", "", S.Span(file, line, col)))
    return tokens


def _classify(text: str, span: S.Span) -> str:
    if text in KEYWORDS:
        return "keyword"
    m = _INT_TYPE.fullmatch(text)
    if m:
        if int(m.group(2)) not in S.VALID_WIDTHS:
            raise LexError([error(f"invalid integer type {text!r}: width must be a multiple of 8 in [8, 256]", span, "lex")])
        return "keyword"
    if text.startswith("address_") and text[8:9].isupper():
        return "keyword"
    return "capIdentifier" if text[0].isupper() else "identifier"


class _Fail(Exception):
    def __init__(self, diag: Diagnostic):
        self.diag = diag


_EXPR_CONTINUATIONS = {"+", "-", "*", "=", "<", "<=", ">=", ">", "==>", ".", "[",
                       "and", "or", "div", "mod", "exp", "as"}
_CMP = {"<", "<=", ">=", ">"}
_ENV = {"caller", "origin", "callvalue", "this"}


class Parser:
    def __init__(self, tokens: List[Token]):
        self.toks = tokens
        self.pos = 0

    # -- token helpers -------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def at(self, lexeme: str) -> bool:
        t = self.tok
        return t.kind in ("keyword", "symbol") and t.lexeme == lexeme

    def accept(self, lexeme: str) -> bool:
        if self.at(lexeme):
            self.pos += 1
            return True
        return False

    def expect(self, lexeme: str) -> Token:
        if not self.at(lexeme):
            self.fail(f"expected {lexeme!r}, found {self.describe(self.tok)}")
        t = self.tok
        self.pos += 1
        return t

    def fail(self, message: str, tok: Optional[Token] = None):
        tok = tok or self.tok
        raise _Fail(error(message, tok.span, "parse"))

    @staticmethod
    def describe(t: Token) -> str:
        return "end of input" if t.kind == "eof" else repr(t.lexeme)

    def ident(self) -> Token:
        if self.tok.kind != "identifier":
            self.fail(f"expected identifier, found {self.describe(self.tok)}")
        t = self.tok
        self.pos += 1
        return t

    def cap_ident(self) -> Token:
        if self.tok.kind != "capIdentifier":
            self.fail(f"expected contract name, found {self.describe(self.tok)}")
        t = self.tok
        self.pos += 1
        return t

    # -- declarations --------------------------------------------------

    def spec(self) -> S.Spec:
        contracts, diags = [], []
        while self.tok.kind != "eof":
            start = self.pos
            try:
                contracts.append(self.contract())
            except _Fail as f:
                diags.append(f.diag)
                self.pos = max(self.pos, start + 1)
                while self.tok.kind != "eof" and not self.at("contract"):
                    self.pos += 1
        if diags:
            raise ParseError(diags)
        return S.Spec(tuple(contracts))

    def contract(self) -> S.Contract:
        span = self.expect("contract").span
        name = self.cap_ident().lexeme
        self.expect("{")
        if not self.at("constructor"):
            self.fail("a contract must begin with its constructor")
        ctor = self.constructor()
        transitions = []
        while self.at("transition"):
            transitions.append(self.transition())
        invariants = ()
        if self.accept("invariants"):
            invariants = self.expr_list()
        if self.at("constructor"):
            self.fail("a contract has exactly one constructor")
        self.expect("}")
        return S.Contract(name, ctor, tuple(transitions), invariants, span=span)

    def params(self):
        self.expect("(")
        out, seen = [], set()
        if not self.at(")"):
            while True:
                t = self.ident()
                self.expect(":")
                ty = self.abi_type()
                if t.lexeme in seen:
                    self.fail(f"duplicate interface name {t.lexeme!r}", t)
                seen.add(t.lexeme)
                out.append(S.Param(t.lexeme, ty, span=t.span))
                if not self.accept(","):
                    break
        self.expect(")")
        return tuple(out)

    def constructor(self) -> S.Constructor:
        span = self.expect("constructor").span
        iface = self.params()
        payable = self.accept("payable")
        iff = self.expr_list() if self.accept("iff") else ()
        cases = []
        if self.at("case"):
            while self.at("case"):
                cspan = self.expect("case").span
                cond = self.expr()
                self.expect(":")
                cases.append(S.CtorCase(cond, self.creates_block(), span=cspan))
        else:
            cases.append(S.CtorCase(S.BoolLit(True), self.creates_block(), span=self.tok.span))
        ensures = self.expr_list() if self.accept("ensures") else ()
        return S.Constructor(iface, payable, iff, tuple(cases), ensures, span=span)

    def creates_block(self):
        if not self.accept("creates"):
            return ()
        items = []
        if not self._at_block_end():
            while True:
                span = self.tok.span
                ty = self.slot_type()
                name = self.ident().lexeme
                self.expect(":=")
                items.append(S.Create(ty, name, self.slot_expr(), span=span))
                if not self.accept(","):
                    break
        return tuple(items)

    def _at_block_end(self) -> bool:
        return self.tok.kind == "eof" or any(
            self.at(k) for k in ("case", "ensures", "returns", "transition", "invariants", "}")
        )

    def transition(self) -> S.Transition:
        span = self.expect("transition").span
        name = self.ident().lexeme
        iface = self.params()
        payable = self.accept("payable")
        ret = self.abi_type() if self.accept(":") else None
        iff = self.expr_list() if self.accept("iff") else ()
        cases = []
        if self.at("case"):
            while self.at("case"):
                cspan = self.expect("case").span
                cond = self.expr()
                self.expect(":")
                ups, r = self.updates_block()
                cases.append(S.TransCase(cond, ups, r, span=cspan))
        else:
            cspan = self.tok.span
            ups, r = self.updates_block()
            cases.append(S.TransCase(S.BoolLit(True), ups, r, span=cspan))
        ensures = self.expr_list() if self.accept("ensures") else ()
        return S.Transition(name, iface, payable, ret, iff, tuple(cases), ensures, span=span)

    def updates_block(self):
        items = []
        if self.accept("updates") and not self._at_block_end():
            while True:
                span = self.tok.span
                target = self.ref()
                self.expect(":=")
                items.append(S.Update(target, self.slot_expr(), span=span))
                if not self.accept(","):
                    break
        ret = self.expr() if self.accept("returns") else None
        return tuple(items), ret

    def expr_list(self):
        out = [self.expr()]
        while self.accept(","):
            out.append(self.expr())
        return tuple(out)

    # -- types ----------------------------------------------------------

    def base_type(self):
        t = self.tok
        if t.kind == "keyword":
            if t.lexeme == "bool":
                self.pos += 1
                return S.BOOL
            if t.lexeme == "address":
                self.pos += 1
                return S.ADDRESS
            if t.lexeme == "int":
                self.pos += 1
                return S.INT
            m = _INT_TYPE.fullmatch(t.lexeme)
            if m:
                self.pos += 1
                return S.IntType(m.group(1) != "u", int(m.group(2)))
        self.fail(f"expected a base type, found {self.describe(t)}")

    def int_type(self) -> S.IntType:
        t = self.tok
        ty = self.base_type()
        if not isinstance(ty, S.IntType):
            self.fail("expected an integer type", t)
        return ty

    def mu_type(self):
        if self.accept("mapping"):
            self.expect("(")
            key = self.base_type()
            self.expect("=>")
            value = self.mu_type()
            self.expect(")")
            return S.MappingType(key, value)
        return self.base_type()

    def abi_type(self):
        t = self.tok
        if t.kind == "keyword" and t.lexeme.startswith("address_"):
            self.pos += 1
            return S.ContractAddr(t.lexeme[len("address_"):])
        return self.base_type()

    def slot_type(self):
        t = self.tok
        if t.kind == "capIdentifier":
            self.pos += 1
            return S.ContractType(t.lexeme)
        if t.kind == "keyword" and t.lexeme.startswith("address_"):
            return self.abi_type()
        return self.mu_type()

    # -- references -----------------------------------------------------

    def _ref_start(self) -> bool:
        t = self.tok
        return t.kind == "identifier" or (t.kind == "keyword" and t.lexeme in _ENV | {"pre", "post"}) or self.at("(")

    def ref_atom(self) -> S.Ref:
        t = self.tok
        if t.kind == "identifier":
            self.pos += 1
            return S.Var(t.lexeme, span=t.span)
        if t.kind == "keyword" and t.lexeme in ("pre", "post"):
            self.pos += 1
            self.expect("(")
            name = self.ident().lexeme
            self.expect(")")
            return (S.Pre if t.lexeme == "pre" else S.Post)(name, span=t.span)
        if t.kind == "keyword" and t.lexeme in _ENV:
            self.pos += 1
            return S.EnvRef(t.lexeme, span=t.span)
        if self.accept("("):
            r = self.ref()
            self.expect(")")
            return r
        self.fail(f"expected a reference, found {self.describe(t)}")

    def postfix(self, ref: S.Ref, allow_update: bool = False):
        """Extend ``ref`` with ``.x``, ``[e]`` and ``as A``.

        With ``allow_update`` a bracket holding ``k => v`` pairs (or nothing)
        turns the whole thing into a mapping update and ends the chain.
        """
        while True:
            t = self.tok
            if self.accept("."):
                ref = S.Field(ref, self.ident().lexeme, span=t.span)
            elif self.accept("as"):
                ref = S.Coerce(ref, self.cap_ident().lexeme, span=t.span)
            elif self.at("["):
                self.pos += 1
                if allow_update and self.accept("]"):
                    return S.MapUpd(ref, (), span=t.span)
                key = self.expr()
                if allow_update and self.accept("=>"):
                    pairs = [(key, self.mapping_expr())]
                    while self.accept(","):
                        k = self.expr()
                        self.expect("=>")
                        pairs.append((k, self.mapping_expr()))
                    self.expect("]")
                    return S.MapUpd(ref, tuple(pairs), span=t.span)
                self.expect("]")
                ref = S.Index(ref, key, span=t.span)
            else:
                return ref

    def ref(self) -> S.Ref:
        return self.postfix(self.ref_atom())

    # -- expressions ----------------------------------------------------

    def expr(self):
        if self.at("if"):
            return self.ite()
        return self.implies()

    def ite(self):
        span = self.expect("if").span
        c = self.expr()
        self.expect("then")
        a = self.expr()
        self.expect("else")
        b = self.expr()
        return S.Ite(c, a, b, span=span)

    def implies(self):
        left = self.disjunction()
        t = self.tok
        if self.accept("==>"):
            return S.BinB("==>", left, self.implies(), span=t.span)
        return left

    def _left_assoc(self, ops, sub, build):
        left = sub()
        while self.tok.kind in ("keyword", "symbol") and self.tok.lexeme in ops:
            t = self.tok
            self.pos += 1
            left = build(t.lexeme, left, sub(), t.span)
        return left

    def disjunction(self):
        return self._left_assoc({"or"}, self.conjunction, lambda o, l, r, sp: S.BinB(o, l, r, span=sp))

    def conjunction(self):
        return self._left_assoc({"and"}, self.equality, lambda o, l, r, sp: S.BinB(o, l, r, span=sp))

    def equality(self):
        return self._left_assoc({"="}, self.comparison, lambda o, l, r, sp: S.Eq(l, r, span=sp))

    def comparison(self):
        return self._left_assoc(_CMP, self.additive, lambda o, l, r, sp: S.Cmp(o, l, r, span=sp))

    def additive(self):
        return self._left_assoc({"+", "-"}, self.multiplicative, lambda o, l, r, sp: S.BinI(o, l, r, span=sp))

    def multiplicative(self):
        return self._left_assoc({"*", "div", "mod"}, self.power, lambda o, l, r, sp: S.BinI(o, l, r, span=sp))

    def power(self):
        left = self.unary()
        t = self.tok
        if self.accept("exp"):
            return S.BinI("exp", left, self.power(), span=t.span)
        return left

    def unary(self):
        t = self.tok
        if self.accept("not"):
            return S.Not(self.unary(), span=t.span)
        return self.primary()

    def primary(self):
        t = self.tok
        if t.kind == "intLit":
            self.pos += 1
            return S.IntLit(t.value, span=t.span)
        if self.at("-") and self.peek().kind == "intLit":
            self.pos += 2
            return S.IntLit(-self.peek(-1).value, span=t.span)
        if self.accept("true"):
            return S.BoolLit(True, span=t.span)
        if self.accept("false"):
            return S.BoolLit(False, span=t.span)
        if self.at("if"):
            return self.ite()
        if self.accept("inrange"):
            self.expect("(")
            ty = self.int_type()
            self.expect(",")
            e = self.expr()
            self.expect(")")
            return S.InRange(ty, e, span=t.span)
        if self.accept("addr"):
            self.expect("(")
            r = self.ref()
            self.expect(")")
            return S.AddrOf(r, span=t.span)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            if isinstance(e, S.RefExpr) and (self.at(".") or self.at("[") or self.at("as")):
                return S.RefExpr(self.postfix(e.ref), span=e.span)
            return e
        if self._ref_start():
            r = self.ref()
            return S.RefExpr(r, span=t.span)
        self.fail(f"expected an expression, found {self.describe(t)}")

    # -- mapping and slot expressions -------------------------------------

    def _continues_expr(self) -> bool:
        t = self.tok
        return t.kind in ("keyword", "symbol") and t.lexeme in _EXPR_CONTINUATIONS

    def mapping_expr(self):
        t = self.tok
        if self.accept("["):
            pairs = []
            if not self.at("]"):
                while True:
                    k = self.expr()
                    self.expect("=>")
                    pairs.append((k, self.mapping_expr()))
                    if not self.accept(","):
                        break
            self.expect("]")
            return S.MapLit(tuple(pairs), span=t.span)
        if self._ref_start():
            save = self.pos
            try:
                r = self.postfix(self.ref_atom(), allow_update=True)
                if isinstance(r, S.MapUpd):
                    return r
            except _Fail:
                pass
            self.pos = save
        return self.expr()

    def slot_expr(self):
        t = self.tok
        if self.accept("new"):
            name = self.cap_ident().lexeme
            value = None
            if self.accept("{"):
                self.expect("value")
                self.expect(":")
                value = self.slot_expr()
                self.expect("}")
            self.expect("(")
            args = []
            if not self.at(")"):
                while True:
                    args.append(self.slot_expr())
                    if not self.accept(","):
                        break
            self.expect(")")
            return S.New(name, tuple(args), value, span=t.span)
        if self.at("addr") and self.peek().lexeme == "(":
            save = self.pos
            try:
                self.pos += 2
                inner = self.slot_expr()
                self.expect(")")
                if not self._continues_expr():
                    return S.SlotAddr(inner, span=t.span)
            except _Fail:
                pass
            self.pos = save
        m = self.mapping_expr()
        if isinstance(m, S.RefExpr) and not self._continues_expr():
            return S.SlotRef(m.ref, span=m.span)
        return m


def _finish(p: Parser, result):
    if p.tok.kind != "eof":
        raise ParseError([error(f"unexpected {Parser.describe(p.tok)}", p.tok.span, "parse")])
    return result


def parse_spec(source, file: str = "<input>") -> S.Spec:
    """Parse a whole specification from text (or a token list)."""
    tokens = tokenize(source, file) if isinstance(source, str) else source
    return Parser(tokens).spec()


def _parse_with(method: str, source: str, file: str):
    p = Parser(tokenize(source, file))
    try:
        result = getattr(p, method)()
    except _Fail as f:
        raise ParseError([f.diag]) from None
    return _finish(p, result)


def parse_expr(source: str, file: str = "<input>"):
    return _parse_with("expr", source, file)


def parse_ref(source: str, file: str = "<input>"):
    return _parse_with("ref", source, file)


def parse_slot_expr(source: str, file: str = "<input>"):
    return _parse_with("slot_expr", source, file)


def parse_mapping_expr(source: str, file: str = "<input>"):
    return _parse_with("mapping_expr", source, file)


def parse_type(source: str, file: str = "<input>"):
    return _parse_with("slot_type", source, file)


def parse_file(path) -> S.Spec:
    if str(path) == "-":
        return parse_spec(sys.stdin.read(), "<stdin>")
    with open(path, encoding="utf-8") as fh:
        return parse_spec(fh.read(), str(path))
