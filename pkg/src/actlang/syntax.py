"""Abstract syntax of act specifications.

All nodes are frozen dataclasses.  Source spans and type annotations are
excluded from equality, so two trees compare equal exactly when they are
syntactically identical.  Annotations are empty after parsing and filled in
by :mod:`actlang.typecheck`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

VALID_WIDTHS = frozenset(range(8, 257, 8))


@dataclass(frozen=True)
class Span:
    file: str
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}"


def _span():
    return field(default=None, compare=False, repr=False)


def _annot():
    return field(default=None, compare=False, repr=False)


# --------------------------------------------------------------------------
# Types


@dataclass(frozen=True)
class IntType:
    """``uintM``, ``intM`` or the unbounded ``int`` (``bits is None``)."""

    signed: bool
    bits: Optional[int] = None

    def __post_init__(self):
        if self.bits is None:
            if not self.signed:
                raise ValueError("unbounded integer type must be signed")
        elif self.bits not in VALID_WIDTHS:
            raise ValueError(f"invalid integer width {self.bits}")

    @property
    def is_math(self) -> bool:
        return self.bits is None

    @property
    def min(self) -> Optional[int]:
        if self.bits is None:
            return None
        return -(2 ** (self.bits - 1)) if self.signed else 0

    @property
    def max(self) -> Optional[int]:
        if self.bits is None:
            return None
        return 2 ** (self.bits - 1) - 1 if self.signed else 2**self.bits - 1

    def contains(self, n: int) -> bool:
        if self.bits is None:
            return True
        return self.min <= n <= self.max

    def __str__(self) -> str:
        if self.bits is None:
            return "int"
        return f"{'int' if self.signed else 'uint'}{self.bits}"


@dataclass(frozen=True)
class BoolType:
    def __str__(self) -> str:
        return "bool"


@dataclass(frozen=True)
class AddressType:
    def __str__(self) -> str:
        return "address"


@dataclass(frozen=True)
class MappingType:
    key: "BaseType"
    value: "MuType"

    def __str__(self) -> str:
        return f"mapping({self.key} => {self.value})"


@dataclass(frozen=True)
class ContractAddr:
    """``address_A``: an address known to hold an instance of ``A``."""

    contract: str

    def __str__(self) -> str:
        return f"address_{self.contract}"


@dataclass(frozen=True)
class ContractType:
    """A storage slot holding (a reference to) an instance of a contract."""

    contract: str

    def __str__(self) -> str:
        return self.contract


BaseType = Union[IntType, BoolType, AddressType]
MuType = Union[BaseType, MappingType]
AbiType = Union[BaseType, ContractAddr]
SlotType = Union[MuType, ContractAddr, ContractType]

BOOL = BoolType()
ADDRESS = AddressType()
INT = IntType(True, None)
UINT256 = IntType(False, 256)


def uint(bits: int) -> IntType:
    return IntType(False, bits)


def sint(bits: int) -> IntType:
    return IntType(True, bits)


def is_base(t) -> bool:
    return isinstance(t, (IntType, BoolType, AddressType))


def is_mu(t) -> bool:
    return is_base(t) or isinstance(t, MappingType)


def is_abi(t) -> bool:
    return is_base(t) or isinstance(t, ContractAddr)


def referenced_contract(t) -> Optional[str]:
    if isinstance(t, (ContractAddr, ContractType)):
        return t.contract
    return None


# --------------------------------------------------------------------------
# References

ENV_VARS = ("caller", "origin", "callvalue", "this")


@dataclass(frozen=True)
class Var:
    name: str
    annot: Optional[SlotType] = _annot()
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Pre:
    name: str
    annot: Optional[SlotType] = _annot()
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Post:
    name: str
    annot: Optional[SlotType] = _annot()
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Coerce:
    inner: "Ref"
    contract: str
    annot: Optional[SlotType] = _annot()
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Field:
    inner: "Ref"
    name: str
    annot: Optional[SlotType] = _annot()
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Index:
    inner: "Ref"
    key: "Expr"
    annot: Optional[SlotType] = _annot()
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class EnvRef:
    var: str
    annot: Optional[SlotType] = _annot()
    span: Optional[Span] = _span()

    def __post_init__(self):
        if self.var not in ENV_VARS:
            raise ValueError(f"unknown environment variable {self.var!r}")


Ref = Union[Var, Pre, Post, Coerce, Field, Index, EnvRef]
REF_TYPES = (Var, Pre, Post, Coerce, Field, Index, EnvRef)

# --------------------------------------------------------------------------
# Expressions

INT_OPS = ("+", "-", "*", "div", "mod", "exp")
BOOL_OPS = ("and", "or", "==>")
CMP_OPS = ("<", "<=", ">=", ">")


@dataclass(frozen=True)
class IntLit:
    value: int
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class BoolLit:
    value: bool
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class RefExpr:
    ref: Ref
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class AddrOf:
    ref: Ref
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class BinI:
    op: str
    left: "Expr"
    right: "Expr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class BinB:
    op: str
    left: "Expr"
    right: "Expr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Cmp:
    op: str
    left: "Expr"
    right: "Expr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Not:
    operand: "Expr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class InRange:
    type: IntType
    operand: "Expr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Ite:
    cond: "Expr"
    then: "Expr"
    orelse: "Expr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Eq:
    left: "Expr"
    right: "Expr"
    span: Optional[Span] = _span()


Expr = Union[IntLit, BoolLit, RefExpr, AddrOf, BinI, BinB, Cmp, Not, InRange, Ite, Eq]
EXPR_TYPES = (IntLit, BoolLit, RefExpr, AddrOf, BinI, BinB, Cmp, Not, InRange, Ite, Eq)

# --------------------------------------------------------------------------
# Mapping and slot expressions.  A plain Expr is itself a mapping expression,
# and a mapping expression is itself a slot expression.


@dataclass(frozen=True)
class MapLit:
    pairs: Tuple[Tuple[Expr, "MappingExpr"], ...]
    annot: Optional[MappingType] = _annot()
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class MapUpd:
    base: Ref
    pairs: Tuple[Tuple[Expr, "MappingExpr"], ...]
    annot: Optional[MappingType] = _annot()
    span: Optional[Span] = _span()


MappingExpr = Union[Expr, MapLit, MapUpd]


@dataclass(frozen=True)
class New:
    contract: str
    args: Tuple["SlotExpr", ...]
    value: Optional["SlotExpr"] = None
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class SlotRef:
    ref: Ref
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class SlotAddr:
    inner: "SlotExpr"
    span: Optional[Span] = _span()


SlotExpr = Union[MappingExpr, New, SlotRef, SlotAddr]

# --------------------------------------------------------------------------
# Declarations


@dataclass(frozen=True)
class Param:
    name: str
    type: AbiType
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Create:
    type: SlotType
    name: str
    rhs: SlotExpr
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Update:
    target: Ref
    rhs: SlotExpr
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class CtorCase:
    cond: Expr
    creates: Tuple[Create, ...]
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class TransCase:
    cond: Expr
    updates: Tuple[Update, ...]
    returns: Optional[Expr] = None
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Constructor:
    iface: Tuple[Param, ...]
    payable: bool
    iff: Tuple[Expr, ...]
    cases: Tuple[CtorCase, ...]
    ensures: Tuple[Expr, ...]
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Transition:
    name: str
    iface: Tuple[Param, ...]
    payable: bool
    ret_type: Optional[AbiType]
    iff: Tuple[Expr, ...]
    cases: Tuple[TransCase, ...]
    ensures: Tuple[Expr, ...]
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Contract:
    name: str
    ctor: Constructor
    transitions: Tuple[Transition, ...]
    invariants: Tuple[Expr, ...]
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Spec:
    contracts: Tuple[Contract, ...]


# --------------------------------------------------------------------------
# Small constructors used by the checker when building obligations


def conj(exprs) -> Expr:
    exprs = list(exprs)
    if not exprs:
        return BoolLit(True)
    out = exprs[0]
    for e in exprs[1:]:
        out = BinB("and", out, e)
    return out


def disj(exprs) -> Expr:
    exprs = list(exprs)
    if not exprs:
        return BoolLit(False)
    out = exprs[0]
    for e in exprs[1:]:
        out = BinB("or", out, e)
    return out


def ref_root(ref: Ref) -> Ref:
    while isinstance(ref, (Coerce, Field, Index)):
        ref = ref.inner
    return ref


def strictly_more_specific(r1: Ref, r2: Ref) -> bool:
    """``r1`` extends ``r2`` by one or more field selections."""
    while isinstance(r1, Field):
        r1 = r1.inner
        if r1 == r2:
            return True
    return False


def at_least_as_specific(r1: Ref, r2: Ref) -> bool:
    return r1 == r2 or strictly_more_specific(r1, r2)


# --------------------------------------------------------------------------
# Pretty printing

_PREC = {
    "==>": 1,
    "or": 2,
    "and": 3,
    "=": 4,
    "<": 5,
    "<=": 5,
    ">=": 5,
    ">": 5,
    "+": 6,
    "-": 6,
    "*": 7,
    "div": 7,
    "mod": 7,
    "exp": 8,
}
_RIGHT_ASSOC = {"==>", "exp"}
_NOT_PREC = 9
_ATOM_PREC = 10


def _expr_prec(e) -> int:
    if isinstance(e, (BinI, BinB, Cmp)):
        return _PREC[e.op]
    if isinstance(e, Eq):
        return _PREC["="]
    if isinstance(e, Not):
        return _NOT_PREC
    if isinstance(e, Ite):
        return 0
    return _ATOM_PREC


def _binary(op: str, left, right) -> str:
    p = _PREC[op]
    lp, rp = _expr_prec(left), _expr_prec(right)
    ls, rs = pretty_expr(left), pretty_expr(right)
    if op in _RIGHT_ASSOC:
        if lp <= p:
            ls = f"({ls})"
        if rp < p:
            rs = f"({rs})"
    else:
        if lp < p:
            ls = f"({ls})"
        if rp <= p:
            rs = f"({rs})"
    return f"{ls} {op} {rs}"


def pretty_ref(ref: Ref) -> str:
    if isinstance(ref, Var):
        return ref.name
    if isinstance(ref, Pre):
        return f"pre({ref.name})"
    if isinstance(ref, Post):
        return f"post({ref.name})"
    if isinstance(ref, EnvRef):
        return ref.var
    if isinstance(ref, Coerce):
        return f"{_postfix_base(ref.inner)} as {ref.contract}"
    if isinstance(ref, Field):
        return f"{_postfix_base(ref.inner)}.{ref.name}"
    if isinstance(ref, Index):
        return f"{_postfix_base(ref.inner)}[{pretty_expr(ref.key)}]"
    raise TypeError(f"not a reference: {ref!r}")


def _postfix_base(ref: Ref) -> str:
    s = pretty_ref(ref)
    return f"({s})" if isinstance(ref, Coerce) else s


def pretty_expr(e) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, RefExpr):
        return pretty_ref(e.ref)
    if isinstance(e, AddrOf):
        return f"addr({pretty_ref(e.ref)})"
    if isinstance(e, (BinI, BinB, Cmp)):
        return _binary(e.op, e.left, e.right)
    if isinstance(e, Eq):
        return _binary("=", e.left, e.right)
    if isinstance(e, Not):
        s = pretty_expr(e.operand)
        if _expr_prec(e.operand) < _NOT_PREC:
            s = f"({s})"
        return f"not {s}"
    if isinstance(e, InRange):
        return f"inrange({e.type}, {pretty_expr(e.operand)})"
    if isinstance(e, Ite):
        return (
            f"if {pretty_expr(e.cond)} then {pretty_expr(e.then)} "
            f"else {pretty_expr(e.orelse)}"
        )
    raise TypeError(f"not an expression: {e!r}")


def _pairs(pairs) -> str:
    return ", ".join(f"{pretty_expr(k)} => {pretty_mapping(v)}" for k, v in pairs)


def pretty_mapping(m) -> str:
    if isinstance(m, MapLit):
        return f"[{_pairs(m.pairs)}]"
    if isinstance(m, MapUpd):
        return f"{_postfix_base(m.base)}[{_pairs(m.pairs)}]"
    return pretty_expr(m)


def pretty_slot(se) -> str:
    if isinstance(se, New):
        value = f"{{value: {pretty_slot(se.value)}}}" if se.value is not None else ""
        args = ", ".join(pretty_slot(a) for a in se.args)
        return f"new {se.contract}{value}({args})"
    if isinstance(se, SlotRef):
        return pretty_ref(se.ref)
    if isinstance(se, SlotAddr):
        return f"addr({pretty_slot(se.inner)})"
    return pretty_mapping(se)


def _params(params) -> str:
    return ", ".join(f"{p.name}: {p.type}" for p in params)


def _exprs(exprs) -> str:
    return ", ".join(pretty_expr(e) for e in exprs)


def pretty_contract(c: Contract) -> str:
    out = [f"contract {c.name} {{"]
    ctor = c.ctor
    out.append(f"  constructor({_params(ctor.iface)})" + (" payable" if ctor.payable else ""))
    if ctor.iff:
        out.append(f"  iff {_exprs(ctor.iff)}")
    for case in ctor.cases:
        out.append(f"  case {pretty_expr(case.cond)}:")
        items = [f"{cr.type} {cr.name} := {pretty_slot(cr.rhs)}" for cr in case.creates]
        if items:
            out.append("    creates " + ",\n            ".join(items))
    if ctor.ensures:
        out.append(f"  ensures {_exprs(ctor.ensures)}")
    for t in c.transitions:
        head = f"  transition {t.name}({_params(t.iface)})"
        if t.payable:
            head += " payable"
        if t.ret_type is not None:
            head += f" : {t.ret_type}"
        out.append("")
        out.append(head)
        if t.iff:
            out.append(f"  iff {_exprs(t.iff)}")
        for case in t.cases:
            out.append(f"  case {pretty_expr(case.cond)}:")
            items = [f"{pretty_ref(u.target)} := {pretty_slot(u.rhs)}" for u in case.updates]
            if items:
                out.append("    updates " + ",\n            ".join(items))
            if case.returns is not None:
                out.append(f"    returns {pretty_expr(case.returns)}")
        if t.ensures:
            out.append(f"  ensures {_exprs(t.ensures)}")
    if c.invariants:
        out.append("")
        out.append(f"  invariants {_exprs(c.invariants)}")
    out.append("}")
    return "\n".join(out)


def pretty(node) -> str:
    """Render any AST node (or type) as concrete act syntax."""
    if isinstance(node, Spec):
        return "\n\n".join(pretty_contract(c) for c in node.contracts) + ("\n" if node.contracts else "")
    if isinstance(node, Contract):
        return pretty_contract(node)
    if isinstance(node, REF_TYPES):
        return pretty_ref(node)
    if isinstance(node, EXPR_TYPES):
        return pretty_expr(node)
    if isinstance(node, (MapLit, MapUpd, New, SlotRef, SlotAddr)):
        return pretty_slot(node)
    if isinstance(node, Create):
        return f"{node.type} {node.name} := {pretty_slot(node.rhs)}"
    if isinstance(node, Update):
        return f"{pretty_ref(node.target)} := {pretty_slot(node.rhs)}"
    if isinstance(node, (IntType, BoolType, AddressType, MappingType, ContractAddr, ContractType)):
        return str(node)
    raise TypeError(f"cannot pretty-print {type(node).__name__}")
