"""actlang: parser, type checker, interpreter and bounded verifier for act specifications."""

from .bounds import BoundsConfig
from .diagnostics import ActError, Diagnostic, LexError, ParseError, TypeCheckError
from .entailment import Counterexample, Unknown, ValidWithinBounds, discharge, enumerate_contexts, export_obligation
from .parser import parse_expr, parse_file, parse_ref, parse_slot_expr, parse_spec, parse_type, tokenize
from .semantics import (EvalError, MultipleCasesMatched, NoCaseMatched, PreconditionFailed, ResourceLimit, Stuck,
                        eval_ctor, eval_expr, eval_ref, eval_slot, eval_trans, step)
from .sigma import EMPTY_SIGMA, TypingState
from .syntax import pretty
from .typecheck import CheckResult, Obligation, check_spec
from .values import UNIT, Addr, MapVal, State, Timed
from .valuetyping import env_has_iface, loc_has_contract, store_well_typed, value_has_sigma
from .verifier import ExploreConfig, Report, check_contract, explore, verify
from .wellfounded import build_prec, check_wf, length

__version__ = "0.1.0"
