"""Bounded reachability and contract-level checks.

States reachable from the empty store within ``max_depth`` steps are
explored breadth first, so every reported trace is a shortest one among the
explored states.  A passing report only speaks for the explored bound.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .bounds import DEFAULT_BOUNDS, BoundsConfig
from .semantics import EvalError, Edge, Label, eval_expr, step
from .sigma import TypingState
from .values import Addr, State, Timed, state_to_json, value_to_json
from .valuetyping import store_well_typed, typed_locations

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ExploreConfig:
    max_depth: int = 3
    max_states: int = 10_000
    bounds: BoundsConfig = DEFAULT_BOUNDS
    check_typing: bool = True

    def __post_init__(self):
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if self.max_states < 1:
            raise ValueError("max_states must be >= 1")


@dataclass
class Exploration:
    states: Dict[str, State]
    depth: Dict[str, int]
    parent: Dict[str, Optional[Tuple[str, Label]]]
    edges: List[Tuple[str, Edge]]
    truncated: bool = False
    typing_violations: List[Tuple[str, str]] = field(default_factory=list)

    def trace(self, fp: str) -> List[Label]:
        """Labels leading from the empty state to ``fp``."""
        out = []
        while self.parent[fp] is not None:
            fp, lab = self.parent[fp]
            out.append(lab)
        return out[::-1]

    def ordered(self) -> List[Tuple[str, State]]:
        return sorted(self.states.items(), key=lambda kv: (self.depth[kv[0]], kv[0]))


def explore(sigma: TypingState, cfg: ExploreConfig = ExploreConfig()) -> Exploration:
    root = State()
    fp0 = root.fingerprint()
    ex = Exploration({fp0: root}, {fp0: 0}, {fp0: None}, [])
    queue = deque([fp0])
    if cfg.check_typing:
        _assert_typed(sigma, ex, fp0, root)
    while queue:
        fp = queue.popleft()
        s = ex.states[fp]
        # successors of frontier states are still needed for post checks
        for e in step(sigma, s, cfg.bounds):
            ex.edges.append((fp, e))
            if ex.depth[fp] >= cfg.max_depth:
                ex.truncated = True
                continue
            nfp = e.post.fingerprint()
            if nfp in ex.states:
                continue
            if len(ex.states) >= cfg.max_states:
                ex.truncated = True
                continue
            ex.states[nfp] = e.post
            ex.depth[nfp] = ex.depth[fp] + 1
            ex.parent[nfp] = (fp, e.label)
            if cfg.check_typing:
                _assert_typed(sigma, ex, nfp, e.post)
            queue.append(nfp)
    return ex


def _assert_typed(sigma, ex, fp, s):
    res = store_well_typed(sigma, s)
    if not res:
        ex.typing_violations.append((fp, res.describe()))


@dataclass
class Violation:
    kind: str  # "invariant" | "ctor-post" | "trans-post" | "stuck" | "typing"
    contract: str
    what: str
    index: int
    trace: List[Label]
    loc: Optional[int]
    state: State
    env: Dict[str, object] = field(default_factory=dict)
    message: str = ""

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "contract": self.contract,
            "what": self.what,
            "index": self.index,
            "loc": self.loc,
            "env": {k: value_to_json(v) for k, v in sorted(self.env.items())},
            "trace": [lab.to_json() for lab in self.trace],
            "state": state_to_json(self.state),
            "message": self.message,
        }

    def describe(self) -> str:
        steps = "\n".join(f"    {i + 1}. {lab.describe()}" for i, lab in enumerate(self.trace)) or "    (empty)"
        where = f" at @{self.loc}" if self.loc is not None else ""
        msg = f": {self.message}" if self.message else ""
        return f"{self.kind} {self.contract}.{self.what}#{self.index}{where}{msg}\n  trace ({len(self.trace)} steps):\n{steps}"


def _eval_check(s, rho, loc, e) -> Optional[str]:
    """``None`` if ``e`` is True, else ``"false"`` or the stuck message."""
    try:
        return None if eval_expr(s, rho, loc, e) is True else "false"
    except EvalError as exc:
        return f"stuck: {exc}"


def check_invariants(sigma: TypingState, contract: str, ex: Exploration, invariants) -> List[Violation]:
    out = []
    for fp, s in ex.ordered():
        for loc in typed_locations(sigma, s, contract):
            for i, inv in enumerate(invariants):
                res = _eval_check(s, {}, loc, inv)
                if res is not None:
                    kind = "invariant" if res == "false" else "stuck"
                    out.append(Violation(kind, contract, "invariant", i, ex.trace(fp), loc.n, s, {}, res))
    return out


def _edges_by_depth(ex: Exploration):
    return sorted(ex.edges, key=lambda pe: (ex.depth[pe[0]], pe[0]))


def check_ctor_post(sigma: TypingState, contract: str, ex: Exploration) -> List[Violation]:
    ensures = sigma.cnstr[contract].ensures
    out = []
    if not ensures:
        return out
    for fp, e in _edges_by_depth(ex):
        lab = e.label
        if lab.kind != "ctor" or lab.contract != contract:
            continue
        for i, post in enumerate(ensures):
            res = _eval_check(e.post, lab.rho, Addr(lab.loc), post)
            if res is not None:
                kind = "ctor-post" if res == "false" else "stuck"
                out.append(Violation(kind, contract, "constructor", i, ex.trace(fp) + [lab], lab.loc, e.post, lab.rho, res))
    return out


def check_trans_post(sigma: TypingState, contract: str, ex: Exploration) -> List[Violation]:
    out = []
    for fp, e in _edges_by_depth(ex):
        lab = e.label
        if lab.kind != "trans" or lab.contract != contract:
            continue
        t = sigma.transition(contract, lab.name)
        for i, post in enumerate(t.ensures):
            res = _eval_check(Timed(e.pre, e.post), lab.rho, Addr(lab.loc), post)
            if res is not None:
                kind = "trans-post" if res == "false" else "stuck"
                out.append(Violation(kind, contract, lab.name, i, ex.trace(fp) + [lab], lab.loc, e.post, lab.rho, res))
    return out


@dataclass
class ContractReport:
    contract: str
    invariants: List[Violation]
    ctor_post: List[Violation]
    trans_post: List[Violation]

    @property
    def ok(self) -> bool:
        return not (self.invariants or self.ctor_post or self.trans_post)

    def violations(self) -> List[Violation]:
        return self.invariants + self.ctor_post + self.trans_post

    def to_json(self) -> dict:
        return {
            "contract": self.contract,
            "ok": self.ok,
            "invariants": [v.to_json() for v in self.invariants],
            "ctorPost": [v.to_json() for v in self.ctor_post],
            "transPost": [v.to_json() for v in self.trans_post],
        }


@dataclass
class Report:
    contracts: List[ContractReport]
    states: int
    max_depth: int
    truncated: bool
    typing_violations: List[Tuple[str, str]]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.contracts) and not self.typing_violations

    def to_json(self) -> dict:
        return {
            "schemaVersion": SCHEMA_VERSION,
            "ok": self.ok,
            "bound": {"maxDepth": self.max_depth, "states": self.states, "truncated": self.truncated},
            "typingViolations": [{"state": fp, "reason": r} for fp, r in self.typing_violations],
            "contracts": [c.to_json() for c in self.contracts],
        }

    def describe(self) -> str:
        lines = [f"bound: {self.max_depth} (states explored: {self.states}{', truncated' if self.truncated else ''})"]
        for c in self.contracts:
            lines.append(f"{c.contract}: {'True within bound' if c.ok else 'False'}")
            for v in c.violations():
                lines.append("  " + v.describe().replace("\n", "\n  "))
        for fp, r in self.typing_violations:
            lines.append(f"ill-typed reachable store {fp[:12]}: {r}")
        return "\n".join(lines)


def check_contract(sigma: TypingState, contract: str, ex: Exploration, invariants=()) -> ContractReport:
    return ContractReport(
        contract,
        check_invariants(sigma, contract, ex, invariants),
        check_ctor_post(sigma, contract, ex),
        check_trans_post(sigma, contract, ex),
    )


def verify(sigma: TypingState, spec, cfg: ExploreConfig = ExploreConfig()) -> Report:
    """Explore once and check every contract of a type-checked ``spec``."""
    ex = explore(sigma, cfg)
    reports = [check_contract(sigma, c.name, ex, c.invariants) for c in spec.contracts]
    return Report(reports, len(ex.states), cfg.max_depth, ex.truncated, ex.typing_violations)
