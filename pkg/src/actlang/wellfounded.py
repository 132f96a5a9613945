"""The contract-reference relation ≺_Σ, its well-foundedness, and ``len``."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, FrozenSet, List, Mapping, Optional, Tuple

from . import syntax as S


@dataclass(frozen=True)
class ContractGraph:
    """Edges ``(B, A)`` meaning ``B ≺ A``: A stores a B or an address_B."""

    nodes: Tuple[str, ...]
    edges: FrozenSet[Tuple[str, str]]

    def preds(self, a: str) -> List[str]:
        """All ``B`` with ``B ≺ a``."""
        return sorted(b for b, x in self.edges if x == a)

    def to_dot(self) -> str:
        lines = ["digraph prec {"]
        for n in self.nodes:
            lines.append(f'  "{n}";')
        for b, a in sorted(self.edges):
            lines.append(f'  "{b}" -> "{a}";')
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_prec(sigma_or_storage) -> ContractGraph:
    storage: Mapping = getattr(sigma_or_storage, "storage", sigma_or_storage)
    edges = set()
    for a, layout in storage.items():
        for _, t in layout:
            if isinstance(t, (S.ContractType, S.ContractAddr)):
                edges.add((t.contract, a))
    nodes = set(storage) | {b for b, _ in edges}
    return ContractGraph(tuple(sorted(nodes)), frozenset(edges))


def check_wf(g: ContractGraph) -> Optional[List[str]]:
    """``None`` when every node is accessible, else a shortest cycle ``[A, B, ..]``.

    On a finite graph accessibility of all nodes is the same as the absence
    of cycles.
    """
    succ: Dict[str, List[str]] = {n: [] for n in g.nodes}
    for b, a in g.edges:
        succ.setdefault(b, []).append(a)
    best: Optional[List[str]] = None
    for start in g.nodes:
        # BFS for the shortest path from start back to itself
        parent = {start: None}
        queue = deque([start])
        found = None
        while queue and found is None:
            n = queue.popleft()
            for m in sorted(succ.get(n, ())):
                if m == start:
                    found = n
                    break
                if m not in parent:
                    parent[m] = n
                    queue.append(m)
        if found is None:
            continue
        path = [found]
        while path[-1] != start:
            path.append(parent[path[-1]])
        cycle = list(reversed(path))
        if best is None or len(cycle) < len(best):
            best = cycle
    return best


def is_wf(g: ContractGraph) -> bool:
    return check_wf(g) is None


def length(sigma_or_storage, t) -> int:
    """``len(Σ, σ)``: longest chain of contract references below ``σ``."""
    g = build_prec(sigma_or_storage)
    if check_wf(g) is not None:
        raise ValueError("len is only defined for a well-founded Σ")
    if isinstance(t, str):
        t = S.ContractType(t)
    if not isinstance(t, (S.ContractType, S.ContractAddr)):
        return 0

    @lru_cache(maxsize=None)
    def go(a: str) -> int:
        return max((1 + go(b) for b in g.preds(a)), default=0)

    return go(t.contract)
