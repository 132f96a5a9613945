from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, List, Optional

from .syntax import Span


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    message: str
    span: Optional[Span] = None
    rule: Optional[str] = None

    def format(self) -> str:
        where = str(self.span) if self.span is not None else "<unknown>"
        rule = f" [{self.rule}]" if self.rule else ""
        return f"{where}: {self.severity}{rule}: {self.message}"

    def to_json(self) -> dict:
        return {
            "severity": self.severity,
            "message": self.message,
            "file": self.span.file if self.span else None,
            "line": self.span.line if self.span else None,
            "col": self.span.col if self.span else None,
            "rule": self.rule,
        }


class ActError(Exception):
    """Raised with one or more error diagnostics attached."""

    def __init__(self, diagnostics: Iterable[Diagnostic]):
        self.diagnostics: List[Diagnostic] = list(diagnostics)
        super().__init__("\n".join(d.format() for d in self.diagnostics))


class LexError(ActError):
    pass


class ParseError(ActError):
    pass


class TypeCheckError(ActError):
    @property
    def rule(self) -> Optional[str]:
        return self.diagnostics[0].rule if self.diagnostics else None


def error(message: str, span: Optional[Span] = None, rule: Optional[str] = None) -> Diagnostic:
    return Diagnostic("error", message, span, rule)


def format_human(diags: Iterable[Diagnostic]) -> str:
    return "\n".join(d.format() for d in diags)


def format_json(diags: Iterable[Diagnostic]) -> str:
    return json.dumps([d.to_json() for d in diags], indent=2)
