"""Lexer and recursive-descent parser for smell scripts.

Grammar (whitespace insignificant, `#` starts a line comment):

    script      := definition+
    definition  := "smell" IDENT "{" ["severity" SEV] "when" expr "}"
    expr        := and_expr ("or" and_expr)*
    and_expr    := unary ("and" unary)*
    unary       := "not" unary | "(" expr ")" | comparison
    comparison  := operand CMP operand
    operand     := IDENT | "$" IDENT | NUMBER
    CMP         := ">" | ">=" | "<" | "<=" | "==" | "!="
    SEV         := "low" | "medium" | "high" | "critical"

`not` binds tighter than `and`, which binds tighter than `or`; comparisons
do not chain. On errors the parser skips ahead to the next `smell` keyword
so several defects can be reported in one pass.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, NamedTuple

from smellhunter.dsl.ast import (
    And,
    CmpOp,
    Compare,
    Expr,
    Literal,
    MetricRef,
    Not,
    Operand,
    Or,
    Severity,
    SmellDefinition,
    SmellScript,
    ThresholdRef,
)


class DiagnosticKind(str, Enum):
    SYNTAX = "syntax"
    DUPLICATE_DEFINITION = "duplicate_definition"
    EMPTY_SCRIPT = "empty_script"


class SourcePosition(NamedTuple):
    line: int
    column: int


@dataclass(frozen=True, slots=True)
class ParseDiagnostic:
    line: int
    column: int
    message: str
    kind: DiagnosticKind

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.message}"


class ScriptParseError(Exception):
    """Raised when a script cannot be parsed; carries all diagnostics."""

    def __init__(self, diagnostics: tuple[ParseDiagnostic, ...]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(str(d) for d in diagnostics))


@dataclass(frozen=True)
class ParsedScript:
    """Parse outcome plus where each metric / threshold name first appears.

    ``script`` is None whenever ``diagnostics`` is non-empty. Reference
    positions cover everything scanned before a syntax error, which lets
    callers cross-check names even for partially broken scripts.
    """

    script: SmellScript | None
    diagnostics: tuple[ParseDiagnostic, ...]
    metric_positions: Mapping[str, SourcePosition]
    threshold_positions: Mapping[str, SourcePosition]

    @property
    def ok(self) -> bool:
        return self.script is not None


class _TokenType(Enum):
    SMELL = "smell"
    SEVERITY = "severity"
    WHEN = "when"
    AND = "and"
    OR = "or"
    NOT = "not"
    IDENT = "identifier"
    NUMBER = "number"
    THRESHOLD = "threshold reference"
    CMP = "comparison operator"
    LBRACE = "'{'"
    RBRACE = "'}'"
    LPAREN = "'('"
    RPAREN = "')'"
    EOF = "end of input"


_KEYWORDS = {
    "smell": _TokenType.SMELL,
    "severity": _TokenType.SEVERITY,
    "when": _TokenType.WHEN,
    "and": _TokenType.AND,
    "or": _TokenType.OR,
    "not": _TokenType.NOT,
}

_SEVERITY_NAMES = {s.value: s for s in Severity}


class _Token(NamedTuple):
    type: _TokenType
    text: str
    line: int
    column: int

    def describe(self) -> str:
        if self.type in (_TokenType.IDENT, _TokenType.NUMBER, _TokenType.CMP):
            return f"'{self.text}'"
        if self.type is _TokenType.THRESHOLD:
            return f"'${self.text}'"
        if self.type in _KEYWORDS.values():
            return f"'{self.text}'"
        return self.type.value


class _ParseFailure(Exception):
    def __init__(self, diagnostic: ParseDiagnostic):
        self.diagnostic = diagnostic
        super().__init__(diagnostic.message)


def _is_ident_start(ch: str) -> bool:
    return ch.isascii() and (ch.isalpha() or ch == "_")


def _is_ident_part(ch: str) -> bool:
    return ch.isascii() and (ch.isalnum() or ch == "_")


class _Lexer:
    def __init__(self, source: str):
        self.source = source
        self.pos = 0
        self.line = 1
        self.column = 1
        self.tokens: list[_Token] = []
        self.diagnostics: list[ParseDiagnostic] = []

    def run(self) -> None:
        while self.pos < len(self.source):
            self._skip_blank()
            if self.pos >= len(self.source):
                break
            ch = self.source[self.pos]
            if _is_ident_start(ch):
                self._read_word()
            elif ch.isdigit() or (ch in "+-" and self._peek(1).isdigit()):
                self._read_number()
            elif ch == "$":
                self._read_threshold()
            else:
                self._read_symbol()
        self.tokens.append(_Token(_TokenType.EOF, "", self.line, self.column))

    def _peek(self, offset: int = 0) -> str:
        pos = self.pos + offset
        return self.source[pos] if pos < len(self.source) else ""

    def _advance(self) -> str:
        ch = self.source[self.pos]
        self.pos += 1
        if ch == "\n":
            self.line += 1
            self.column = 1
        else:
            self.column += 1
        return ch

    def _skip_blank(self) -> None:
        while self.pos < len(self.source):
            ch = self.source[self.pos]
            if ch in " \t\r\n":
                self._advance()
            elif ch == "#":
                while self.pos < len(self.source) and self.source[self.pos] != "\n":
                    self._advance()
            else:
                break

    def _read_word(self) -> None:
        line, column = self.line, self.column
        chars = []
        while self.pos < len(self.source) and _is_ident_part(self.source[self.pos]):
            chars.append(self._advance())
        word = "".join(chars)
        kind = _KEYWORDS.get(word, _TokenType.IDENT)
        self.tokens.append(_Token(kind, word, line, column))

    def _read_number(self) -> None:
        line, column = self.line, self.column
        chars = []
        if self.source[self.pos] in "+-":
            chars.append(self._advance())
        while self.pos < len(self.source) and self.source[self.pos].isdigit():
            chars.append(self._advance())
        if self._peek() == "." and self._peek(1).isdigit():
            chars.append(self._advance())
            while self.pos < len(self.source) and self.source[self.pos].isdigit():
                chars.append(self._advance())
        self.tokens.append(_Token(_TokenType.NUMBER, "".join(chars), line, column))

    def _read_threshold(self) -> None:
        line, column = self.line, self.column
        self._advance()
        if not (self.pos < len(self.source) and _is_ident_start(self.source[self.pos])):
            self._error(line, column, "expected a threshold name after '$'")
            return
        chars = []
        while self.pos < len(self.source) and _is_ident_part(self.source[self.pos]):
            chars.append(self._advance())
        self.tokens.append(_Token(_TokenType.THRESHOLD, "".join(chars), line, column))

    def _read_symbol(self) -> None:
        line, column = self.line, self.column
        ch = self._advance()
        two = ch + self._peek()
        if two in (">=", "<=", "==", "!="):
            self._advance()
            self.tokens.append(_Token(_TokenType.CMP, two, line, column))
        elif ch in "><":
            self.tokens.append(_Token(_TokenType.CMP, ch, line, column))
        elif ch == "{":
            self.tokens.append(_Token(_TokenType.LBRACE, ch, line, column))
        elif ch == "}":
            self.tokens.append(_Token(_TokenType.RBRACE, ch, line, column))
        elif ch == "(":
            self.tokens.append(_Token(_TokenType.LPAREN, ch, line, column))
        elif ch == ")":
            self.tokens.append(_Token(_TokenType.RPAREN, ch, line, column))
        elif ch == "=":
            self._error(line, column, "single '=' is not a comparison; use '=='")
        elif ch == "!":
            self._error(line, column, "single '!' is not an operator; use '!='")
        else:
            self._error(line, column, f"unexpected character {ch!r}")

    def _error(self, line: int, column: int, message: str) -> None:
        self.diagnostics.append(
            ParseDiagnostic(line, column, message, DiagnosticKind.SYNTAX)
        )


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0
        self.diagnostics: list[ParseDiagnostic] = []
        self.metric_positions: dict[str, SourcePosition] = {}
        self.threshold_positions: dict[str, SourcePosition] = {}

    def run(self) -> list[tuple[SmellDefinition, _Token]]:
        definitions: list[tuple[SmellDefinition, _Token]] = []
        while not self._check(_TokenType.EOF):
            try:
                definitions.append(self._definition())
            except _ParseFailure as failure:
                self.diagnostics.append(failure.diagnostic)
                self._recover()
        return definitions

    # -- token plumbing --

    def _peek(self) -> _Token:
        return self.tokens[self.pos]

    def _check(self, kind: _TokenType) -> bool:
        return self._peek().type is kind

    def _advance(self) -> _Token:
        token = self.tokens[self.pos]
        if token.type is not _TokenType.EOF:
            self.pos += 1
        return token

    def _expect(self, kind: _TokenType, what: str) -> _Token:
        token = self._peek()
        if token.type is not kind:
            raise _ParseFailure(
                ParseDiagnostic(
                    token.line,
                    token.column,
                    f"expected {what}, found {token.describe()}",
                    DiagnosticKind.SYNTAX,
                )
            )
        return self._advance()

    def _recover(self) -> None:
        # Skip to the next top-level definition; `smell` is a reserved word
        # so it cannot occur inside a rule body.
        if not self._check(_TokenType.EOF):
            self._advance()
        while not self._check(_TokenType.EOF) and not self._check(_TokenType.SMELL):
            self._advance()

    # -- grammar rules --

    def _definition(self) -> tuple[SmellDefinition, _Token]:
        self._expect(_TokenType.SMELL, "'smell'")
        name = self._expect(_TokenType.IDENT, "a smell name")
        self._expect(_TokenType.LBRACE, "'{'")
        severity = Severity.MEDIUM
        if self._check(_TokenType.SEVERITY):
            self._advance()
            level = self._expect(_TokenType.IDENT, "a severity level")
            try:
                severity = _SEVERITY_NAMES[level.text]
            except KeyError:
                raise _ParseFailure(
                    ParseDiagnostic(
                        level.line,
                        level.column,
                        f"unknown severity '{level.text}'; expected one of "
                        "low, medium, high, critical",
                        DiagnosticKind.SYNTAX,
                    )
                ) from None
        self._expect(_TokenType.WHEN, "'when'")
        condition = self._expr()
        self._expect(_TokenType.RBRACE, "'}'")
        return SmellDefinition(name.text, severity, condition), name

    def _expr(self) -> Expr:
        children = [self._and_expr()]
        while self._check(_TokenType.OR):
            self._advance()
            children.append(self._and_expr())
        return children[0] if len(children) == 1 else Or(tuple(children))

    def _and_expr(self) -> Expr:
        children = [self._unary()]
        while self._check(_TokenType.AND):
            self._advance()
            children.append(self._unary())
        return children[0] if len(children) == 1 else And(tuple(children))

    def _unary(self) -> Expr:
        if self._check(_TokenType.NOT):
            self._advance()
            return Not(self._unary())
        if self._check(_TokenType.LPAREN):
            self._advance()
            inner = self._expr()
            self._expect(_TokenType.RPAREN, "')'")
            return inner
        return self._comparison()

    def _comparison(self) -> Expr:
        lhs = self._operand()
        op = self._expect(_TokenType.CMP, "a comparison operator")
        rhs = self._operand()
        if self._check(_TokenType.CMP):
            nxt = self._peek()
            raise _ParseFailure(
                ParseDiagnostic(
                    nxt.line,
                    nxt.column,
                    "comparisons do not chain; combine them with 'and'",
                    DiagnosticKind.SYNTAX,
                )
            )
        return Compare(lhs, CmpOp(op.text), rhs)

    def _operand(self) -> Operand:
        token = self._peek()
        if token.type is _TokenType.IDENT:
            self._advance()
            self.metric_positions.setdefault(
                token.text, SourcePosition(token.line, token.column)
            )
            return MetricRef(token.text)
        if token.type is _TokenType.THRESHOLD:
            self._advance()
            self.threshold_positions.setdefault(
                token.text, SourcePosition(token.line, token.column)
            )
            return ThresholdRef(token.text)
        if token.type is _TokenType.NUMBER:
            self._advance()
            return Literal(float(token.text))
        raise _ParseFailure(
            ParseDiagnostic(
                token.line,
                token.column,
                f"expected a metric, threshold reference, or number, "
                f"found {token.describe()}",
                DiagnosticKind.SYNTAX,
            )
        )


def inspect_script(source: str) -> ParsedScript:
    """Parse ``source``, collecting every diagnostic instead of raising.

    Reports all syntax errors reachable by skipping to the next definition,
    every duplicate definition name, and flags empty scripts.
    """
    lexer = _Lexer(source)
    lexer.run()
    parser = _Parser(lexer.tokens)
    named = parser.run()
    diagnostics = list(lexer.diagnostics) + parser.diagnostics

    seen: set[str] = set()
    for definition, token in named:
        if definition.name in seen:
            diagnostics.append(
                ParseDiagnostic(
                    token.line,
                    token.column,
                    f"smell '{definition.name}' is defined more than once",
                    DiagnosticKind.DUPLICATE_DEFINITION,
                )
            )
        seen.add(definition.name)

    if not named and not diagnostics:
        diagnostics.append(
            ParseDiagnostic(1, 1, "script defines no smells", DiagnosticKind.EMPTY_SCRIPT)
        )

    diagnostics.sort(key=lambda d: (d.line, d.column))
    script = None
    if not diagnostics:
        script = SmellScript(tuple(definition for definition, _ in named))
    return ParsedScript(
        script=script,
        diagnostics=tuple(diagnostics),
        metric_positions=dict(parser.metric_positions),
        threshold_positions=dict(parser.threshold_positions),
    )


def parse_script(source: str) -> SmellScript:
    """Parse ``source`` into a script, raising ScriptParseError on any defect."""
    parsed = inspect_script(source)
    if parsed.script is None:
        raise ScriptParseError(parsed.diagnostics)
    return parsed.script
