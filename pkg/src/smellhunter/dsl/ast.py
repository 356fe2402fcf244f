"""Immutable syntax tree for smell rules.

A script is an ordered list of smell definitions; each definition carries a
severity and a boolean condition over metric values, named thresholds, and
numeric literals.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Union

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class Severity(str, Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"
    CRITICAL = "critical"


class CmpOp(str, Enum):
    GT = ">"
    GE = ">="
    LT = "<"
    LE = "<="
    EQ = "=="
    NE = "!="


def _require_ident(name: str) -> None:
    if not IDENT_RE.match(name):
        raise ValueError(f"not a valid identifier: {name!r}")


@dataclass(frozen=True, slots=True)
class MetricRef:
    name: str

    def __post_init__(self) -> None:
        _require_ident(self.name)


@dataclass(frozen=True, slots=True)
class ThresholdRef:
    name: str

    def __post_init__(self) -> None:
        _require_ident(self.name)


@dataclass(frozen=True, slots=True)
class Literal:
    value: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", float(self.value))
        if not math.isfinite(self.value):
            raise ValueError("literal must be finite")


Operand = Union[MetricRef, ThresholdRef, Literal]


@dataclass(frozen=True, slots=True)
class Compare:
    lhs: Operand
    op: CmpOp
    rhs: Operand


@dataclass(frozen=True, slots=True)
class Not:
    child: "Expr"


@dataclass(frozen=True, slots=True)
class And:
    children: tuple["Expr", ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "children", tuple(self.children))
        if len(self.children) < 2:
            raise ValueError("'and' needs at least two operands")


@dataclass(frozen=True, slots=True)
class Or:
    children: tuple["Expr", ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "children", tuple(self.children))
        if len(self.children) < 2:
            raise ValueError("'or' needs at least two operands")


Expr = Union[Or, And, Not, Compare]


@dataclass(frozen=True, slots=True)
class SmellDefinition:
    name: str
    severity: Severity
    condition: Expr

    def __post_init__(self) -> None:
        _require_ident(self.name)


@dataclass(frozen=True, slots=True)
class SmellScript:
    definitions: tuple[SmellDefinition, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "definitions", tuple(self.definitions))
        if not self.definitions:
            raise ValueError("script has no smell definitions")
        seen: set[str] = set()
        for definition in self.definitions:
            if definition.name in seen:
                raise ValueError(f"duplicate smell definition: {definition.name}")
            seen.add(definition.name)


def iter_operands(expr: Expr) -> Iterator[Operand]:
    if isinstance(expr, Compare):
        yield expr.lhs
        yield expr.rhs
    elif isinstance(expr, Not):
        yield from iter_operands(expr.child)
    else:
        for child in expr.children:
            yield from iter_operands(child)


def referenced_metrics(script: SmellScript) -> frozenset[str]:
    names = {
        operand.name
        for definition in script.definitions
        for operand in iter_operands(definition.condition)
        if isinstance(operand, MetricRef)
    }
    return frozenset(names)


def referenced_thresholds(script: SmellScript) -> frozenset[str]:
    names = {
        operand.name
        for definition in script.definitions
        for operand in iter_operands(definition.condition)
        if isinstance(operand, ThresholdRef)
    }
    return frozenset(names)
