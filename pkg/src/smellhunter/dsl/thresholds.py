"""Threshold substitution: rewrite $NAME references into numeric literals."""

from __future__ import annotations

from typing import Mapping

from smellhunter.dsl.ast import (
    And,
    Compare,
    Expr,
    Literal,
    Not,
    Operand,
    Or,
    SmellDefinition,
    SmellScript,
    ThresholdRef,
    iter_operands,
)


class UnresolvedThresholdError(Exception):
    """A script references thresholds the configuration does not define."""

    def __init__(self, missing: tuple[str, ...]):
        self.missing = missing
        names = ", ".join(missing)
        super().__init__(f"undefined thresholds: {names}")


def _substitute_operand(operand: Operand, values: Mapping[str, float]) -> Operand:
    if isinstance(operand, ThresholdRef):
        return Literal(values[operand.name])
    return operand


def _substitute(expr: Expr, values: Mapping[str, float]) -> Expr:
    if isinstance(expr, Compare):
        lhs = _substitute_operand(expr.lhs, values)
        rhs = _substitute_operand(expr.rhs, values)
        if lhs is expr.lhs and rhs is expr.rhs:
            return expr
        return Compare(lhs, expr.op, rhs)
    if isinstance(expr, Not):
        child = _substitute(expr.child, values)
        return expr if child is expr.child else Not(child)
    if isinstance(expr, And):
        children = tuple(_substitute(c, values) for c in expr.children)
        if all(a is b for a, b in zip(children, expr.children)):
            return expr
        return And(children)
    if isinstance(expr, Or):
        children = tuple(_substitute(c, values) for c in expr.children)
        if all(a is b for a, b in zip(children, expr.children)):
            return expr
        return Or(children)
    raise TypeError(f"not an expression: {expr!r}")


def resolve_thresholds(
    script: SmellScript, thresholds: Mapping[str, float]
) -> SmellScript:
    """Return a copy of ``script`` with every $NAME replaced by its value.

    Raises UnresolvedThresholdError listing, in order of first use, every
    referenced name absent from ``thresholds``. The input script is never
    modified; a script without threshold references is returned unchanged.
    """
    missing: list[str] = []
    seen: set[str] = set()
    for definition in script.definitions:
        for operand in iter_operands(definition.condition):
            if isinstance(operand, ThresholdRef) and operand.name not in thresholds:
                if operand.name not in seen:
                    seen.add(operand.name)
                    missing.append(operand.name)
    if missing:
        raise UnresolvedThresholdError(tuple(missing))

    definitions = []
    changed = False
    for definition in script.definitions:
        condition = _substitute(definition.condition, thresholds)
        if condition is not definition.condition:
            changed = True
            definition = SmellDefinition(definition.name, definition.severity, condition)
        definitions.append(definition)
    if not changed:
        return script
    return SmellScript(tuple(definitions))
