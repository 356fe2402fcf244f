"""Canonical text rendering for smell scripts.

The output is stable: one block per definition separated by blank lines,
two-space indentation, an explicit severity line, and only the parentheses
required to preserve the expression shape. Feeding the result back through
the parser yields a structurally equal script.
"""

from __future__ import annotations

from smellhunter._util import format_number
from smellhunter.dsl.ast import (
    And,
    Compare,
    Expr,
    Literal,
    MetricRef,
    Not,
    Operand,
    Or,
    SmellDefinition,
    SmellScript,
    ThresholdRef,
)

_LEVEL = {Or: 1, And: 2, Not: 3, Compare: 4}


def _operand_text(operand: Operand) -> str:
    if isinstance(operand, MetricRef):
        return operand.name
    if isinstance(operand, ThresholdRef):
        return "$" + operand.name
    if isinstance(operand, Literal):
        return format_number(operand.value)
    raise TypeError(f"not an operand: {operand!r}")


def _child_text(child: Expr, parent_level: int) -> str:
    text = _expr_text(child)
    child_level = _LEVEL[type(child)]
    if child_level > parent_level:
        return text
    # `not not x` needs no parentheses; everything else at the same or a
    # looser binding level does, or re-parsing would reshape the tree.
    if child_level == parent_level and isinstance(child, Not):
        return text
    return f"({text})"


def _expr_text(expr: Expr) -> str:
    if isinstance(expr, Compare):
        lhs = _operand_text(expr.lhs)
        rhs = _operand_text(expr.rhs)
        return f"{lhs} {expr.op.value} {rhs}"
    if isinstance(expr, Not):
        return "not " + _child_text(expr.child, _LEVEL[Not])
    if isinstance(expr, And):
        return " and ".join(_child_text(c, _LEVEL[And]) for c in expr.children)
    if isinstance(expr, Or):
        return " or ".join(_child_text(c, _LEVEL[Or]) for c in expr.children)
    raise TypeError(f"not an expression: {expr!r}")


def _definition_text(definition: SmellDefinition) -> str:
    return (
        f"smell {definition.name} {{\n"
        f"  severity {definition.severity.value}\n"
        f"  when {_expr_text(definition.condition)}\n"
        f"}}"
    )


def pretty_print(script: SmellScript) -> str:
    """Render ``script`` in canonical form, ending with a newline."""
    return "\n\n".join(_definition_text(d) for d in script.definitions) + "\n"
