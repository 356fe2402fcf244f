"""Evaluation of smell conditions against metric values."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from smellhunter.dsl.ast import (
    And,
    Compare,
    Expr,
    Literal,
    MetricRef,
    Not,
    Operand,
    Or,
    Severity,
    SmellScript,
    ThresholdRef,
)
from smellhunter.dsl.thresholds import UnresolvedThresholdError, resolve_thresholds


class UnknownMetricError(Exception):
    """A condition references a metric the row does not provide."""

    def __init__(self, metric: str):
        self.metric = metric
        super().__init__(f"unknown metric: {metric}")


@dataclass(frozen=True, slots=True)
class Detection:
    entity_id: str
    smell_name: str
    severity: Severity


def _operand_value(operand: Operand, metrics: Mapping[str, float]) -> float:
    if isinstance(operand, Literal):
        return operand.value
    if isinstance(operand, MetricRef):
        try:
            return metrics[operand.name]
        except KeyError:
            raise UnknownMetricError(operand.name) from None
    if isinstance(operand, ThresholdRef):
        raise UnresolvedThresholdError((operand.name,))
    raise TypeError(f"not an operand: {operand!r}")


def evaluate(expr: Expr, metrics: Mapping[str, float]) -> bool:
    """Evaluate ``expr`` against one row of metric values.

    Every subexpression is evaluated, so a missing metric raises
    UnknownMetricError no matter where it sits in the condition. Equality
    comparisons are exact floating-point equality.
    """
    if isinstance(expr, Compare):
        lhs = _operand_value(expr.lhs, metrics)
        rhs = _operand_value(expr.rhs, metrics)
        op = expr.op.value
        if op == ">":
            return lhs > rhs
        if op == ">=":
            return lhs >= rhs
        if op == "<":
            return lhs < rhs
        if op == "<=":
            return lhs <= rhs
        if op == "==":
            return lhs == rhs
        return lhs != rhs
    if isinstance(expr, Not):
        return not evaluate(expr.child, metrics)
    if isinstance(expr, And):
        values = [evaluate(child, metrics) for child in expr.children]
        return all(values)
    if isinstance(expr, Or):
        values = [evaluate(child, metrics) for child in expr.children]
        return any(values)
    raise TypeError(f"not an expression: {expr!r}")


def detect(
    script: SmellScript,
    metrics_by_entity: Mapping[str, Mapping[str, float]],
    thresholds: Mapping[str, float],
) -> list[Detection]:
    """Run every definition against every entity and list all matches.

    Thresholds are substituted up front, so an undefined threshold fails
    the whole run before any row is touched. Results are ordered by entity
    first (table order), then by definition order within the script; at
    most one detection is produced per (entity, definition) pair.
    """
    resolved = resolve_thresholds(script, thresholds)
    detections: list[Detection] = []
    for entity_id, metrics in metrics_by_entity.items():
        for definition in resolved.definitions:
            if evaluate(definition.condition, metrics):
                detections.append(
                    Detection(entity_id, definition.name, definition.severity)
                )
    return detections
