"""Smell rule language: AST, parser, printer, threshold resolution, evaluation."""

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
    referenced_metrics,
    referenced_thresholds,
)
from smellhunter.dsl.interpreter import Detection, UnknownMetricError, detect, evaluate
from smellhunter.dsl.parser import (
    DiagnosticKind,
    ParseDiagnostic,
    ParsedScript,
    ScriptParseError,
    SourcePosition,
    inspect_script,
    parse_script,
)
from smellhunter.dsl.printer import pretty_print
from smellhunter.dsl.thresholds import UnresolvedThresholdError, resolve_thresholds

__all__ = [
    "And",
    "CmpOp",
    "Compare",
    "Detection",
    "DiagnosticKind",
    "Expr",
    "Literal",
    "MetricRef",
    "Not",
    "Operand",
    "Or",
    "ParseDiagnostic",
    "ParsedScript",
    "ScriptParseError",
    "Severity",
    "SmellDefinition",
    "SmellScript",
    "SourcePosition",
    "ThresholdRef",
    "UnknownMetricError",
    "UnresolvedThresholdError",
    "detect",
    "evaluate",
    "inspect_script",
    "parse_script",
    "pretty_print",
    "referenced_metrics",
    "referenced_thresholds",
    "resolve_thresholds",
]
