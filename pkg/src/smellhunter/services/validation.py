"""Request validation: the gate between accepting a request and running it.

Four checks run, and all of them run even when an early one fails, so one
report lists everything wrong with a request:

  * the script parses,
  * every threshold the script references is configured,
  * every metric the script references is a table column,
  * the context metadata invariants hold.

Rejection is a value: validate() returns either a ValidatedRequest or a
ValidationReport, and the service turns those into ValidationCompleted or
ValidationFailed events.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass

from smellhunter.bus import EventEnvelope, EventKind, SmellBus
from smellhunter.dsl.ast import SmellScript
from smellhunter.dsl.parser import inspect_script
from smellhunter.inputs import (
    AnalysisRequest,
    ContextMetadata,
    MetricTable,
    ThresholdConfig,
    context_metadata_problems,
)

logger = logging.getLogger(__name__)

_FIRST_SMELL_RE = re.compile(r"\bsmell\s+([A-Za-z_][A-Za-z0-9_]*)")


@dataclass(frozen=True, slots=True)
class ValidationDiagnostic:
    """One reason a request cannot run.

    ``source`` names the failing check: "script" for parse errors,
    "thresholds" and "metrics" for dangling references, "metadata" for
    invariant violations, "internal" for faults inside validation itself.
    ``position`` is "line:column" in the script where that applies.
    """

    source: str
    detail: str
    position: str | None = None

    def __str__(self) -> str:
        where = f" at {self.position}" if self.position else ""
        return f"[{self.source}{where}] {self.detail}"


@dataclass(frozen=True, slots=True)
class ValidationReport:
    """Why a request was rejected; never empty."""

    diagnostics: tuple[ValidationDiagnostic, ...]

    def __post_init__(self) -> None:
        if not self.diagnostics:
            raise ValueError("a validation report needs at least one diagnostic")


@dataclass(frozen=True)
class ValidatedRequest:
    """A request that passed every check, with the script parsed."""

    script: SmellScript
    metrics: MetricTable
    thresholds: ThresholdConfig
    metadata: ContextMetadata


@dataclass(frozen=True)
class ValidationFailure:
    """Payload of a ValidationFailed event."""

    report: ValidationReport
    script_name: str
    project_id: str


def script_label(source: str) -> str:
    """Best-effort script name for bookkeeping: its first smell name."""
    match = _FIRST_SMELL_RE.search(source)
    return match.group(1) if match else ""


def validate(request: AnalysisRequest) -> ValidatedRequest | ValidationReport:
    """Run all four checks and accumulate every failure."""
    diagnostics: list[ValidationDiagnostic] = []

    parsed = inspect_script(request.script_source)
    for issue in parsed.diagnostics:
        diagnostics.append(
            ValidationDiagnostic(
                source="script",
                detail=issue.message,
                position=f"{issue.line}:{issue.column}",
            )
        )

    configured = request.thresholds.values
    for name, position in parsed.threshold_positions.items():
        if name not in configured:
            diagnostics.append(
                ValidationDiagnostic(
                    source="thresholds",
                    detail=f"script references threshold '${name}' "
                    "but the configuration does not define it",
                    position=f"{position.line}:{position.column}",
                )
            )

    columns = set(request.metrics.columns)
    for name, position in parsed.metric_positions.items():
        if name not in columns:
            diagnostics.append(
                ValidationDiagnostic(
                    source="metrics",
                    detail=f"script references metric '{name}' "
                    "but the table has no such column",
                    position=f"{position.line}:{position.column}",
                )
            )

    for problem in context_metadata_problems(request.metadata):
        diagnostics.append(ValidationDiagnostic(source="metadata", detail=str(problem)))

    if diagnostics:
        return ValidationReport(tuple(diagnostics))
    assert parsed.script is not None
    return ValidatedRequest(
        script=parsed.script,
        metrics=request.metrics,
        thresholds=request.thresholds,
        metadata=request.metadata,
    )


class ValidationService:
    """Turns AnalysisRequested into ValidationCompleted or ValidationFailed."""

    subscriber_id = "validation-service"

    def __init__(self, bus: SmellBus):
        self._bus = bus
        self.subscription = bus.subscribe(
            self.subscriber_id, {EventKind.ANALYSIS_REQUESTED}, self._on_requested
        )

    def _on_requested(self, envelope: EventEnvelope) -> None:
        request = envelope.payload
        try:
            if not isinstance(request, AnalysisRequest):
                raise TypeError(
                    f"expected an AnalysisRequest payload, got "
                    f"{type(request).__name__}"
                )
            outcome = validate(request)
        except Exception:
            logger.exception(
                "validation fault (correlation %s)", envelope.correlation_id
            )
            report = ValidationReport(
                (
                    ValidationDiagnostic(
                        source="internal",
                        detail="validation could not complete; see the server log",
                    ),
                )
            )
            source = (
                request.script_source
                if isinstance(request, AnalysisRequest)
                and isinstance(request.script_source, str)
                else ""
            )
            project = (
                request.metadata.project_id
                if isinstance(request, AnalysisRequest)
                and isinstance(request.metadata, ContextMetadata)
                and isinstance(request.metadata.project_id, str)
                else ""
            )
            self._bus.publish(
                EventKind.VALIDATION_FAILED,
                envelope.correlation_id,
                ValidationFailure(report, script_label(source), project),
            )
            return
        if isinstance(outcome, ValidationReport):
            self._bus.publish(
                EventKind.VALIDATION_FAILED,
                envelope.correlation_id,
                ValidationFailure(
                    outcome,
                    script_label(request.script_source),
                    request.metadata.project_id,
                ),
            )
        else:
            self._bus.publish(
                EventKind.VALIDATION_COMPLETED, envelope.correlation_id, outcome
            )
