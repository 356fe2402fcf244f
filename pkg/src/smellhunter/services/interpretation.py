"""Script interpretation: run validated rules over the metric table."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime

from smellhunter._util import utc_now
from smellhunter.bus import EventEnvelope, EventKind, SmellBus
from smellhunter.dsl.interpreter import Detection, detect
from smellhunter.services.validation import ValidatedRequest


@dataclass(frozen=True)
class InterpretationResult:
    """What one run found and how big it was."""

    detections: tuple[Detection, ...]
    entities_analyzed: int
    definitions_evaluated: int
    started_at: datetime
    finished_at: datetime


@dataclass(frozen=True)
class CompletedInterpretation:
    """Payload of an InterpretationCompleted event.

    Carries the validated request alongside the result so downstream
    stages can attach context without replaying earlier events.
    """

    result: InterpretationResult
    request: ValidatedRequest


class InterpretationService:
    """Turns ValidationCompleted into InterpretationCompleted.

    Validation already guarantees the script's references resolve, so a
    failure here is a programming error; it is left to surface as a bus
    trace annotation rather than being dressed up as a pipeline event.
    """

    subscriber_id = "interpretation-service"

    def __init__(self, bus: SmellBus):
        self._bus = bus
        self.subscription = bus.subscribe(
            self.subscriber_id, {EventKind.VALIDATION_COMPLETED}, self._on_validated
        )

    def _on_validated(self, envelope: EventEnvelope) -> None:
        request = envelope.payload
        if not isinstance(request, ValidatedRequest):
            raise TypeError(
                f"expected a ValidatedRequest payload, got {type(request).__name__}"
            )
        started_at = utc_now()
        detections = detect(
            request.script,
            request.metrics.metrics_by_entity(),
            request.thresholds.values,
        )
        result = InterpretationResult(
            detections=tuple(detections),
            entities_analyzed=len(request.metrics.rows),
            definitions_evaluated=len(request.script.definitions),
            started_at=started_at,
            finished_at=utc_now(),
        )
        self._bus.publish(
            EventKind.INTERPRETATION_COMPLETED,
            envelope.correlation_id,
            CompletedInterpretation(result, request),
        )
