"""Persistence: commit run outcomes to the store and acknowledge them.

Listens for both ways a run can end. A completed interpretation becomes
one execution record plus one detection record per finding, committed in
a single atomic append, then acknowledged with PersistenceCompleted. A
validation failure becomes a failed execution record and no further
events, since ValidationFailed already ended that run's trace.

If the store rejects a completed run, the service still tries to leave a
failed execution record behind so the history reflects the attempt; the
acknowledgement is withheld either way.
"""

from __future__ import annotations

import logging
import uuid
from dataclasses import dataclass

from smellhunter._util import utc_now
from smellhunter.bus import EventEnvelope, EventKind, SmellBus
from smellhunter.services.interpretation import CompletedInterpretation
from smellhunter.services.validation import ValidationFailure
from smellhunter.store import (
    ContextHistoryStore,
    DetectionRecord,
    ExecutionRecord,
    ExecutionStatus,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PersistenceReceipt:
    """Payload of a PersistenceCompleted event."""

    execution: ExecutionRecord
    record_ids: tuple[str, ...]


class PersistenceService:
    subscriber_id = "persistence-service"

    def __init__(self, bus: SmellBus, store: ContextHistoryStore):
        self._bus = bus
        self._store = store
        self.subscription = bus.subscribe(
            self.subscriber_id,
            {EventKind.INTERPRETATION_COMPLETED, EventKind.VALIDATION_FAILED},
            self._on_event,
        )

    def _on_event(self, envelope: EventEnvelope) -> None:
        if envelope.kind is EventKind.VALIDATION_FAILED:
            self._record_failure(envelope)
        else:
            self._record_completion(envelope)

    def _record_failure(self, envelope: EventEnvelope) -> None:
        failure = envelope.payload
        if not isinstance(failure, ValidationFailure):
            raise TypeError(
                f"expected a ValidationFailure payload, got "
                f"{type(failure).__name__}"
            )
        self._store.record_run(
            ExecutionRecord(
                correlation_id=envelope.correlation_id,
                script_name=failure.script_name,
                project_id=failure.project_id,
                executed_at=utc_now(),
                status=ExecutionStatus.FAILED,
                detection_count=0,
            )
        )

    def _record_completion(self, envelope: EventEnvelope) -> None:
        completed = envelope.payload
        if not isinstance(completed, CompletedInterpretation):
            raise TypeError(
                f"expected a CompletedInterpretation payload, got "
                f"{type(completed).__name__}"
            )
        result = completed.result
        metadata = completed.request.metadata
        script = completed.request.script
        detections = tuple(
            DetectionRecord(
                record_id=uuid.uuid4().hex,
                correlation_id=envelope.correlation_id,
                smell_name=found.smell_name,
                severity=found.severity,
                entity_id=found.entity_id,
                detected_at=result.finished_at,
                user_id=metadata.user_id,
                org_id=metadata.org_id,
                project_id=metadata.project_id,
                file_path=metadata.file_path,
                language=metadata.language,
                latitude=metadata.latitude,
                longitude=metadata.longitude,
            )
            for found in result.detections
        )
        execution = ExecutionRecord(
            correlation_id=envelope.correlation_id,
            script_name=script.definitions[0].name,
            project_id=metadata.project_id,
            executed_at=utc_now(),
            status=ExecutionStatus.COMPLETED,
            detection_count=len(detections),
        )
        try:
            self._store.record_run(execution, detections)
        except Exception:
            logger.exception(
                "could not persist run %s; attempting a failure marker",
                envelope.correlation_id,
            )
            try:
                self._store.record_run(
                    ExecutionRecord(
                        correlation_id=envelope.correlation_id,
                        script_name=execution.script_name,
                        project_id=execution.project_id,
                        executed_at=utc_now(),
                        status=ExecutionStatus.FAILED,
                        detection_count=0,
                    )
                )
            except Exception:
                logger.exception(
                    "failure marker for run %s could not be written either",
                    envelope.correlation_id,
                )
            raise
        self._bus.publish(
            EventKind.PERSISTENCE_COMPLETED,
            envelope.correlation_id,
            PersistenceReceipt(execution, tuple(r.record_id for r in detections)),
        )
