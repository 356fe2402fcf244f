"""Wires the bus, the store, and the three services into one pipeline."""

from __future__ import annotations

import uuid
from pathlib import Path

from smellhunter.bus import EventEnvelope, EventKind, SmellBus, TraceAnnotation
from smellhunter.inputs import AnalysisRequest
from smellhunter.services.interpretation import InterpretationService
from smellhunter.services.persistence import PersistenceService
from smellhunter.services.validation import ValidationService
from smellhunter.store import ContextHistoryStore


class Platform:
    """One running analysis pipeline over one store directory."""

    def __init__(self, store_dir: str | Path, bus: SmellBus | None = None):
        self.bus = bus if bus is not None else SmellBus()
        self.store = ContextHistoryStore(store_dir)
        self.validation = ValidationService(self.bus)
        self.interpretation = InterpretationService(self.bus)
        self.persistence = PersistenceService(self.bus, self.store)

    def submit(self, request: AnalysisRequest) -> str:
        """Start a run; returns its correlation id immediately."""
        correlation_id = uuid.uuid4().hex
        self.bus.publish(EventKind.ANALYSIS_REQUESTED, correlation_id, request)
        return correlation_id

    def trace(self, correlation_id: str) -> tuple[EventEnvelope, ...]:
        return self.bus.trace(correlation_id)

    def annotations(self, correlation_id: str) -> tuple[TraceAnnotation, ...]:
        return self.bus.annotations(correlation_id)

    def wait_idle(self, timeout: float | None = None) -> bool:
        return self.bus.wait_idle(timeout)

    def close(self) -> None:
        self.bus.close()
        self.store.close()

    def __enter__(self) -> "Platform":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()
