"""Pipeline stages: each service subscribes to the bus and reacts to events."""

from smellhunter.services.interpretation import (
    CompletedInterpretation,
    InterpretationResult,
    InterpretationService,
)
from smellhunter.services.persistence import PersistenceReceipt, PersistenceService
from smellhunter.services.validation import (
    ValidatedRequest,
    ValidationDiagnostic,
    ValidationFailure,
    ValidationReport,
    ValidationService,
    validate,
)

__all__ = [
    "CompletedInterpretation",
    "InterpretationResult",
    "InterpretationService",
    "PersistenceReceipt",
    "PersistenceService",
    "ValidatedRequest",
    "ValidationDiagnostic",
    "ValidationFailure",
    "ValidationReport",
    "ValidationService",
    "validate",
]
