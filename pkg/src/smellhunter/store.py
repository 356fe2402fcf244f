"""Embedded, file-backed storage for detection and execution records.

One directory holds a format-tagged ``manifest.json`` and an append-only
``runs.log`` with one JSON line per committed run (the execution record
plus all of its detections), so a run is either fully present or absent.
Appends are flushed and fsynced; on open, a partial final line left by a
crash is dropped and trimmed, while damage anywhere else is refused.

The store is single-writer and in-process: all queries are served from
memory rebuilt from the log, guarded by one lock.
"""

from __future__ import annotations

import json
import math
import os
import threading
from collections import Counter
from dataclasses import dataclass, fields
from datetime import datetime
from enum import Enum
from pathlib import Path

from smellhunter._util import parse_iso, to_iso
from smellhunter.dsl.ast import Severity

STORE_FORMAT = "smellhunter-store"
STORE_VERSION = 1

MAX_PAGE_SIZE = 1000


class StoreError(Exception):
    """The store directory is unusable or a write was rejected."""


class QueryError(ValueError):
    """A filter or pagination argument is out of range or malformed."""


class ExecutionStatus(str, Enum):
    COMPLETED = "completed"
    FAILED = "failed"


@dataclass(frozen=True, slots=True)
class DetectionRecord:
    """One smell found in one entity during one run, plus its context."""

    record_id: str
    correlation_id: str
    smell_name: str
    severity: Severity
    entity_id: str
    detected_at: datetime
    user_id: str
    org_id: str
    project_id: str
    file_path: str
    language: str
    latitude: float | None = None
    longitude: float | None = None

    def __post_init__(self) -> None:
        if not self.record_id:
            raise ValueError("record_id must not be empty")
        if (self.latitude is None) != (self.longitude is None):
            raise ValueError("latitude and longitude must be given together")


@dataclass(frozen=True, slots=True)
class ExecutionRecord:
    """The outcome of one analysis run, named by its script's first smell."""

    correlation_id: str
    script_name: str
    project_id: str
    executed_at: datetime
    status: ExecutionStatus
    detection_count: int

    def __post_init__(self) -> None:
        if self.detection_count < 0:
            raise ValueError("detection_count must not be negative")
        if self.status is ExecutionStatus.FAILED and self.detection_count:
            raise ValueError("a failed execution cannot carry detections")


@dataclass(frozen=True, slots=True)
class DetectionFilter:
    """Conjunctive constraints for detection queries; None means any.

    ``bbox`` is (min_latitude, max_latitude, min_longitude, max_longitude);
    records without coordinates never match it. The time range is inclusive
    of ``detected_from`` and exclusive of ``detected_to``.
    """

    smell: str | None = None
    severity: Severity | None = None
    org_id: str | None = None
    project_id: str | None = None
    bbox: tuple[float, float, float, float] | None = None
    detected_from: datetime | None = None
    detected_to: datetime | None = None

    def __post_init__(self) -> None:
        if self.bbox is not None:
            if len(self.bbox) != 4 or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool)
                and math.isfinite(v)
                for v in self.bbox
            ):
                raise QueryError("bbox needs four finite numbers")
            object.__setattr__(self, "bbox", tuple(float(v) for v in self.bbox))
            min_lat, max_lat, min_lon, max_lon = self.bbox
            if not (-90.0 <= min_lat <= max_lat <= 90.0):
                raise QueryError("bbox latitudes must satisfy -90 <= min <= max <= 90")
            if not (-180.0 <= min_lon <= max_lon <= 180.0):
                raise QueryError(
                    "bbox longitudes must satisfy -180 <= min <= max <= 180"
                )
        if (
            self.detected_from is not None
            and self.detected_to is not None
            and not self.detected_from < self.detected_to
        ):
            raise QueryError("detected_from must be earlier than detected_to")

    def matches(self, record: DetectionRecord) -> bool:
        if self.smell is not None and record.smell_name != self.smell:
            return False
        if self.severity is not None and record.severity is not self.severity:
            return False
        if self.org_id is not None and record.org_id != self.org_id:
            return False
        if self.project_id is not None and record.project_id != self.project_id:
            return False
        if self.bbox is not None:
            if record.latitude is None or record.longitude is None:
                return False
            min_lat, max_lat, min_lon, max_lon = self.bbox
            if not min_lat <= record.latitude <= max_lat:
                return False
            if not min_lon <= record.longitude <= max_lon:
                return False
        if self.detected_from is not None and record.detected_at < self.detected_from:
            return False
        if self.detected_to is not None and record.detected_at >= self.detected_to:
            return False
        return True


@dataclass(frozen=True, slots=True)
class QueryPage:
    total: int
    items: tuple


def _check_page(offset: int, limit: int) -> None:
    if not isinstance(offset, int) or isinstance(offset, bool) or offset < 0:
        raise QueryError("offset must be a non-negative integer")
    if (
        not isinstance(limit, int)
        or isinstance(limit, bool)
        or not 1 <= limit <= MAX_PAGE_SIZE
    ):
        raise QueryError(f"limit must be between 1 and {MAX_PAGE_SIZE}")


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def _detection_to_json(record: DetectionRecord) -> dict:
    data = {f.name: getattr(record, f.name) for f in fields(DetectionRecord)}
    data["severity"] = record.severity.value
    data["detected_at"] = to_iso(record.detected_at)
    return data


def _detection_from_json(data: dict) -> DetectionRecord:
    return DetectionRecord(
        record_id=data["record_id"],
        correlation_id=data["correlation_id"],
        smell_name=data["smell_name"],
        severity=Severity(data["severity"]),
        entity_id=data["entity_id"],
        detected_at=parse_iso(data["detected_at"]),
        user_id=data["user_id"],
        org_id=data["org_id"],
        project_id=data["project_id"],
        file_path=data["file_path"],
        language=data["language"],
        latitude=data.get("latitude"),
        longitude=data.get("longitude"),
    )


def _execution_to_json(record: ExecutionRecord) -> dict:
    return {
        "correlation_id": record.correlation_id,
        "script_name": record.script_name,
        "project_id": record.project_id,
        "executed_at": to_iso(record.executed_at),
        "status": record.status.value,
        "detection_count": record.detection_count,
    }


def _execution_from_json(data: dict) -> ExecutionRecord:
    return ExecutionRecord(
        correlation_id=data["correlation_id"],
        script_name=data["script_name"],
        project_id=data["project_id"],
        executed_at=parse_iso(data["executed_at"]),
        status=ExecutionStatus(data["status"]),
        detection_count=data["detection_count"],
    )


# ---------------------------------------------------------------------------
# the store
# ---------------------------------------------------------------------------


class ContextHistoryStore:
    """Append-plus-index storage for analysis runs; see module docstring."""

    def __init__(self, directory: str | Path):
        self._dir = Path(directory)
        self._lock = threading.RLock()
        self._executions: list[ExecutionRecord] = []
        self._detections: list[DetectionRecord] = []
        self._correlations: set[str] = set()
        self._dir.mkdir(parents=True, exist_ok=True)
        self._check_manifest()
        self._log_path = self._dir / "runs.log"
        self._replay_log()
        self._log = open(self._log_path, "a", encoding="utf-8")

    def _check_manifest(self) -> None:
        manifest_path = self._dir / "manifest.json"
        if manifest_path.exists():
            try:
                manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
            except (OSError, ValueError) as exc:
                raise StoreError(f"unreadable manifest: {exc}") from exc
            if not isinstance(manifest, dict) or manifest.get("format") != STORE_FORMAT:
                raise StoreError(f"{self._dir} is not a {STORE_FORMAT} directory")
            if manifest.get("version") != STORE_VERSION:
                raise StoreError(
                    f"store version {manifest.get('version')!r} is not supported "
                    f"(expected {STORE_VERSION})"
                )
        else:
            manifest_path.write_text(
                json.dumps({"format": STORE_FORMAT, "version": STORE_VERSION}) + "\n",
                encoding="utf-8",
            )

    def _replay_log(self) -> None:
        if not self._log_path.exists():
            return
        raw = self._log_path.read_bytes()
        pos = 0
        while pos < len(raw):
            newline = raw.find(b"\n", pos)
            complete = newline != -1
            line = raw[pos:newline] if complete else raw[pos:]
            try:
                entry = json.loads(line.decode("utf-8"))
                execution = _execution_from_json(entry["execution"])
                detections = tuple(
                    _detection_from_json(d) for d in entry["detections"]
                )
            except Exception as exc:
                if complete:
                    raise StoreError(
                        f"corrupt run log entry at byte {pos}: {exc}"
                    ) from exc
                # A partial final line is the footprint of an interrupted
                # append; drop it and trim the file so appends stay clean.
                with open(self._log_path, "r+b") as fh:
                    fh.truncate(pos)
                return
            if not complete:
                # The final line parsed but lost its newline; the entry made
                # it to disk whole, so keep it and restore the terminator.
                with open(self._log_path, "ab") as fh:
                    fh.write(b"\n")
            self._check_run(execution, detections)
            self._apply_run(execution, detections)
            pos = newline + 1 if complete else len(raw)

    def _check_run(
        self, execution: ExecutionRecord, detections: tuple[DetectionRecord, ...]
    ) -> None:
        if execution.correlation_id in self._correlations:
            raise StoreError(
                f"run {execution.correlation_id!r} is already recorded"
            )
        if len(detections) != execution.detection_count:
            raise StoreError(
                f"run {execution.correlation_id!r} declares "
                f"{execution.detection_count} detections but carries "
                f"{len(detections)}"
            )
        for record in detections:
            if record.correlation_id != execution.correlation_id:
                raise StoreError(
                    f"detection {record.record_id!r} belongs to "
                    f"{record.correlation_id!r}, not "
                    f"{execution.correlation_id!r}"
                )

    def _apply_run(
        self, execution: ExecutionRecord, detections: tuple[DetectionRecord, ...]
    ) -> None:
        self._correlations.add(execution.correlation_id)
        self._executions.append(execution)
        self._detections.extend(detections)

    # -- writing --

    def record_run(
        self,
        execution: ExecutionRecord,
        detections: tuple[DetectionRecord, ...] = (),
    ) -> None:
        """Commit one run atomically: the execution plus all its detections."""
        line = json.dumps(
            {
                "execution": _execution_to_json(execution),
                "detections": [_detection_to_json(d) for d in detections],
            },
            separators=(",", ":"),
        )
        with self._lock:
            if self._log.closed:
                raise StoreError("store is closed")
            self._check_run(execution, detections)
            try:
                self._log.write(line + "\n")
                self._log.flush()
                os.fsync(self._log.fileno())
            except OSError as exc:
                raise StoreError(f"append failed: {exc}") from exc
            self._apply_run(execution, detections)

    # -- queries --

    def query_detections(
        self, criteria: DetectionFilter, offset: int = 0, limit: int = 50
    ) -> QueryPage:
        """Matching detections, newest first, record id as the tiebreaker."""
        _check_page(offset, limit)
        with self._lock:
            matches = [r for r in self._detections if criteria.matches(r)]
        matches.sort(key=lambda r: r.record_id)
        matches.sort(key=lambda r: r.detected_at, reverse=True)
        return QueryPage(len(matches), tuple(matches[offset : offset + limit]))

    def histogram(self, criteria: DetectionFilter) -> dict[str, int]:
        """Matching detections counted by smell name."""
        with self._lock:
            counts = Counter(
                r.smell_name for r in self._detections if criteria.matches(r)
            )
        return dict(counts)

    def execution_history(
        self, project_id: str | None = None, offset: int = 0, limit: int = 50
    ) -> QueryPage:
        """Executions, newest first; later-committed wins a timestamp tie."""
        _check_page(offset, limit)
        with self._lock:
            matches = [
                (index, record)
                for index, record in enumerate(self._executions)
                if project_id is None or record.project_id == project_id
            ]
        matches.sort(key=lambda pair: (pair[1].executed_at, pair[0]), reverse=True)
        records = tuple(record for _, record in matches[offset : offset + limit])
        return QueryPage(len(matches), records)

    def detection_count(self) -> int:
        with self._lock:
            return len(self._detections)

    def execution_count(self) -> int:
        with self._lock:
            return len(self._executions)

    def dump(self) -> dict:
        """The full store content as one format-tagged JSON document."""
        with self._lock:
            return {
                "format": STORE_FORMAT,
                "version": STORE_VERSION,
                "executions": [_execution_to_json(r) for r in self._executions],
                "detections": [_detection_to_json(r) for r in self._detections],
            }

    # -- lifecycle --

    def close(self) -> None:
        with self._lock:
            if not self._log.closed:
                self._log.close()

    def __enter__(self) -> "ContextHistoryStore":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()
