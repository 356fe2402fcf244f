"""Wire-format parsing for analysis inputs.

An analysis request carries three payloads besides the script itself: a
metric table (RFC 4180 CSV, UTF-8, first header cell ``entity_id``), a
threshold configuration (JSON object mapping names to numbers), and
context metadata (JSON object with a fixed key set). Parsers accumulate
every problem they can find instead of stopping at the first, so a single
round trip reports all defects.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import dataclass
from typing import Mapping

from smellhunter._util import format_number
from smellhunter.dsl.ast import IDENT_RE

_NUMBER_RE = re.compile(r"[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?\Z")

METADATA_STRING_KEYS = ("user_id", "org_id", "project_id", "file_path", "language")
METADATA_KEYS = METADATA_STRING_KEYS + ("latitude", "longitude")


@dataclass(frozen=True, slots=True)
class InputError:
    """One defect in a payload, with whatever location info applies."""

    message: str
    row: int | None = None      # 1-based CSV record number, header included
    column: str | None = None   # metric table column name
    key: str | None = None      # JSON object key

    def __str__(self) -> str:
        where = []
        if self.row is not None:
            where.append(f"row {self.row}")
        if self.column is not None:
            where.append(f"column {self.column!r}")
        if self.key is not None:
            where.append(f"key {self.key!r}")
        if where:
            return f"{self.message} ({', '.join(where)})"
        return self.message


class InputParseError(ValueError):
    """A payload failed structural validation; carries all errors found."""

    def __init__(self, errors: tuple[InputError, ...]):
        self.errors = errors
        super().__init__("; ".join(str(e) for e in errors))


# ---------------------------------------------------------------------------
# value objects
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class MetricRow:
    entity_id: str
    values: tuple[float, ...]


@dataclass(frozen=True)
class MetricTable:
    """A parsed metric table: column names plus one row per entity."""

    columns: tuple[str, ...]
    rows: tuple[MetricRow, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "rows", tuple(self.rows))
        seen: set[str] = set()
        for name in self.columns:
            if name == "entity_id" or not IDENT_RE.match(name) or name in seen:
                raise ValueError(f"bad metric column name: {name!r}")
            seen.add(name)
        ids: set[str] = set()
        for row in self.rows:
            if not row.entity_id or row.entity_id in ids:
                raise ValueError(f"bad entity id: {row.entity_id!r}")
            ids.add(row.entity_id)
            if len(row.values) != len(self.columns):
                raise ValueError(f"row width mismatch for {row.entity_id!r}")

    def metrics_by_entity(self) -> dict[str, dict[str, float]]:
        """Rows as an ordered entity-to-metrics mapping."""
        return {
            row.entity_id: dict(zip(self.columns, row.values)) for row in self.rows
        }


@dataclass(frozen=True)
class ThresholdConfig:
    """Named numeric thresholds scripts may reference via ``$NAME``."""

    values: Mapping[str, float]

    def __post_init__(self) -> None:
        normalized: dict[str, float] = {}
        for name, value in self.values.items():
            if not isinstance(name, str) or not IDENT_RE.match(name):
                raise ValueError(f"bad threshold name: {name!r}")
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValueError(f"threshold {name!r} is not a number")
            if not math.isfinite(value):
                raise ValueError(f"threshold {name!r} is not finite")
            normalized[name] = float(value)
        object.__setattr__(self, "values", normalized)


@dataclass(frozen=True, slots=True)
class ContextMetadata:
    """Who ran the analysis and on what; coordinates are optional.

    This is a plain record: invariants live in context_metadata_problems()
    so callers can inspect an instance built from any source.
    """

    user_id: str
    org_id: str
    project_id: str
    file_path: str
    language: str
    latitude: float | None = None
    longitude: float | None = None


@dataclass(frozen=True)
class AnalysisRequest:
    """Everything needed to run one analysis, as received on the wire.

    The script stays raw text here; parsing it is the validation stage's
    first check.
    """

    script_source: str
    metrics: MetricTable
    thresholds: ThresholdConfig
    metadata: ContextMetadata


# ---------------------------------------------------------------------------
# metadata invariants (shared between parsing and request validation)
# ---------------------------------------------------------------------------


def _metadata_value_problems(values: Mapping[str, object]) -> list[InputError]:
    errors: list[InputError] = []
    for key in METADATA_STRING_KEYS:
        if key not in values:
            errors.append(InputError("required key is missing", key=key))
        elif not isinstance(values[key], str):
            errors.append(InputError("value must be a string", key=key))
        elif not str(values[key]).strip():
            errors.append(InputError("value must be a non-empty string", key=key))

    bounds = {"latitude": 90.0, "longitude": 180.0}
    usable: dict[str, float] = {}
    for key, bound in bounds.items():
        if key not in values:
            continue
        value = values[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            errors.append(InputError("value must be a number", key=key))
        elif not math.isfinite(value):
            errors.append(InputError("value must be finite", key=key))
        elif not -bound <= float(value) <= bound:
            errors.append(
                InputError(f"value must be between -{bound:g} and {bound:g}", key=key)
            )
        else:
            usable[key] = float(value)
    if ("latitude" in values) != ("longitude" in values):
        present = "latitude" if "latitude" in values else "longitude"
        missing = "longitude" if present == "latitude" else "latitude"
        errors.append(
            InputError(f"{present} given without {missing}; provide both or neither",
                       key=missing)
        )
    return errors


def context_metadata_problems(metadata: ContextMetadata) -> list[InputError]:
    """All invariant violations in ``metadata``, empty when it is sound."""
    values: dict[str, object] = {
        key: getattr(metadata, key) for key in METADATA_STRING_KEYS
    }
    if metadata.latitude is not None:
        values["latitude"] = metadata.latitude
    if metadata.longitude is not None:
        values["longitude"] = metadata.longitude
    return _metadata_value_problems(values)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


def _decode(data: str | bytes, errors: list[InputError]) -> str | None:
    if isinstance(data, bytes):
        try:
            return data.decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            errors.append(
                InputError(f"payload is not valid UTF-8 (byte offset {exc.start})")
            )
            return None
    return data.removeprefix("\N{ZERO WIDTH NO-BREAK SPACE}")


def parse_metric_table(data: str | bytes) -> MetricTable:
    """Parse an RFC 4180 metric table; raise InputParseError on any defect."""
    errors: list[InputError] = []
    text = _decode(data, errors)
    if text is None:
        raise InputParseError(tuple(errors))

    records = list(csv.reader(io.StringIO(text)))
    records = [(i, rec) for i, rec in enumerate(records, start=1) if rec]
    if not records:
        raise InputParseError((InputError("metric table has no header row"),))

    _, header = records[0]
    if header[0] != "entity_id":
        errors.append(
            InputError(
                f"first header cell must be 'entity_id', found {header[0]!r}", row=1
            )
        )
    columns = tuple(header[1:])
    seen_columns: set[str] = set()
    for name in columns:
        if name == "entity_id":
            errors.append(InputError("duplicate column", row=1, column=name))
        elif not IDENT_RE.match(name):
            errors.append(
                InputError(
                    "metric column name must be an identifier "
                    "(letters, digits, underscores, not starting with a digit)",
                    row=1,
                    column=name,
                )
            )
        elif name in seen_columns:
            errors.append(InputError("duplicate column", row=1, column=name))
        seen_columns.add(name)

    rows: list[MetricRow] = []
    seen_ids: set[str] = set()
    for record_no, record in records[1:]:
        if len(record) != len(columns) + 1:
            errors.append(
                InputError(
                    f"expected {len(columns) + 1} fields, found {len(record)}",
                    row=record_no,
                )
            )
            continue
        entity_id = record[0]
        if not entity_id.strip():
            errors.append(InputError("entity_id must not be empty", row=record_no))
        elif entity_id in seen_ids:
            errors.append(
                InputError(f"duplicate entity_id {entity_id!r}", row=record_no)
            )
        seen_ids.add(entity_id)
        values: list[float] = []
        for name, cell in zip(columns, record[1:]):
            cell = cell.strip()
            if not _NUMBER_RE.match(cell):
                errors.append(
                    InputError(
                        f"metric value {cell!r} is not a number",
                        row=record_no,
                        column=name,
                    )
                )
                values.append(0.0)
            else:
                values.append(float(cell))
        rows.append(MetricRow(entity_id, tuple(values)))

    if errors:
        raise InputParseError(tuple(errors))
    return MetricTable(columns, tuple(rows))


def _load_json_object(
    data: str | bytes, what: str, errors: list[InputError]
) -> dict | None:
    text = _decode(data, errors)
    if text is None:
        return None
    duplicates: list[str] = []

    def hook(pairs: list[tuple[str, object]]) -> dict:
        out: dict = {}
        for key, value in pairs:
            if key in out:
                duplicates.append(key)
            out[key] = value
        return out

    try:
        value = json.loads(text, object_pairs_hook=hook)
    except json.JSONDecodeError as exc:
        errors.append(
            InputError(
                f"invalid JSON: {exc.msg} at line {exc.lineno}, column {exc.colno}"
            )
        )
        return None
    for key in duplicates:
        errors.append(InputError("duplicate key", key=key))
    if not isinstance(value, dict):
        errors.append(InputError(f"{what} must be a JSON object"))
        return None
    return value


def parse_thresholds(data: str | bytes) -> ThresholdConfig:
    """Parse a threshold configuration; raise InputParseError on any defect."""
    errors: list[InputError] = []
    obj = _load_json_object(data, "threshold configuration", errors)
    values: dict[str, float] = {}
    if obj is not None:
        for name, value in obj.items():
            if not IDENT_RE.match(name):
                errors.append(
                    InputError(
                        "threshold name must be an identifier "
                        "(letters, digits, underscores, not starting with a digit)",
                        key=name,
                    )
                )
            elif isinstance(value, bool) or not isinstance(value, (int, float)):
                errors.append(InputError("value must be a number", key=name))
            elif not math.isfinite(value):
                errors.append(InputError("value must be finite", key=name))
            else:
                values[name] = float(value)
    if errors:
        raise InputParseError(tuple(errors))
    return ThresholdConfig(values)


def parse_metadata(data: str | bytes) -> ContextMetadata:
    """Parse context metadata; raise InputParseError on any defect."""
    errors: list[InputError] = []
    obj = _load_json_object(data, "context metadata", errors)
    if obj is not None:
        for key in obj:
            if key not in METADATA_KEYS:
                errors.append(InputError("unknown key", key=key))
        errors.extend(
            _metadata_value_problems({k: v for k, v in obj.items() if k in METADATA_KEYS})
        )
    if errors:
        raise InputParseError(tuple(errors))
    assert obj is not None
    return ContextMetadata(
        user_id=obj["user_id"],
        org_id=obj["org_id"],
        project_id=obj["project_id"],
        file_path=obj["file_path"],
        language=obj["language"],
        latitude=float(obj["latitude"]) if "latitude" in obj else None,
        longitude=float(obj["longitude"]) if "longitude" in obj else None,
    )


# ---------------------------------------------------------------------------
# emitting (inverse of the parsers, used for round-trip checks and tooling)
# ---------------------------------------------------------------------------


def emit_metric_table(table: MetricTable) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(("entity_id", *table.columns))
    for row in table.rows:
        writer.writerow((row.entity_id, *(format_number(v) for v in row.values)))
    return buffer.getvalue()


def emit_thresholds(config: ThresholdConfig) -> str:
    return json.dumps(dict(config.values), indent=2, sort_keys=True) + "\n"


def emit_metadata(metadata: ContextMetadata) -> str:
    payload: dict[str, object] = {
        key: getattr(metadata, key) for key in METADATA_STRING_KEYS
    }
    if metadata.latitude is not None:
        payload["latitude"] = metadata.latitude
    if metadata.longitude is not None:
        payload["longitude"] = metadata.longitude
    return json.dumps(payload, indent=2) + "\n"
