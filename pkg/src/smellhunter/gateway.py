"""HTTP gateway: the platform's only external interface.

Endpoints:

  POST /analyses                multipart upload of script, metrics,
                                thresholds, metadata; 202 with the
                                correlation id, 400 on structural payload
                                errors, 413 on oversized parts
  GET  /analyses/{id}           status of one run: its pipeline stage,
                                diagnostics once failed, detections once
                                interpreted
  GET  /detections              filterable, paginated detection records
  GET  /detections/histogram    matching detections counted by smell name
  GET  /executions              run history, newest first

Script text is forwarded opaquely: deciding whether it parses belongs to
the validation stage, and its verdict is delivered through the status
resource. The three structured payloads are parsed here, and any defect
is a 400 with every error found.

Bad filter or pagination arguments are a 400, never a 422, so all query
parameters arrive as raw strings and are parsed by hand.
"""

from __future__ import annotations

from contextlib import asynccontextmanager
from dataclasses import dataclass
from pathlib import Path

import click
from fastapi import FastAPI, File, Request, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from smellhunter._util import parse_iso, to_iso, utc_now
from smellhunter.bus import EventKind
from smellhunter.dsl.ast import Severity
from smellhunter.inputs import (
    AnalysisRequest,
    InputError,
    InputParseError,
    parse_metadata,
    parse_metric_table,
    parse_thresholds,
)
from smellhunter.platform import Platform
from smellhunter.services.interpretation import CompletedInterpretation
from smellhunter.services.validation import ValidationFailure
from smellhunter.store import (
    DetectionFilter,
    DetectionRecord,
    ExecutionRecord,
    QueryError,
)

DEFAULT_MAX_PAYLOAD = 1_048_576  # 1 MiB per part

_STAGES = {
    EventKind.ANALYSIS_REQUESTED: "requested",
    EventKind.VALIDATION_COMPLETED: "validated",
    EventKind.VALIDATION_FAILED: "failed",
    EventKind.INTERPRETATION_COMPLETED: "interpreted",
    EventKind.PERSISTENCE_COMPLETED: "persisted",
}


@dataclass(frozen=True)
class GatewayConfig:
    store_dir: str | Path
    max_payload_bytes: int = DEFAULT_MAX_PAYLOAD
    static_dir: str | Path | None = None


def _error_body(errors: list[dict]) -> dict:
    return {"errors": errors}


def _input_error_json(error: InputError, part: str) -> dict:
    body: dict = {"part": part, "message": error.message}
    if error.row is not None:
        body["row"] = error.row
    if error.column is not None:
        body["column"] = error.column
    if error.key is not None:
        body["key"] = error.key
    return body


def _detection_json(record: DetectionRecord) -> dict:
    return {
        "record_id": record.record_id,
        "correlation_id": record.correlation_id,
        "smell_name": record.smell_name,
        "severity": record.severity.value,
        "entity_id": record.entity_id,
        "detected_at": to_iso(record.detected_at),
        "user_id": record.user_id,
        "org_id": record.org_id,
        "project_id": record.project_id,
        "file_path": record.file_path,
        "language": record.language,
        "latitude": record.latitude,
        "longitude": record.longitude,
    }


def _execution_json(record: ExecutionRecord) -> dict:
    return {
        "correlation_id": record.correlation_id,
        "script_name": record.script_name,
        "project_id": record.project_id,
        "executed_at": to_iso(record.executed_at),
        "status": record.status.value,
        "detection_count": record.detection_count,
        "smell_detected": record.detection_count > 0,
    }


def _parse_filter(params) -> DetectionFilter:
    smell = params.get("smell")
    severity = None
    if params.get("severity") is not None:
        try:
            severity = Severity(params["severity"])
        except ValueError:
            raise QueryError(
                f"unknown severity {params['severity']!r}; expected one of "
                "low, medium, high, critical"
            ) from None
    bbox = None
    if params.get("bbox") is not None:
        pieces = params["bbox"].split(",")
        try:
            bbox = tuple(float(p) for p in pieces)
        except ValueError:
            raise QueryError(
                "bbox must be four comma-separated numbers: "
                "min_lat,max_lat,min_lon,max_lon"
            ) from None
    window = {}
    for name in ("from", "to"):
        if params.get(name) is not None:
            try:
                window[name] = parse_iso(params[name])
            except ValueError:
                raise QueryError(
                    f"{name!r} must be an ISO-8601 timestamp"
                ) from None
    return DetectionFilter(
        smell=smell,
        severity=severity,
        org_id=params.get("org_id"),
        project_id=params.get("project_id"),
        bbox=bbox,
        detected_from=window.get("from"),
        detected_to=window.get("to"),
    )


def _parse_page(offset: str | None, limit: str | None) -> tuple[int, int]:
    try:
        parsed_offset = int(offset) if offset is not None else 0
        parsed_limit = int(limit) if limit is not None else 50
    except ValueError:
        raise QueryError("offset and limit must be integers") from None
    return parsed_offset, parsed_limit


def build_app(config: GatewayConfig, platform: Platform | None = None) -> FastAPI:
    """Assemble the application; a caller-supplied platform is not closed."""
    owns_platform = platform is None

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        app.state.platform = (
            Platform(config.store_dir) if owns_platform else platform
        )
        try:
            yield
        finally:
            if owns_platform:
                app.state.platform.close()

    app = FastAPI(title="smellhunter", lifespan=lifespan)

    @app.exception_handler(QueryError)
    async def on_query_error(request: Request, exc: QueryError) -> JSONResponse:
        return JSONResponse(
            status_code=400, content=_error_body([{"message": str(exc)}])
        )

    @app.exception_handler(RequestValidationError)
    async def on_request_error(
        request: Request, exc: RequestValidationError
    ) -> JSONResponse:
        return JSONResponse(
            status_code=400,
            content=_error_body(
                [{"message": "malformed request", "detail": str(exc)}]
            ),
        )

    # -- submission ---------------------------------------------------------

    @app.post("/analyses", status_code=202)
    async def submit_analysis(
        request: Request,
        script: UploadFile | None = File(None),
        metrics: UploadFile | None = File(None),
        thresholds: UploadFile | None = File(None),
        metadata: UploadFile | None = File(None),
    ):
        parts = {
            "script": script,
            "metrics": metrics,
            "thresholds": thresholds,
            "metadata": metadata,
        }
        missing = [name for name, part in parts.items() if part is None]
        if missing:
            return JSONResponse(
                status_code=400,
                content=_error_body(
                    [
                        {"part": name, "message": "required part is missing"}
                        for name in missing
                    ]
                ),
            )

        payloads: dict[str, bytes] = {}
        oversized: list[dict] = []
        for name, part in parts.items():
            data = await part.read()
            if len(data) > config.max_payload_bytes:
                oversized.append(
                    {
                        "part": name,
                        "message": f"part exceeds {config.max_payload_bytes} bytes",
                    }
                )
            payloads[name] = data
        if oversized:
            return JSONResponse(status_code=413, content=_error_body(oversized))

        errors: list[dict] = []
        try:
            script_source = payloads["script"].decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            script_source = ""
            errors.append(
                {
                    "part": "script",
                    "message": f"payload is not valid UTF-8 "
                    f"(byte offset {exc.start})",
                }
            )
        table = thresholds_config = meta = None
        for name, parser in (
            ("metrics", parse_metric_table),
            ("thresholds", parse_thresholds),
            ("metadata", parse_metadata),
        ):
            try:
                parsed = parser(payloads[name])
            except InputParseError as exc:
                errors.extend(_input_error_json(e, name) for e in exc.errors)
                continue
            if name == "metrics":
                table = parsed
            elif name == "thresholds":
                thresholds_config = parsed
            else:
                meta = parsed
        if errors:
            return JSONResponse(status_code=400, content=_error_body(errors))

        correlation_id = request.app.state.platform.submit(
            AnalysisRequest(script_source, table, thresholds_config, meta)
        )
        return {"correlation_id": correlation_id, "accepted_at": to_iso(utc_now())}

    # -- status -------------------------------------------------------------

    @app.get("/analyses/{correlation_id}")
    async def analysis_status(request: Request, correlation_id: str):
        platform: Platform = request.app.state.platform
        trace = platform.trace(correlation_id)
        if not trace:
            return JSONResponse(
                status_code=404,
                content=_error_body(
                    [{"message": f"unknown analysis {correlation_id!r}"}]
                ),
            )
        diagnostics = None
        detections = None
        for envelope in trace:
            if envelope.kind is EventKind.VALIDATION_FAILED and isinstance(
                envelope.payload, ValidationFailure
            ):
                diagnostics = [
                    {
                        "source": d.source,
                        "detail": d.detail,
                        "position": d.position,
                    }
                    for d in envelope.payload.report.diagnostics
                ]
            if envelope.kind is EventKind.INTERPRETATION_COMPLETED and isinstance(
                envelope.payload, CompletedInterpretation
            ):
                detections = [
                    {
                        "entity_id": found.entity_id,
                        "smell_name": found.smell_name,
                        "severity": found.severity.value,
                    }
                    for found in envelope.payload.result.detections
                ]
        return {
            "correlation_id": correlation_id,
            "stage": _STAGES[trace[-1].kind],
            "requested_at": to_iso(trace[0].occurred_at),
            "updated_at": to_iso(trace[-1].occurred_at),
            "diagnostics": diagnostics,
            "detections": detections,
            "annotations": [
                f"{a.subscriber_id} failed on {a.kind.value}: {a.error}"
                for a in platform.annotations(correlation_id)
            ],
        }

    # -- queries ------------------------------------------------------------

    @app.get("/detections")
    async def list_detections(request: Request):
        params = request.query_params
        criteria = _parse_filter(params)
        offset, limit = _parse_page(params.get("offset"), params.get("limit"))
        page = request.app.state.platform.store.query_detections(
            criteria, offset, limit
        )
        return {
            "total": page.total,
            "offset": offset,
            "limit": limit,
            "items": [_detection_json(r) for r in page.items],
        }

    @app.get("/detections/histogram")
    async def detections_histogram(request: Request):
        criteria = _parse_filter(request.query_params)
        return request.app.state.platform.store.histogram(criteria)

    @app.get("/executions")
    async def list_executions(request: Request):
        params = request.query_params
        offset, limit = _parse_page(params.get("offset"), params.get("limit"))
        page = request.app.state.platform.store.execution_history(
            params.get("project_id"), offset, limit
        )
        return {
            "total": page.total,
            "offset": offset,
            "limit": limit,
            "items": [_execution_json(r) for r in page.items],
        }

    if config.static_dir is not None and Path(config.static_dir).is_dir():
        app.mount(
            "/", StaticFiles(directory=str(config.static_dir), html=True), name="ui"
        )

    return app


# ---------------------------------------------------------------------------
# server entry point
# ---------------------------------------------------------------------------


@click.command()
@click.option(
    "--listen",
    default="127.0.0.1:8000",
    envvar="SMELLHUNTER_LISTEN",
    show_default=True,
    help="host:port to bind.",
)
@click.option(
    "--store",
    default="./smellhunter-data",
    envvar="SMELLHUNTER_STORE",
    show_default=True,
    help="Store directory (created if absent).",
)
@click.option(
    "--max-payload",
    default=DEFAULT_MAX_PAYLOAD,
    envvar="SMELLHUNTER_MAX_PAYLOAD",
    show_default=True,
    help="Per-part upload limit in bytes.",
)
@click.option(
    "--static",
    default=None,
    envvar="SMELLHUNTER_STATIC",
    help="Directory of dashboard assets to serve at /.",
)
def serve(listen: str, store: str, max_payload: int, static: str | None) -> None:
    """Run the analysis gateway."""
    import uvicorn

    host, _, port_text = listen.rpartition(":")
    if not host or not port_text.isdigit():
        raise click.UsageError(f"--listen must be host:port, got {listen!r}")
    app = build_app(
        GatewayConfig(
            store_dir=store, max_payload_bytes=max_payload, static_dir=static
        )
    )
    uvicorn.run(app, host=host, port=int(port_text))


if __name__ == "__main__":
    serve()
