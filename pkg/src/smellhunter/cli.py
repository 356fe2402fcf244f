"""Command-line client for the analysis gateway.

Exit codes: 0 on success, 1 for usage, local, or network problems,
2 when a submitted analysis failed validation, 3 when --wait timed out.

The server address comes from --server, then SMELLHUNTER_SERVER, then the
"server" key of the config file (~/.config/smellhunter/config.json, or the
path in SMELLHUNTER_CONFIG), then http://127.0.0.1:8000.
"""

from __future__ import annotations

import json
import os
import sys
import time
from pathlib import Path

import click
import httpx

from smellhunter.client import GatewayClient, GatewayError
from smellhunter.dsl.parser import inspect_script
from smellhunter.inputs import (
    InputParseError,
    parse_metadata,
    parse_metric_table,
    parse_thresholds,
)

DEFAULT_SERVER = "http://127.0.0.1:8000"

_TERMINAL_STAGES = {"persisted", "failed"}


def _config_server() -> str | None:
    path = os.environ.get("SMELLHUNTER_CONFIG")
    config_path = (
        Path(path) if path else Path.home() / ".config" / "smellhunter" / "config.json"
    )
    if not config_path.is_file():
        return None
    try:
        config = json.loads(config_path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise click.UsageError(f"unreadable config {config_path}: {exc}") from exc
    server = config.get("server") if isinstance(config, dict) else None
    if server is not None and not isinstance(server, str):
        raise click.UsageError(f"config {config_path}: 'server' must be a string")
    return server


class _State:
    def __init__(self, http: httpx.Client | None = None):
        self.http = http
        self.server = DEFAULT_SERVER
        self.output = "table"

    def client(self) -> GatewayClient:
        return GatewayClient(self.server, http=self.http)


@click.group()
@click.option(
    "--server",
    default=None,
    envvar="SMELLHUNTER_SERVER",
    metavar="URL",
    help="Gateway base URL.",
)
@click.option(
    "--format",
    "output",
    type=click.Choice(["table", "document"]),
    default="table",
    show_default=True,
    help="table for humans, document for raw JSON.",
)
@click.pass_context
def cli(ctx: click.Context, server: str | None, output: str) -> None:
    """Submit code-smell analyses and browse their results."""
    state = ctx.obj if isinstance(ctx.obj, _State) else _State()
    state.server = server or _config_server() or DEFAULT_SERVER
    state.output = output
    ctx.obj = state


def _echo_document(payload: object) -> None:
    click.echo(json.dumps(payload, indent=2, sort_keys=True))


def _echo_table(headers: list[str], rows: list[list[str]]) -> None:
    widths = [len(h) for h in headers]
    for row in rows:
        widths = [max(w, len(cell)) for w, cell in zip(widths, row)]
    for line in ([headers] + rows):
        click.echo("  ".join(cell.ljust(w) for cell, w in zip(line, widths)).rstrip())


def _filter_params(
    smell: str | None,
    severity: str | None,
    org_id: str | None,
    project_id: str | None,
    bbox: str | None,
    detected_from: str | None,
    detected_to: str | None,
) -> dict:
    params: dict = {}
    if smell is not None:
        params["smell"] = smell
    if severity is not None:
        params["severity"] = severity
    if org_id is not None:
        params["org_id"] = org_id
    if project_id is not None:
        params["project_id"] = project_id
    if bbox is not None:
        pieces = bbox.split(",")
        if len(pieces) != 4:
            raise click.UsageError(
                "--bbox must be min_lat,max_lat,min_lon,max_lon"
            )
        try:
            [float(p) for p in pieces]
        except ValueError:
            raise click.UsageError("--bbox values must be numbers") from None
        params["bbox"] = bbox
    if detected_from is not None:
        params["from"] = detected_from
    if detected_to is not None:
        params["to"] = detected_to
    return params


_FILTER_OPTIONS = [
    click.option("--smell", default=None, help="Exact smell name."),
    click.option(
        "--severity",
        default=None,
        type=click.Choice(["low", "medium", "high", "critical"]),
        help="Exact severity.",
    ),
    click.option("--org-id", default=None, help="Exact organisation id."),
    click.option("--project-id", default=None, help="Exact project id."),
    click.option(
        "--bbox",
        default=None,
        metavar="MINLAT,MAXLAT,MINLON,MAXLON",
        help="Geographic bounding box.",
    ),
    click.option(
        "--from", "detected_from", default=None, metavar="ISO8601",
        help="Detected at or after this instant.",
    ),
    click.option(
        "--to", "detected_to", default=None, metavar="ISO8601",
        help="Detected before this instant.",
    ),
]


def _with_filters(command):
    for option in reversed(_FILTER_OPTIONS):
        command = option(command)
    return command


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------


def _read_payload(path: str, label: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise click.UsageError(f"cannot read {label} file: {exc}") from exc


def _local_problems(
    script: bytes, metrics: bytes, thresholds: bytes, metadata: bytes
) -> list[str]:
    problems: list[str] = []
    try:
        parsed = inspect_script(script.decode("utf-8-sig"))
        problems.extend(f"script {d}" for d in parsed.diagnostics)
    except UnicodeDecodeError:
        problems.append("script: not valid UTF-8")
    for label, parser, payload in (
        ("metrics", parse_metric_table, metrics),
        ("thresholds", parse_thresholds, thresholds),
        ("metadata", parse_metadata, metadata),
    ):
        try:
            parser(payload)
        except InputParseError as exc:
            problems.extend(f"{label}: {e}" for e in exc.errors)
    return problems


@cli.command()
@click.option("--script", "script_path", required=True, metavar="FILE")
@click.option("--metrics", "metrics_path", required=True, metavar="FILE")
@click.option("--thresholds", "thresholds_path", required=True, metavar="FILE")
@click.option("--metadata", "metadata_path", required=True, metavar="FILE")
@click.option("--wait", is_flag=True, help="Poll until the run ends.")
@click.option(
    "--poll-interval", default=200, show_default=True, metavar="MS",
    help="Delay between status polls.",
)
@click.option(
    "--timeout", default=30_000, show_default=True, metavar="MS",
    help="Give up waiting after this long.",
)
@click.pass_obj
def analyze(
    state: _State,
    script_path: str,
    metrics_path: str,
    thresholds_path: str,
    metadata_path: str,
    wait: bool,
    poll_interval: int,
    timeout: int,
) -> None:
    """Upload one analysis; with --wait, follow it to its verdict."""
    if poll_interval <= 0:
        raise click.UsageError("--poll-interval must be positive")
    if wait and timeout <= poll_interval:
        raise click.UsageError("--timeout must be larger than --poll-interval")

    script = _read_payload(script_path, "script")
    metrics = _read_payload(metrics_path, "metrics")
    thresholds = _read_payload(thresholds_path, "thresholds")
    metadata = _read_payload(metadata_path, "metadata")

    problems = _local_problems(script, metrics, thresholds, metadata)
    if problems:
        click.echo("the request would be rejected; nothing was uploaded:", err=True)
        for problem in problems:
            click.echo(f"  {problem}", err=True)
        raise click.exceptions.Exit(1)

    client = state.client()
    accepted = client.submit(script, metrics, thresholds, metadata)
    correlation_id = accepted["correlation_id"]
    if not wait:
        if state.output == "document":
            _echo_document(accepted)
        else:
            click.echo(f"accepted: {correlation_id}")
        return

    deadline = time.monotonic() + timeout / 1000.0
    status = client.status(correlation_id)
    while status["stage"] not in _TERMINAL_STAGES:
        if time.monotonic() >= deadline:
            click.echo(
                f"timed out after {timeout} ms at stage {status['stage']!r} "
                f"(correlation {correlation_id})",
                err=True,
            )
            raise click.exceptions.Exit(3)
        time.sleep(poll_interval / 1000.0)
        status = client.status(correlation_id)

    if state.output == "document":
        _echo_document(status)
    else:
        click.echo(f"correlation: {correlation_id}")
        click.echo(f"stage: {status['stage']}")
        detections = status.get("detections")
        if detections is not None:
            click.echo(f"{len(detections)} detections")
            for found in detections:
                click.echo(
                    f"  {found['entity_id']}  {found['smell_name']}  "
                    f"{found['severity']}"
                )
        for line in status.get("annotations") or []:
            click.echo(f"note: {line}", err=True)
        if status["stage"] == "failed":
            for diagnostic in status.get("diagnostics") or []:
                position = diagnostic.get("position")
                where = f" at {position}" if position else ""
                click.echo(
                    f"  [{diagnostic['source']}{where}] {diagnostic['detail']}",
                    err=True,
                )
    if status["stage"] == "failed":
        raise click.exceptions.Exit(2)


# ---------------------------------------------------------------------------
# queries
# ---------------------------------------------------------------------------


@cli.command()
@_with_filters
@click.option("--offset", default=0, show_default=True)
@click.option("--limit", default=50, show_default=True)
@click.pass_obj
def detections(state: _State, offset: int, limit: int, **filters) -> None:
    """List detection records, newest first."""
    params = _filter_params(**filters)
    params["offset"] = offset
    params["limit"] = limit
    page = state.client().detections(params)
    if state.output == "document":
        _echo_document(page)
        return
    if not page["items"]:
        click.echo("no detections")
        return
    rows = [
        [
            item["record_id"][:12],
            item["smell_name"],
            item["severity"],
            item["entity_id"],
            item["project_id"],
            item["detected_at"],
        ]
        for item in page["items"]
    ]
    _echo_table(
        ["record", "smell", "severity", "entity", "project", "detected_at"], rows
    )
    click.echo(f"{len(page['items'])} of {page['total']} shown")


@cli.command()
@_with_filters
@click.pass_obj
def histogram(state: _State, **filters) -> None:
    """Count matching detections by smell name."""
    counts = state.client().histogram(_filter_params(**filters))
    if state.output == "document":
        _echo_document(counts)
        return
    if not counts:
        click.echo("no detections")
        return
    rows = [
        [name, str(count)]
        for name, count in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    ]
    _echo_table(["smell", "count"], rows)


@cli.command()
@click.option("--project-id", default=None, help="Only this project's runs.")
@click.option("--offset", default=0, show_default=True)
@click.option("--limit", default=50, show_default=True)
@click.pass_obj
def history(state: _State, project_id: str | None, offset: int, limit: int) -> None:
    """List executions, newest first."""
    params: dict = {"offset": offset, "limit": limit}
    if project_id is not None:
        params["project_id"] = project_id
    page = state.client().executions(params)
    if state.output == "document":
        _echo_document(page)
        return
    if not page["items"]:
        click.echo("no executions")
        return
    rows = [
        [
            item["correlation_id"][:12],
            item["script_name"] or "-",
            item["project_id"] or "-",
            item["status"],
            "yes" if item["smell_detected"] else "no",
            str(item["detection_count"]),
            item["executed_at"],
        ]
        for item in page["items"]
    ]
    _echo_table(
        ["run", "script", "project", "status", "smell", "count", "executed_at"],
        rows,
    )
    click.echo(f"{len(page['items'])} of {page['total']} shown")


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def main(argv: list[str] | None = None, http: httpx.Client | None = None) -> int:
    """Run the CLI and return its exit code instead of raising SystemExit.

    ``http`` lets tests route requests to an in-process application.
    """
    try:
        # Depending on the click version, Exit either propagates out of
        # main() or is swallowed and returned as an exit code; cover both.
        result = cli.main(
            args=argv,
            prog_name="smellhunter",
            standalone_mode=False,
            obj=_State(http=http),
        )
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except GatewayError as exc:
        click.echo(f"the server rejected the request: {exc}", err=True)
        return 1
    except httpx.HTTPError as exc:
        click.echo(f"cannot reach the server: {exc}", err=True)
        return 1
    return result if isinstance(result, int) else 0


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
