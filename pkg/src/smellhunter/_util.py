"""Small shared helpers: number formatting and UTC timestamps."""

from __future__ import annotations

from datetime import datetime, timezone
from decimal import Decimal


def format_number(value: float) -> str:
    """Render a finite float as a plain decimal literal (no exponent).

    The result parses back to the exact same float, so emitted scripts
    and files round-trip bit-exactly.
    """
    text = repr(float(value))
    if "e" in text or "E" in text:
        # repr is the shortest round-trip form; expand it positionally.
        text = format(Decimal(text), "f")
    if text.endswith(".0"):
        text = text[:-2]
    return text


def utc_now() -> datetime:
    return datetime.now(timezone.utc)


def to_iso(moment: datetime) -> str:
    if moment.tzinfo is None:
        moment = moment.replace(tzinfo=timezone.utc)
    return moment.astimezone(timezone.utc).isoformat()


def parse_iso(text: str) -> datetime:
    """Parse an ISO-8601 timestamp, tolerating a trailing 'Z'."""
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    moment = datetime.fromisoformat(text)
    if moment.tzinfo is None:
        moment = moment.replace(tzinfo=timezone.utc)
    return moment.astimezone(timezone.utc)
