"""In-process publish/subscribe bus for the analysis pipeline.

Each analysis run is one correlation. The bus assigns per-correlation
sequence numbers starting at 1, keeps the full trace of envelopes, and
enforces the pipeline's stage machine: a run starts with AnalysisRequested
and either walks the completed chain or ends at ValidationFailed.

Delivery is asynchronous on a small worker pool, never on the publisher's
stack. For a given subscriber and correlation, events arrive exactly once
and in publish order; events of different correlations may interleave.
Handler exceptions are recorded as trace annotations and never retried.
"""

from __future__ import annotations

import logging
import threading
from collections import defaultdict, deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Callable

from smellhunter._util import utc_now

logger = logging.getLogger(__name__)


class EventKind(str, Enum):
    ANALYSIS_REQUESTED = "AnalysisRequested"
    VALIDATION_COMPLETED = "ValidationCompleted"
    VALIDATION_FAILED = "ValidationFailed"
    INTERPRETATION_COMPLETED = "InterpretationCompleted"
    PERSISTENCE_COMPLETED = "PersistenceCompleted"


_NEXT_KINDS: dict[EventKind, frozenset[EventKind]] = {
    EventKind.ANALYSIS_REQUESTED: frozenset(
        {EventKind.VALIDATION_COMPLETED, EventKind.VALIDATION_FAILED}
    ),
    EventKind.VALIDATION_COMPLETED: frozenset({EventKind.INTERPRETATION_COMPLETED}),
    EventKind.INTERPRETATION_COMPLETED: frozenset({EventKind.PERSISTENCE_COMPLETED}),
    EventKind.VALIDATION_FAILED: frozenset(),
    EventKind.PERSISTENCE_COMPLETED: frozenset(),
}


@dataclass(frozen=True, slots=True)
class EventEnvelope:
    kind: EventKind
    correlation_id: str
    sequence: int
    occurred_at: datetime
    payload: object


@dataclass(frozen=True, slots=True)
class TraceAnnotation:
    """A subscriber failure noted against a correlation's trace."""

    subscriber_id: str
    kind: EventKind
    sequence: int
    error: str


@dataclass(frozen=True)
class Subscription:
    subscriber_id: str
    kinds: frozenset[EventKind]
    handler: Callable[[EventEnvelope], None] = field(compare=False)


class BusError(Exception):
    """A publish or subscribe call broke the bus protocol."""


class _Correlation:
    __slots__ = ("envelopes", "annotations", "last_kind")

    def __init__(self) -> None:
        self.envelopes: list[EventEnvelope] = []
        self.annotations: list[TraceAnnotation] = []
        self.last_kind: EventKind | None = None


class SmellBus:
    """The pipeline's event bus; see the module docstring for guarantees."""

    def __init__(self, max_workers: int = 4):
        self._lock = threading.Lock()
        self._idle = threading.Condition(self._lock)
        self._executor = ThreadPoolExecutor(
            max_workers=max_workers, thread_name_prefix="smellbus"
        )
        self._subscriptions: dict[str, Subscription] = {}
        self._correlations: dict[str, _Correlation] = {}
        self._queues: dict[tuple[str, str], deque[EventEnvelope]] = defaultdict(deque)
        self._draining: set[tuple[str, str]] = set()
        self._pending = 0
        self._published = 0
        self._delivered = 0
        self._closed = False

    # -- publishing --

    def publish(
        self, kind: EventKind, correlation_id: str, payload: object
    ) -> EventEnvelope:
        """Record and fan out one event; returns after it is enqueued.

        Raises BusError when the event does not fit the correlation's
        stage machine (wrong first event, unknown correlation, publishing
        past a terminal event) or the bus is closed.
        """
        if not correlation_id:
            raise BusError("correlation_id must not be empty")
        to_start: list[tuple[str, str]] = []
        with self._lock:
            if self._closed:
                raise BusError("bus is closed")
            correlation = self._correlations.get(correlation_id)
            if correlation is None:
                if kind is not EventKind.ANALYSIS_REQUESTED:
                    raise BusError(
                        f"correlation {correlation_id!r} must start with "
                        f"{EventKind.ANALYSIS_REQUESTED.value}, not {kind.value}"
                    )
                correlation = _Correlation()
                self._correlations[correlation_id] = correlation
            else:
                assert correlation.last_kind is not None
                allowed = _NEXT_KINDS[correlation.last_kind]
                if kind not in allowed:
                    raise BusError(
                        f"{kind.value} cannot follow "
                        f"{correlation.last_kind.value} "
                        f"(correlation {correlation_id!r})"
                    )
            envelope = EventEnvelope(
                kind=kind,
                correlation_id=correlation_id,
                sequence=len(correlation.envelopes) + 1,
                occurred_at=utc_now(),
                payload=payload,
            )
            correlation.envelopes.append(envelope)
            correlation.last_kind = kind
            self._published += 1
            for subscription in self._subscriptions.values():
                if kind not in subscription.kinds:
                    continue
                key = (subscription.subscriber_id, correlation_id)
                self._queues[key].append(envelope)
                self._pending += 1
                if key not in self._draining:
                    self._draining.add(key)
                    to_start.append(key)
        for key in to_start:
            self._executor.submit(self._drain, key)
        return envelope

    def _drain(self, key: tuple[str, str]) -> None:
        subscriber_id, correlation_id = key
        while True:
            with self._lock:
                queue = self._queues[key]
                if not queue:
                    self._draining.discard(key)
                    del self._queues[key]
                    return
                envelope = queue.popleft()
                subscription = self._subscriptions.get(subscriber_id)
            try:
                if subscription is not None:
                    subscription.handler(envelope)
            except Exception as exc:
                logger.exception(
                    "subscriber %r failed on %s #%d (correlation %s)",
                    subscriber_id,
                    envelope.kind.value,
                    envelope.sequence,
                    correlation_id,
                )
                with self._lock:
                    self._correlations[correlation_id].annotations.append(
                        TraceAnnotation(
                            subscriber_id=subscriber_id,
                            kind=envelope.kind,
                            sequence=envelope.sequence,
                            error=f"{type(exc).__name__}: {exc}",
                        )
                    )
            finally:
                with self._lock:
                    self._delivered += 1
                    self._pending -= 1
                    if self._pending == 0:
                        self._idle.notify_all()

    # -- subscribing --

    def subscribe(
        self,
        subscriber_id: str,
        kinds: frozenset[EventKind] | set[EventKind],
        handler: Callable[[EventEnvelope], None],
    ) -> Subscription:
        if not kinds:
            raise BusError("subscription needs at least one event kind")
        subscription = Subscription(subscriber_id, frozenset(kinds), handler)
        with self._lock:
            if subscriber_id in self._subscriptions:
                raise BusError(f"subscriber {subscriber_id!r} already registered")
            self._subscriptions[subscriber_id] = subscription
        return subscription

    def unsubscribe(self, subscription: Subscription) -> None:
        """Stop future deliveries; already-enqueued events still arrive."""
        with self._lock:
            current = self._subscriptions.get(subscription.subscriber_id)
            if current is subscription:
                del self._subscriptions[subscription.subscriber_id]

    # -- introspection --

    def trace(self, correlation_id: str) -> tuple[EventEnvelope, ...]:
        """Envelopes published for a correlation, in order; empty if unknown."""
        with self._lock:
            correlation = self._correlations.get(correlation_id)
            return tuple(correlation.envelopes) if correlation else ()

    def annotations(self, correlation_id: str) -> tuple[TraceAnnotation, ...]:
        with self._lock:
            correlation = self._correlations.get(correlation_id)
            return tuple(correlation.annotations) if correlation else ()

    def correlation_ids(self) -> tuple[str, ...]:
        with self._lock:
            return tuple(self._correlations)

    @property
    def published_count(self) -> int:
        with self._lock:
            return self._published

    @property
    def delivered_count(self) -> int:
        with self._lock:
            return self._delivered

    # -- lifecycle --

    def wait_idle(self, timeout: float | None = None) -> bool:
        """Block until every enqueued delivery has finished; False on timeout."""
        with self._idle:
            return self._idle.wait_for(lambda: self._pending == 0, timeout)

    def close(self) -> None:
        with self._lock:
            self._closed = True
        self._executor.shutdown(wait=True)

    def __enter__(self) -> "SmellBus":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()
