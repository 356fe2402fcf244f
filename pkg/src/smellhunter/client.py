"""Thin HTTP client for the gateway, shared by the CLI and tests."""

from __future__ import annotations

import httpx


class GatewayError(Exception):
    """The gateway answered with an error status."""

    def __init__(self, status_code: int, errors: list[dict]):
        self.status_code = status_code
        self.errors = errors
        detail = "; ".join(e.get("message", str(e)) for e in errors) or "no detail"
        super().__init__(f"HTTP {status_code}: {detail}")


def _errors_from(response: httpx.Response) -> list[dict]:
    try:
        body = response.json()
    except ValueError:
        return [{"message": response.text.strip() or response.reason_phrase}]
    if isinstance(body, dict) and isinstance(body.get("errors"), list):
        return body["errors"]
    return [{"message": str(body)}]


class GatewayClient:
    """Calls the gateway's endpoints and unwraps its JSON envelopes.

    Any httpx-compatible client can be injected (the test client included);
    by default a real one is built for ``base_url``.
    """

    def __init__(self, base_url: str, http: httpx.Client | None = None):
        if http is None:
            http = httpx.Client(base_url=base_url, timeout=30.0)
        self._http = http

    def _checked(self, response: httpx.Response) -> dict:
        if response.status_code >= 400:
            raise GatewayError(response.status_code, _errors_from(response))
        return response.json()

    def submit(
        self, script: bytes, metrics: bytes, thresholds: bytes, metadata: bytes
    ) -> dict:
        files = {
            "script": ("script", script),
            "metrics": ("metrics", metrics),
            "thresholds": ("thresholds", thresholds),
            "metadata": ("metadata", metadata),
        }
        return self._checked(self._http.post("/analyses", files=files))

    def status(self, correlation_id: str) -> dict:
        return self._checked(self._http.get(f"/analyses/{correlation_id}"))

    def detections(self, params: dict) -> dict:
        return self._checked(self._http.get("/detections", params=params))

    def histogram(self, params: dict) -> dict:
        return self._checked(self._http.get("/detections/histogram", params=params))

    def executions(self, params: dict) -> dict:
        return self._checked(self._http.get("/executions", params=params))

    def close(self) -> None:
        self._http.close()
