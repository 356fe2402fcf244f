"""Event-driven code smell detection platform.

Smell rules are written in a small threshold-comparison DSL, evaluated
against per-entity metric tables, and the detections are enriched with
request context (user, organization, project, geolocation) and kept in a
queryable history store.
"""

__version__ = "0.1.0"
