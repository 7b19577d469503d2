"""Exception hierarchy shared across the engine.

Every error carries a short machine-readable ``code`` so the HTTP service
can emit ``{code, message, detail}`` bodies without inspecting types.
"""
from __future__ import annotations


class SemcostError(Exception):
    code = "error"

    def __init__(self, message: str, detail: str = ""):
        super().__init__(message)
        self.message = message
        self.detail = detail


class ScenarioParseError(SemcostError):
    code = "scenario_parse"


class ScenarioValidationError(SemcostError):
    """Invalid scenario content; ``field`` names the offending entry."""

    code = "scenario_invalid"

    def __init__(self, field: str, message: str):
        super().__init__(message, detail=field)
        self.field = field


class FieldError(SemcostError):
    code = "field"


class FusionError(SemcostError):
    code = "fusion"


class SensorError(SemcostError):
    code = "sensor"


class SensorTransportError(SensorError):
    code = "sensor_transport"


class SensorParseError(SensorError):
    """Backend produced unusable output; ``raw`` keeps it verbatim for audit."""

    code = "sensor_parse"

    def __init__(self, message: str, raw: str = ""):
        super().__init__(message, detail=raw)
        self.raw = raw


class PlannerError(SemcostError):
    code = "planner"


class NoPathError(PlannerError):
    code = "no_path"

    def __init__(self, message: str, expansions: dict | None = None):
        super().__init__(message)
        self.expansions = expansions or {}


class SessionError(SemcostError):
    code = "session"


class NothingToUndoError(SessionError):
    code = "nothing_to_undo"


class StateFormatError(SessionError):
    code = "state_format"
