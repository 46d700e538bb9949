"""Error vocabulary shared by the whole package.

Every error carries a stable machine-readable ``code`` so the service can
hand it to HTTP clients unchanged and the CLI can report it uniformly.
"""

from __future__ import annotations


class PrivacyCubeError(Exception):
    """Base class; ``code`` is the machine-readable identifier."""

    code = "error"


class UnknownTerm(PrivacyCubeError):
    code = "unknown_term"

    def __init__(self, kind: str, text: str):
        super().__init__(f"unknown {kind} term: {text!r}")
        self.kind = kind
        self.text = text


class NegativeDuration(PrivacyCubeError):
    code = "negative_duration"

    def __init__(self, ms: int):
        super().__init__(f"duration must be >= 0, got {ms} ms")
        self.ms = ms


class UnknownCountry(PrivacyCubeError):
    code = "unknown_country"

    def __init__(self, code_text: str):
        super().__init__(f"not an assigned ISO 3166-1 alpha-2 code: {code_text!r}")
        self.country = code_text


class MalformedDocument(PrivacyCubeError):
    code = "malformed_document"

    def __init__(self, position: str, message: str):
        super().__init__(f"malformed document at {position}: {message}")
        self.position = position


class MissingField(PrivacyCubeError):
    code = "missing_field"

    def __init__(self, name: str):
        super().__init__(f"missing required field: {name}")
        self.name = name


class DuplicateDeclaration(PrivacyCubeError):
    code = "duplicate_declaration"

    def __init__(self, category: str):
        super().__init__(f"category declared more than once: {category}")
        self.category = category


class InvalidCountry(PrivacyCubeError):
    code = "invalid_country"

    def __init__(self, code_text: str):
        super().__init__(f"invalid storage country code: {code_text!r}")
        self.country = code_text


class DuplicateDeviceId(PrivacyCubeError):
    code = "duplicate_device_id"

    def __init__(self, device_id: str):
        super().__init__(f"device already registered: {device_id}")
        self.device_id = device_id


class UnknownDevice(PrivacyCubeError):
    code = "unknown_device"

    def __init__(self, device_id: str):
        super().__init__(f"device not registered: {device_id}")
        self.device_id = device_id


class StopWithoutSession(PrivacyCubeError):
    code = "stop_without_session"

    def __init__(self, device_id: str):
        super().__init__(f"stop for device with no active session: {device_id}")
        self.device_id = device_id


class CategoryNotDeclared(PrivacyCubeError):
    code = "category_not_declared"

    def __init__(self, device_id: str, category: str):
        super().__init__(f"device {device_id} does not declare category {category}")
        self.device_id = device_id
        self.category = category


class VersionRegression(PrivacyCubeError):
    code = "version_regression"

    def __init__(self, old_version: int, new_version: int):
        super().__init__(f"version regressed from {old_version} to {new_version}")
        self.old_version = old_version
        self.new_version = new_version


class TimestampsOutOfOrder(PrivacyCubeError):
    code = "timestamps_out_of_order"

    def __init__(self, index: int, t_ms: int, previous_ms: int):
        super().__init__(
            f"event {index} at t={t_ms}ms precedes previous event at t={previous_ms}ms"
        )
        self.index = index
        self.t_ms = t_ms
        self.previous_ms = previous_ms


class UnknownDeviceRef(PrivacyCubeError):
    code = "unknown_device_ref"

    def __init__(self, device_id: str, where: str):
        super().__init__(f"device {device_id!r} referenced by {where} is not available")
        self.device_id = device_id
        self.where = where


class ScenarioRunError(PrivacyCubeError):
    code = "scenario_run_error"

    def __init__(self, event_index: int, cause: PrivacyCubeError):
        super().__init__(f"event {event_index} failed: {cause}")
        self.event_index = event_index
        self.cause = cause


class CorruptEntry(PrivacyCubeError):
    code = "corrupt_entry"

    def __init__(self, line_number: int, message: str):
        super().__init__(f"corrupt event-log entry at line {line_number}: {message}")
        self.line_number = line_number


class SequenceGap(PrivacyCubeError):
    code = "sequence_gap"

    def __init__(self, expected: int, found: int):
        super().__init__(f"event-log sequence gap: expected {expected}, found {found}")
        self.expected = expected
        self.found = found
