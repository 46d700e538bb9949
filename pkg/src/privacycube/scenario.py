"""Scripted event traces and deterministic notice logs.

Scenario timestamps are virtual milliseconds from scenario start, so a run
under the instant clock is fully reproducible; the scaled clock replays the
same trace against wall time for live demos.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass

from .engine import (
    CollectionEvent,
    CubeState,
    EngineState,
    EventType,
    apply_event,
    compute_cube_state,
    cube_state_from_dict,
    cube_state_to_dict,
    initial_state,
    set_focus,
)
from .errors import (
    MalformedDocument,
    MissingField,
    PrivacyCubeError,
    ScenarioRunError,
    TimestampsOutOfOrder,
    UnknownDeviceRef,
)
from .profiles import Registry
from .taxonomy import DataCategory, parse_taxonomy_term

SCENARIO_EXTENSION = ".scn.json"
NOTICE_LOG_EXTENSION = ".nlog.jsonl"

_EVENT_TYPES = ("start", "stop", "focus")


@dataclass(frozen=True)
class ScenarioEvent:
    t_ms: int
    type: str  # start | stop | focus
    device_id: str | None
    categories: frozenset[DataCategory] | None = None

    def to_dict(self) -> dict:
        out: dict = {"t_ms": self.t_ms, "type": self.type, "device_id": self.device_id}
        if self.categories is not None:
            out["categories"] = sorted(c.value for c in self.categories)
        return out


@dataclass(frozen=True)
class Scenario:
    name: str
    profile_refs: tuple[str, ...]
    events: tuple[ScenarioEvent, ...]


def parse_scenario(document: bytes | str) -> Scenario:
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        obj = json.loads(document)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"line {exc.lineno} column {exc.colno}", exc.msg)
    if not isinstance(obj, dict):
        raise MalformedDocument("/", "expected a JSON object")
    for name in ("name", "profile_refs", "events"):
        if name not in obj:
            raise MissingField(name)
    if not isinstance(obj["name"], str) or not obj["name"]:
        raise MalformedDocument("/name", "expected a non-empty string")
    if not isinstance(obj["profile_refs"], list) or not all(
        isinstance(r, str) for r in obj["profile_refs"]
    ):
        raise MalformedDocument("/profile_refs", "expected an array of device ids")
    refs = tuple(obj["profile_refs"])
    if not isinstance(obj["events"], list):
        raise MalformedDocument("/events", "expected an array")

    events: list[ScenarioEvent] = []
    previous_ms = 0
    for i, item in enumerate(obj["events"]):
        where = f"/events/{i}"
        if not isinstance(item, dict):
            raise MalformedDocument(where, "expected an object")
        if "t_ms" not in item or not isinstance(item["t_ms"], int) or item["t_ms"] < 0:
            raise MalformedDocument(f"{where}/t_ms", "expected a non-negative integer")
        t_ms = item["t_ms"]
        if events and t_ms < previous_ms:
            raise TimestampsOutOfOrder(i, t_ms, previous_ms)
        previous_ms = t_ms
        event_type = item.get("type")
        if event_type not in _EVENT_TYPES:
            raise MalformedDocument(f"{where}/type", f"expected one of {_EVENT_TYPES}")
        if "device_id" not in item:
            raise MalformedDocument(f"{where}/device_id", "missing")
        device_id = item["device_id"]
        if device_id is None and event_type != "focus":
            raise MalformedDocument(f"{where}/device_id", "only focus may be null")
        if device_id is not None and not isinstance(device_id, str):
            raise MalformedDocument(f"{where}/device_id", "expected a string or null")
        if device_id is not None and device_id not in refs:
            raise UnknownDeviceRef(device_id, f"event {i}")
        categories = None
        if "categories" in item:
            if event_type != "start":
                raise MalformedDocument(f"{where}/categories", "only start events take categories")
            raw = item["categories"]
            if not isinstance(raw, list) or not raw:
                raise MalformedDocument(f"{where}/categories", "expected a non-empty array")
            categories = frozenset(parse_taxonomy_term("category", c) for c in raw)
        extra = set(item) - {"t_ms", "type", "device_id", "categories"}
        if extra:
            raise MalformedDocument(f"{where}/{sorted(extra)[0]}", "unknown field")
        events.append(ScenarioEvent(t_ms, event_type, device_id, categories))

    return Scenario(name=obj["name"], profile_refs=refs, events=tuple(events))


class InstantClock:
    """Ignores wall time entirely; entry wall timestamps are the virtual ones."""

    def advance_to(self, t_ms: int) -> None:
        pass

    def now_ms(self, virtual_ms: int) -> int:
        return virtual_ms


class ScaledClock:
    """Sleeps the inter-event gaps divided by `factor`; stamps real wall time."""

    def __init__(self, factor: float):
        if factor <= 0:
            raise ValueError(f"clock factor must be > 0, got {factor}")
        self.factor = factor
        self._cursor_ms = 0

    def advance_to(self, t_ms: int) -> None:
        gap_ms = t_ms - self._cursor_ms
        if gap_ms > 0:
            time.sleep(gap_ms / 1000.0 / self.factor)
        self._cursor_ms = max(self._cursor_ms, t_ms)

    def now_ms(self, virtual_ms: int) -> int:
        return int(time.time() * 1000)


@dataclass(frozen=True)
class NoticeLogEntry:
    trigger: dict | str  # "initial" or the scenario event as written
    wall_ms: int
    state: CubeState


@dataclass(frozen=True)
class NoticeLog:
    scenario: str
    entries: tuple[NoticeLogEntry, ...]


def _apply_scenario_event(state: EngineState, event: ScenarioEvent) -> EngineState:
    if event.type == "focus":
        return set_focus(state, event.device_id, timestamp_ms=event.t_ms)
    variant = EventType.START if event.type == "start" else EventType.STOP
    return apply_event(
        state,
        CollectionEvent(
            variant=variant,
            device_id=event.device_id,
            timestamp_ms=event.t_ms,
            categories=event.categories,
        ),
    )


def run_scenario(
    scenario: Scenario, registry: Registry, clock: InstantClock | ScaledClock | None = None
) -> NoticeLog:
    """Drive a fresh engine through the scenario; one log entry per event."""
    clock = clock or InstantClock()
    for ref in scenario.profile_refs:
        if ref not in registry:
            raise UnknownDeviceRef(ref, "profile_refs")
    state = initial_state(registry)
    entries = [NoticeLogEntry("initial", clock.now_ms(0), compute_cube_state(state))]
    for index, event in enumerate(scenario.events):
        clock.advance_to(event.t_ms)
        try:
            state = _apply_scenario_event(state, event)
        except PrivacyCubeError as exc:
            raise ScenarioRunError(index, exc)
        entries.append(
            NoticeLogEntry(event.to_dict(), clock.now_ms(event.t_ms), compute_cube_state(state))
        )
    return NoticeLog(scenario=scenario.name, entries=tuple(entries))


def write_notice_log(log: NoticeLog) -> bytes:
    """One line per entry: trigger, wall-clock stamp, and the golden CubeState."""
    lines = []
    for entry in log.entries:
        lines.append(
            json.dumps(
                {
                    "trigger": entry.trigger,
                    "wall_ms": entry.wall_ms,
                    "state": cube_state_to_dict(entry.state),
                },
                separators=(",", ":"),
            )
        )
    return ("\n".join(lines) + "\n").encode("utf-8") if lines else b""


def read_notice_log(data: bytes, scenario: str = "") -> NoticeLog:
    entries = []
    for line in data.decode("utf-8").splitlines():
        if not line:
            continue
        obj = json.loads(line)
        entries.append(
            NoticeLogEntry(obj["trigger"], obj["wall_ms"], cube_state_from_dict(obj["state"]))
        )
    return NoticeLog(scenario=scenario, entries=tuple(entries))


def parse_clock_spec(spec: str) -> InstantClock | ScaledClock:
    """CLI clock flag: `instant` or `scaled:<factor>`."""
    if spec == "instant":
        return InstantClock()
    if spec.startswith("scaled:"):
        try:
            factor = float(spec.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad clock factor in {spec!r}")
        return ScaledClock(factor)
    raise ValueError(f"clock must be 'instant' or 'scaled:<factor>', got {spec!r}")
