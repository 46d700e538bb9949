"""Fold active collection sessions over the registry into a CubeState.

Everything here is a value: `apply_event`, `set_focus`, and the registry
mutations return new `EngineState`s, and `compute_cube_state` is a pure
function of its input. Callers that share an engine must serialize the
mutation stream themselves (the service does).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum

from .errors import (
    CategoryNotDeclared,
    StopWithoutSession,
    UnknownDevice,
    VersionRegression,
)
from .profiles import DevicePrivacyProfile, Registry, RegistryEntry
from .taxonomy import (
    AccessParty,
    DataCategory,
    Region,
    RetentionBucket,
    UsagePurpose,
    bucket_retention,
    region_of_country,
)

FACE_NAMES = ("top", "data", "storage", "access", "usage")


class EventType(Enum):
    START = "start"
    STOP = "stop"


@dataclass(frozen=True)
class CollectionEvent:
    """A device announcing that collection started or stopped.

    `categories` narrows a START to a subset of the declared categories;
    None means everything the profile declares. Must be absent on STOP.
    """

    variant: EventType
    device_id: str
    timestamp_ms: int
    categories: frozenset[DataCategory] | None = None


@dataclass(frozen=True)
class Session:
    device_id: str
    started_at_ms: int
    active_categories: frozenset[DataCategory]


@dataclass(frozen=True)
class Contributor:
    device_id: str
    colour: str  # #rrggbb


@dataclass(frozen=True)
class IconState:
    icon_id: str
    lit: bool
    contributors: tuple[Contributor, ...]
    identifiable: bool = False


@dataclass(frozen=True)
class CubeState:
    version: int
    timestamp_ms: int
    focus: str | None
    top: tuple[IconState, ...]
    data: tuple[IconState, ...]
    storage: tuple[IconState, ...]
    access: tuple[IconState, ...]
    usage: tuple[IconState, ...]

    def face(self, name: str) -> tuple[IconState, ...]:
        return getattr(self, name)

    def lit_icons(self, name: str) -> set[str]:
        return {icon.icon_id for icon in self.face(name) if icon.lit}


@dataclass(frozen=True)
class EngineState:
    registry: Registry
    sessions: dict[str, Session] = field(default_factory=dict)
    focus: str | None = None
    version: int = 0
    timestamp_ms: int = 0


def initial_state(registry: Registry) -> EngineState:
    return EngineState(registry=registry)


def apply_event(state: EngineState, event: CollectionEvent) -> EngineState:
    entry = state.registry.get(event.device_id)
    if entry is None:
        raise UnknownDevice(event.device_id)
    sessions = dict(state.sessions)
    if event.variant is EventType.START:
        declared = entry.profile.declared_categories
        if event.categories is None:
            active = declared
        else:
            if not event.categories:
                raise ValueError("START categories, when present, must be non-empty")
            for category in sorted(event.categories, key=lambda c: c.value):
                if category not in declared:
                    raise CategoryNotDeclared(event.device_id, category.value)
            active = frozenset(event.categories)
        sessions[event.device_id] = Session(event.device_id, event.timestamp_ms, active)
    else:
        if event.device_id not in sessions:
            raise StopWithoutSession(event.device_id)
        del sessions[event.device_id]
    return replace(
        state,
        sessions=sessions,
        version=state.version + 1,
        timestamp_ms=event.timestamp_ms,
    )


def set_focus(
    state: EngineState, target: str | None, timestamp_ms: int | None = None
) -> EngineState:
    if target is not None and target not in state.registry:
        raise UnknownDevice(target)
    return replace(
        state,
        focus=target,
        version=state.version + 1,
        timestamp_ms=state.timestamp_ms if timestamp_ms is None else timestamp_ms,
    )


def register_device(
    state: EngineState, profile: DevicePrivacyProfile, timestamp_ms: int | None = None
) -> EngineState:
    return replace(
        state,
        registry=state.registry.register(profile),
        version=state.version + 1,
        timestamp_ms=state.timestamp_ms if timestamp_ms is None else timestamp_ms,
    )


def unregister_device(
    state: EngineState, device_id: str, timestamp_ms: int | None = None
) -> EngineState:
    registry = state.registry.unregister(device_id)
    sessions = {d: s for d, s in state.sessions.items() if d != device_id}
    focus = None if state.focus == device_id else state.focus
    return replace(
        state,
        registry=registry,
        sessions=sessions,
        focus=focus,
        version=state.version + 1,
        timestamp_ms=state.timestamp_ms if timestamp_ms is None else timestamp_ms,
    )


def _icon(icon_id: str, contributors: list[RegistryEntry], identifiable: bool = False) -> IconState:
    return IconState(
        icon_id=icon_id,
        lit=bool(contributors),
        contributors=tuple(
            Contributor(e.profile.device_id, e.colour.hex) for e in contributors
        ),
        identifiable=identifiable,
    )


def compute_cube_state(state: EngineState) -> CubeState:
    """Project the engine state onto the five faces. Pure."""
    entries = state.registry.entries  # already in registration (index) order

    # The four notice faces see only the focused device; the top face always
    # shows every registered device with its live activity.
    if state.focus is None:
        notice_active = [e for e in entries if e.profile.device_id in state.sessions]
    else:
        notice_active = [
            e
            for e in entries
            if e.profile.device_id == state.focus and e.profile.device_id in state.sessions
        ]

    top = tuple(
        _icon(e.profile.device_id, [e] if e.profile.device_id in state.sessions else [])
        for e in entries
    )

    data = []
    for category in DataCategory:
        contributors = [
            e
            for e in notice_active
            if category in state.sessions[e.profile.device_id].active_categories
        ]
        identifiable = any(
            category in e.profile.identifiable_categories() for e in contributors
        )
        data.append(_icon(category.value, contributors, identifiable))

    storage = []
    for region in Region:
        contributors = [
            e
            for e in notice_active
            if any(region_of_country(c) is region for c in e.profile.storage_countries)
        ]
        storage.append(_icon(region.value, contributors))
    for bucket in RetentionBucket:
        contributors = [
            e for e in notice_active if bucket_retention(e.profile.retention) is bucket
        ]
        storage.append(_icon(bucket.value, contributors))

    access = [
        _icon(party.value, [e for e in notice_active if party in e.profile.access])
        for party in AccessParty
    ]
    usage = [
        _icon(purpose.value, [e for e in notice_active if purpose in e.profile.purposes])
        for purpose in UsagePurpose
    ]

    return CubeState(
        version=state.version,
        timestamp_ms=state.timestamp_ms,
        focus=state.focus,
        top=top,
        data=tuple(data),
        storage=tuple(storage),
        access=tuple(access),
        usage=tuple(usage),
    )


# ---------------------------------------------------------------------------
# Golden serialization: the one wire/file format for CubeStates and deltas.
# ---------------------------------------------------------------------------


def _icon_to_dict(icon: IconState) -> dict:
    return {
        "icon": icon.icon_id,
        "lit": icon.lit,
        "contributors": [
            {"device_id": c.device_id, "colour": c.colour} for c in icon.contributors
        ],
        "identifiable": icon.identifiable,
    }


def _icon_from_dict(obj: dict) -> IconState:
    return IconState(
        icon_id=obj["icon"],
        lit=obj["lit"],
        contributors=tuple(
            Contributor(c["device_id"], c["colour"]) for c in obj["contributors"]
        ),
        identifiable=obj["identifiable"],
    )


def cube_state_to_dict(state: CubeState) -> dict:
    return {
        "version": state.version,
        "timestamp_ms": state.timestamp_ms,
        "focus": state.focus,
        "top": [_icon_to_dict(i) for i in state.top],
        "data": [_icon_to_dict(i) for i in state.data],
        "storage": [_icon_to_dict(i) for i in state.storage],
        "access": [_icon_to_dict(i) for i in state.access],
        "usage": [_icon_to_dict(i) for i in state.usage],
    }


def cube_state_from_dict(obj: dict) -> CubeState:
    return CubeState(
        version=obj["version"],
        timestamp_ms=obj["timestamp_ms"],
        focus=obj["focus"],
        top=tuple(_icon_from_dict(i) for i in obj["top"]),
        data=tuple(_icon_from_dict(i) for i in obj["data"]),
        storage=tuple(_icon_from_dict(i) for i in obj["storage"]),
        access=tuple(_icon_from_dict(i) for i in obj["access"]),
        usage=tuple(_icon_from_dict(i) for i in obj["usage"]),
    )


def cube_state_to_json(state: CubeState) -> str:
    return json.dumps(cube_state_to_dict(state), separators=(",", ":"))


def cube_state_from_json(text: str | bytes) -> CubeState:
    return cube_state_from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# Deltas: the stream format between consecutive CubeStates.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StateDelta:
    """Changed icons between two CubeStates of the same engine lineage.

    `changed` holds icons whose (lit, contributors, identifiable) differ or
    that are new, in new-face order; `removed` holds icon ids that vanished
    (only the top face can shrink, on unregistration).
    """

    version: int
    timestamp_ms: int
    focus: str | None
    changed: dict[str, tuple[IconState, ...]]
    removed: dict[str, tuple[str, ...]]


def diff_states(old: CubeState, new: CubeState) -> StateDelta:
    if new.version < old.version:
        raise VersionRegression(old.version, new.version)
    changed: dict[str, tuple[IconState, ...]] = {}
    removed: dict[str, tuple[str, ...]] = {}
    for face in FACE_NAMES:
        old_by_id = {icon.icon_id: icon for icon in old.face(face)}
        new_ids = {icon.icon_id for icon in new.face(face)}
        changed[face] = tuple(
            icon for icon in new.face(face) if old_by_id.get(icon.icon_id) != icon
        )
        removed[face] = tuple(
            icon.icon_id for icon in old.face(face) if icon.icon_id not in new_ids
        )
    return StateDelta(
        version=new.version,
        timestamp_ms=new.timestamp_ms,
        focus=new.focus,
        changed=changed,
        removed=removed,
    )


def apply_delta(old: CubeState, delta: StateDelta) -> CubeState:
    """Reconstruct the newer CubeState from `old` plus a delta.

    New icons are appended in delta order, matching how faces grow (the top
    face only ever appends, because registration indices only grow).
    """
    if delta.version < old.version:
        raise VersionRegression(old.version, delta.version)
    faces: dict[str, tuple[IconState, ...]] = {}
    for face in FACE_NAMES:
        changed_by_id = {icon.icon_id: icon for icon in delta.changed.get(face, ())}
        removed = set(delta.removed.get(face, ()))
        icons = [
            changed_by_id.pop(icon.icon_id, icon)
            for icon in old.face(face)
            if icon.icon_id not in removed
        ]
        icons.extend(icon for icon in delta.changed.get(face, ()) if icon.icon_id in changed_by_id)
        faces[face] = tuple(icons)
    return CubeState(
        version=delta.version,
        timestamp_ms=delta.timestamp_ms,
        focus=delta.focus,
        top=faces["top"],
        data=faces["data"],
        storage=faces["storage"],
        access=faces["access"],
        usage=faces["usage"],
    )


def delta_to_dict(delta: StateDelta) -> dict:
    return {
        "version": delta.version,
        "timestamp_ms": delta.timestamp_ms,
        "focus": delta.focus,
        "changed": {
            face: [_icon_to_dict(i) for i in delta.changed.get(face, ())]
            for face in FACE_NAMES
        },
        "removed": {face: list(delta.removed.get(face, ())) for face in FACE_NAMES},
    }


def delta_from_dict(obj: dict) -> StateDelta:
    return StateDelta(
        version=obj["version"],
        timestamp_ms=obj["timestamp_ms"],
        focus=obj["focus"],
        changed={
            face: tuple(_icon_from_dict(i) for i in obj["changed"][face])
            for face in FACE_NAMES
        },
        removed={face: tuple(obj["removed"][face]) for face in FACE_NAMES},
    )


def delta_to_json(delta: StateDelta) -> str:
    return json.dumps(delta_to_dict(delta), separators=(",", ":"))
