"""Shared test helpers: deterministic random profiles and brute-force oracles."""

from __future__ import annotations

import random

from privacycube.engine import (
    CollectionEvent,
    CubeState,
    EngineState,
    EventType,
    apply_event,
    compute_cube_state,
    initial_state,
)
from privacycube.profiles import CollectionDeclaration, DevicePrivacyProfile, Registry
from privacycube.taxonomy import (
    INDEFINITE,
    AccessParty,
    DataCategory,
    UsagePurpose,
)

# One country per region plus a few extras, so random profiles exercise the map.
COUNTRY_POOL = ["US", "BR", "DE", "KE", "JP", "AU", "AQ", "CA", "FR", "IN", "MX", "NZ"]

RETENTION_POOL = [
    0,
    1,
    3_600_000,  # 1h
    86_400_000,  # 24h
    86_400_001,
    604_800_000,  # 168h
    2_592_000_000,  # 720h
    31_536_000_000,  # 8760h
    31_536_000_001,
    INDEFINITE,
]


def sample_nonempty(rng: random.Random, values: list) -> list:
    k = rng.randint(1, len(values))
    return rng.sample(values, k)


def make_random_profile(rng: random.Random, device_id: str) -> DevicePrivacyProfile:
    declarations = frozenset(
        CollectionDeclaration(category, rng.random() < 0.5)
        for category in sample_nonempty(rng, list(DataCategory))
    )
    return DevicePrivacyProfile(
        device_id=device_id,
        display_name=f"Device {device_id}",
        device_kind=rng.choice(["lock", "camera", "speaker", "thermostat", "plug"]),
        declarations=declarations,
        purposes=frozenset(sample_nonempty(rng, list(UsagePurpose))),
        access=frozenset(sample_nonempty(rng, list(AccessParty))),
        storage_countries=frozenset(sample_nonempty(rng, COUNTRY_POOL)[:3]),
        retention=rng.choice(RETENTION_POOL),
    )


def make_random_registry(rng: random.Random, n_devices: int) -> Registry:
    registry = Registry()
    for i in range(n_devices):
        registry = registry.register(make_random_profile(rng, f"dev-{i}"))
    return registry


def start_event(device_id: str, t_ms: int = 0, categories=None) -> CollectionEvent:
    cats = None if categories is None else frozenset(categories)
    return CollectionEvent(EventType.START, device_id, t_ms, cats)


def stop_event(device_id: str, t_ms: int = 0) -> CollectionEvent:
    return CollectionEvent(EventType.STOP, device_id, t_ms)


def singleton_cube_state(registry: Registry, session_device: str, categories=None) -> CubeState:
    """Oracle building block: the cube with exactly one device's session active."""
    state = initial_state(registry)
    state = apply_event(state, start_event(session_device, categories=categories))
    return compute_cube_state(state)


def union_oracle_lit(registry: Registry, active: dict[str, frozenset | None]) -> dict[str, set[str]]:
    """Brute force: per-face lit sets as the union over singleton-session runs."""
    union: dict[str, set[str]] = {"data": set(), "storage": set(), "access": set(), "usage": set()}
    for device_id, categories in active.items():
        cube = singleton_cube_state(registry, device_id, categories)
        for face in union:
            union[face] |= cube.lit_icons(face)
    return union


def union_oracle_contributors(
    registry: Registry, active: dict[str, frozenset | None]
) -> dict[str, dict[str, list[str]]]:
    """Brute force per-icon contributor lists, merged and ordered by index."""
    merged: dict[str, dict[str, set[str]]] = {
        "data": {}, "storage": {}, "access": {}, "usage": {}
    }
    for device_id, categories in active.items():
        cube = singleton_cube_state(registry, device_id, categories)
        for face in merged:
            for icon in cube.face(face):
                for contributor in icon.contributors:
                    merged[face].setdefault(icon.icon_id, set()).add(contributor.device_id)
    order = {e.profile.device_id: e.index for e in registry.entries}
    return {
        face: {
            icon_id: sorted(devices, key=lambda d: order[d])
            for icon_id, devices in icons.items()
        }
        for face, icons in merged.items()
    }


def engine_with_sessions(registry: Registry, active: dict[str, frozenset | None]) -> EngineState:
    state = initial_state(registry)
    for device_id, categories in active.items():
        state = apply_event(state, start_event(device_id, categories=categories))
    return state
