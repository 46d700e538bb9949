"""Device privacy profiles: the `.pcp.json` document format and the registry.

A profile declares a device's data practices across all five dimensions.
The registry holds registered profiles and assigns each device its unique
colour; it is a value, so mutations return new registries.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from pathlib import Path

from .errors import (
    DuplicateDeclaration,
    DuplicateDeviceId,
    InvalidCountry,
    MalformedDocument,
    MissingField,
    PrivacyCubeError,
    UnknownCountry,
    UnknownDevice,
)
from .taxonomy import (
    INDEFINITE,
    AccessParty,
    Colour,
    DataCategory,
    Retention,
    UsagePurpose,
    colour_for_index,
    parse_taxonomy_term,
    region_of_country,
)

PROFILE_EXTENSION = ".pcp.json"

_DEVICE_ID_RE = re.compile(r"^[a-z0-9_-]{1,64}$")

# P[nY][nM][nW][nD][T[nH][nM][nS]] with fixed conversions Y=365d, M=30d, W=7d;
# seconds may carry up to millisecond precision.
_DURATION_RE = re.compile(
    r"^P(?:(\d+)Y)?(?:(\d+)M)?(?:(\d+)W)?(?:(\d+)D)?"
    r"(?:T(?:(\d+)H)?(?:(\d+)M)?(?:(\d+)(?:\.(\d{1,3}))?S)?)?$"
)

_MS_PER_SECOND = 1000
_MS_PER_MINUTE = 60 * _MS_PER_SECOND
_MS_PER_HOUR = 60 * _MS_PER_MINUTE
_MS_PER_DAY = 24 * _MS_PER_HOUR


def parse_iso_duration(text: str) -> int:
    """ISO-8601 duration string -> milliseconds. Raises ValueError."""
    match = _DURATION_RE.match(text)
    if match is None or not any(match.groups()):
        raise ValueError(f"not an ISO-8601 duration: {text!r}")
    years, months, weeks, days, hours, minutes, seconds, fraction = match.groups()
    ms = 0
    ms += int(years or 0) * 365 * _MS_PER_DAY
    ms += int(months or 0) * 30 * _MS_PER_DAY
    ms += int(weeks or 0) * 7 * _MS_PER_DAY
    ms += int(days or 0) * _MS_PER_DAY
    ms += int(hours or 0) * _MS_PER_HOUR
    ms += int(minutes or 0) * _MS_PER_MINUTE
    ms += int(seconds or 0) * _MS_PER_SECOND
    if fraction:
        ms += int(fraction.ljust(3, "0"))
    return ms


def format_iso_duration(ms: int) -> str:
    """Milliseconds -> canonical ISO-8601 rendering (days at most)."""
    if ms < 0:
        raise ValueError(f"duration must be >= 0, got {ms}")
    if ms == 0:
        return "PT0S"
    days, ms = divmod(ms, _MS_PER_DAY)
    hours, ms = divmod(ms, _MS_PER_HOUR)
    minutes, ms = divmod(ms, _MS_PER_MINUTE)
    seconds, millis = divmod(ms, _MS_PER_SECOND)
    out = "P"
    if days:
        out += f"{days}D"
    if hours or minutes or seconds or millis:
        out += "T"
        if hours:
            out += f"{hours}H"
        if minutes:
            out += f"{minutes}M"
        if millis:
            out += f"{seconds}.{millis:03d}S"
        elif seconds:
            out += f"{seconds}S"
    return out


@dataclass(frozen=True)
class CollectionDeclaration:
    category: DataCategory
    identifiable: bool


@dataclass(frozen=True)
class DevicePrivacyProfile:
    device_id: str
    display_name: str
    device_kind: str
    declarations: frozenset[CollectionDeclaration]
    purposes: frozenset[UsagePurpose]
    access: frozenset[AccessParty]
    storage_countries: frozenset[str]
    retention: Retention

    @property
    def declared_categories(self) -> frozenset[DataCategory]:
        return frozenset(d.category for d in self.declarations)

    def identifiable_categories(self) -> frozenset[DataCategory]:
        return frozenset(d.category for d in self.declarations if d.identifiable)


def _require(obj: dict, name: str):
    if name not in obj:
        raise MissingField(name)
    return obj[name]


def _require_str(obj: dict, name: str) -> str:
    value = _require(obj, name)
    if not isinstance(value, str):
        raise MalformedDocument(f"/{name}", "expected a string")
    return value


def _require_list(obj: dict, name: str) -> list:
    value = _require(obj, name)
    if not isinstance(value, list) or not value:
        raise MalformedDocument(f"/{name}", "expected a non-empty array")
    return value


_PROFILE_FIELDS = (
    "device_id",
    "display_name",
    "device_kind",
    "declarations",
    "purposes",
    "access",
    "storage_countries",
    "retention",
)


def parse_profile(document: bytes | str) -> DevicePrivacyProfile:
    """Parse and validate a `.pcp.json` profile document."""
    if isinstance(document, bytes):
        try:
            document = document.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedDocument(f"byte {exc.start}", "not valid UTF-8")
    try:
        obj = json.loads(document)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"line {exc.lineno} column {exc.colno}", exc.msg)
    if not isinstance(obj, dict):
        raise MalformedDocument("/", "expected a JSON object")
    for key in obj:
        if key not in _PROFILE_FIELDS:
            raise MalformedDocument(f"/{key}", "unknown field")

    device_id = _require_str(obj, "device_id")
    if not _DEVICE_ID_RE.match(device_id):
        raise MalformedDocument(
            "/device_id", "must be 1-64 chars from [a-z0-9_-]"
        )
    display_name = _require_str(obj, "display_name")
    if not display_name:
        raise MalformedDocument("/display_name", "must be non-empty")
    device_kind = _require_str(obj, "device_kind")

    declarations: list[CollectionDeclaration] = []
    seen_categories: set[DataCategory] = set()
    for i, item in enumerate(_require_list(obj, "declarations")):
        where = f"/declarations/{i}"
        if not isinstance(item, dict):
            raise MalformedDocument(where, "expected an object")
        if "category" not in item:
            raise MalformedDocument(f"{where}/category", "missing")
        if "identifiable" not in item:
            raise MalformedDocument(f"{where}/identifiable", "missing")
        if not isinstance(item["category"], str):
            raise MalformedDocument(f"{where}/category", "expected a string")
        category = parse_taxonomy_term("category", item["category"])
        if not isinstance(item["identifiable"], bool):
            raise MalformedDocument(f"{where}/identifiable", "expected a boolean")
        if category in seen_categories:
            raise DuplicateDeclaration(category.value)
        seen_categories.add(category)
        declarations.append(CollectionDeclaration(category, item["identifiable"]))

    def parse_terms(name: str, kind: str) -> frozenset:
        values = []
        for i, term in enumerate(_require_list(obj, name)):
            if not isinstance(term, str):
                raise MalformedDocument(f"/{name}/{i}", "expected a string")
            value = parse_taxonomy_term(kind, term)
            if value in values:
                raise MalformedDocument(f"/{name}/{i}", f"duplicate term {term!r}")
            values.append(value)
        return frozenset(values)

    purposes = parse_terms("purposes", "purpose")
    access = parse_terms("access", "party")

    countries: list[str] = []
    for i, code in enumerate(_require_list(obj, "storage_countries")):
        if not isinstance(code, str):
            raise MalformedDocument(f"/storage_countries/{i}", "expected a string")
        try:
            region_of_country(code)
        except UnknownCountry:
            raise InvalidCountry(code)
        if code in countries:
            raise MalformedDocument(f"/storage_countries/{i}", f"duplicate country {code!r}")
        countries.append(code)

    retention_text = _require_str(obj, "retention")
    if retention_text == "indefinite":
        retention: Retention = INDEFINITE
    else:
        try:
            retention = parse_iso_duration(retention_text)
        except ValueError:
            raise MalformedDocument(
                "/retention", "expected an ISO-8601 duration or \"indefinite\""
            )

    return DevicePrivacyProfile(
        device_id=device_id,
        display_name=display_name,
        device_kind=device_kind,
        declarations=frozenset(declarations),
        purposes=purposes,
        access=access,
        storage_countries=frozenset(countries),
        retention=retention,
    )


def profile_to_dict(profile: DevicePrivacyProfile) -> dict:
    """Canonical dict form: fixed field order, set members sorted."""
    return {
        "device_id": profile.device_id,
        "display_name": profile.display_name,
        "device_kind": profile.device_kind,
        "declarations": [
            {"category": d.category.value, "identifiable": d.identifiable}
            for d in sorted(profile.declarations, key=lambda d: d.category.value)
        ],
        "purposes": sorted(p.value for p in profile.purposes),
        "access": sorted(a.value for a in profile.access),
        "storage_countries": sorted(profile.storage_countries),
        "retention": "indefinite"
        if profile.retention is INDEFINITE
        else format_iso_duration(profile.retention),
    }


def canonicalize_profile(profile: DevicePrivacyProfile) -> bytes:
    """Deterministic byte rendering; parse_profile inverts it exactly."""
    return (json.dumps(profile_to_dict(profile), indent=2) + "\n").encode("utf-8")


@dataclass(frozen=True)
class RegistryEntry:
    profile: DevicePrivacyProfile
    colour: Colour
    index: int


@dataclass(frozen=True)
class Registry:
    """Registered profiles in registration order, each with its colour.

    Indices only ever grow, so a device keeps its colour for the lifetime of
    the registry no matter what is unregistered around it.
    """

    entries: tuple[RegistryEntry, ...] = ()
    next_index: int = 0

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, device_id: str) -> bool:
        return any(e.profile.device_id == device_id for e in self.entries)

    def get(self, device_id: str) -> RegistryEntry | None:
        for entry in self.entries:
            if entry.profile.device_id == device_id:
                return entry
        return None

    def device_ids(self) -> tuple[str, ...]:
        return tuple(e.profile.device_id for e in self.entries)

    def register(self, profile: DevicePrivacyProfile) -> Registry:
        if profile.device_id in self:
            raise DuplicateDeviceId(profile.device_id)
        entry = RegistryEntry(profile, colour_for_index(self.next_index), self.next_index)
        return Registry(self.entries + (entry,), self.next_index + 1)

    def unregister(self, device_id: str) -> Registry:
        if device_id not in self:
            raise UnknownDevice(device_id)
        kept = tuple(e for e in self.entries if e.profile.device_id != device_id)
        return replace(self, entries=kept)


def registry_to_dict(registry: Registry) -> dict:
    return {
        "devices": [
            {
                **profile_to_dict(entry.profile),
                "registration_index": entry.index,
                "colour": {
                    "hue": entry.colour.hue,
                    "saturation": entry.colour.saturation,
                    "lightness": entry.colour.lightness,
                    "hex": entry.colour.hex,
                },
            }
            for entry in registry.entries
        ]
    }


def canonicalize_registry(registry: Registry) -> bytes:
    return (json.dumps(registry_to_dict(registry), indent=2) + "\n").encode("utf-8")


def load_profile_dir(directory: str | Path) -> Registry:
    """Register every `*.pcp.json` under `directory`, lexicographic order.

    All-or-nothing: the first bad file aborts the load with its name attached.
    """
    directory = Path(directory)
    registry = Registry()
    for path in sorted(directory.glob(f"*{PROFILE_EXTENSION}")):
        try:
            profile = parse_profile(path.read_bytes())
            registry = registry.register(profile)
        except PrivacyCubeError as exc:
            exc.args = (f"{path.name}: {exc}",)
            exc.filename = str(path)  # type: ignore[attr-defined]
            raise
    return registry
