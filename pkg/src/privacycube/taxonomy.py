"""Closed vocabularies for the five data-practice dimensions.

Also houses the derived lookups the notice faces are built from: retention
bucketing for the time-bar, country -> region mapping for the world map, and
the per-device colour generator.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Final

from .countries import COUNTRY_REGION
from .errors import NegativeDuration, UnknownCountry, UnknownTerm


class DataCategory(Enum):
    ENVIRONMENTAL = "environmental"
    BIOMETRIC = "biometric"
    AUDIO = "audio"
    LOCATION = "location"
    VISUAL = "visual"
    USAGE = "usage"


class UsagePurpose(Enum):
    REVENUE = "revenue"
    SURVEILLANCE = "surveillance"
    ANALYTICS = "analytics"
    SECURITY = "security"
    TARGETED_ADS = "targeted_ads"
    LIFESTYLE = "lifestyle"
    PRODUCTIVITY = "productivity"
    RESEARCH = "research"


class AccessParty(Enum):
    RESOURCE_OWNER = "resource_owner"
    TRUSTED_PARTY = "trusted_party"
    SERVICE_PROVIDER = "service_provider"
    DEVICE_MANUFACTURER = "device_manufacturer"
    LAW_ENFORCEMENT = "law_enforcement"
    THIRD_PARTY = "third_party"
    MARKETING = "marketing"


class Region(Enum):
    NORTH_AMERICA = "north_america"
    SOUTH_AMERICA = "south_america"
    EUROPE = "europe"
    AFRICA = "africa"
    ASIA = "asia"
    OCEANIA = "oceania"
    ANTARCTICA = "antarctica"


class RetentionBucket(Enum):
    """Time-bar segments, ordered shortest to longest (declaration order)."""

    SESSION_ONLY = "session_only"
    UP_TO_DAY = "up_to_day"
    UP_TO_WEEK = "up_to_week"
    UP_TO_MONTH = "up_to_month"
    UP_TO_YEAR = "up_to_year"
    LONGER = "longer"
    INDEFINITE = "indefinite"


# Finite retention is integer milliseconds; None means retained indefinitely.
INDEFINITE: Final = None
Retention = int | None

_TAXONOMY_KINDS: dict[str, type[Enum]] = {
    "category": DataCategory,
    "purpose": UsagePurpose,
    "party": AccessParty,
}

_NORMALIZE_RE = re.compile(r"[\s-]+")


def parse_taxonomy_term(kind: str, text: str) -> DataCategory | UsagePurpose | AccessParty:
    """Resolve a free-form label ("Targeted Ads") to its taxonomy value."""
    try:
        enum_cls = _TAXONOMY_KINDS[kind]
    except KeyError:
        raise ValueError(f"kind must be one of {sorted(_TAXONOMY_KINDS)}, got {kind!r}")
    canonical = _NORMALIZE_RE.sub("_", text.strip().lower())
    for value in enum_cls:
        if value.value == canonical:
            return value
    raise UnknownTerm(kind, text)


_MS_PER_HOUR = 3_600_000
_BUCKET_UPPER_BOUNDS_MS: Final = (
    (RetentionBucket.UP_TO_DAY, 24 * _MS_PER_HOUR),
    (RetentionBucket.UP_TO_WEEK, 168 * _MS_PER_HOUR),
    (RetentionBucket.UP_TO_MONTH, 720 * _MS_PER_HOUR),
    (RetentionBucket.UP_TO_YEAR, 8760 * _MS_PER_HOUR),
)


def bucket_retention(retention: Retention) -> RetentionBucket:
    """Map a retention period to its time-bar segment.

    Finite buckets are half-open with inclusive upper bounds:
    0 is session-only, then (0, 24h], (24h, 168h], (168h, 720h], (720h, 8760h],
    and anything beyond a year is "longer".
    """
    if retention is INDEFINITE:
        return RetentionBucket.INDEFINITE
    if retention < 0:
        raise NegativeDuration(retention)
    if retention == 0:
        return RetentionBucket.SESSION_ONLY
    for bucket, upper_ms in _BUCKET_UPPER_BOUNDS_MS:
        if retention <= upper_ms:
            return bucket
    return RetentionBucket.LONGER


def region_of_country(code: str) -> Region:
    """Continental region of an officially assigned ISO 3166-1 alpha-2 code."""
    region_name = COUNTRY_REGION.get(code)
    if region_name is None:
        raise UnknownCountry(code)
    return Region(region_name)


@dataclass(frozen=True)
class Colour:
    """Device colour in HSL; saturation and lightness are fixed by design."""

    hue: float
    saturation: int = 80
    lightness: int = 50

    @property
    def hex(self) -> str:
        # Exact-rational HSL -> RGB so hex output never depends on float
        # rounding artifacts (hues are exact multiples of 0.001 degrees).
        h = Fraction(round(self.hue * 1000), 60_000)  # sextant position
        s = Fraction(self.saturation, 100)
        l = Fraction(self.lightness, 100)
        c = (1 - abs(2 * l - 1)) * s
        x = c * (1 - abs((h % 2) - 1))
        sextant = int(h) % 6
        r1, g1, b1 = (
            (c, x, 0), (x, c, 0), (0, c, x), (0, x, c), (x, 0, c), (c, 0, x)
        )[sextant]
        m = l - c / 2
        channels = (round((v + m) * 255) for v in (r1, g1, b1))
        return "#" + "".join(f"{ch:02x}" for ch in channels)


# Hues are generated in exact milli-degrees: a 12-step base palette, then a
# golden-angle walk. Golden-angle hues that land in the red band reserved for
# the identifiability marker are shifted out of it.
_BASE_PALETTE_SIZE = 12
_BASE_STEP_MDEG = 30_000
_GOLDEN_ANGLE_MDEG = 137_508
_RED_BAND_LOW_MDEG = 10_000
_RED_BAND_HIGH_MDEG = 350_000
_RED_SHIFT_MDEG = 15_000
_FULL_CIRCLE_MDEG = 360_000


def colour_for_index(i: int) -> Colour:
    """Unique, stable colour for the i-th device registration."""
    if i < 0:
        raise ValueError(f"registration index must be >= 0, got {i}")
    if i < _BASE_PALETTE_SIZE:
        hue_mdeg = i * _BASE_STEP_MDEG
    else:
        hue_mdeg = (i * _GOLDEN_ANGLE_MDEG) % _FULL_CIRCLE_MDEG
        if hue_mdeg >= _RED_BAND_HIGH_MDEG or hue_mdeg < _RED_BAND_LOW_MDEG:
            hue_mdeg = (hue_mdeg + _RED_SHIFT_MDEG) % _FULL_CIRCLE_MDEG
    return Colour(hue=hue_mdeg / 1000.0)
