"""Geospatial primitives: geohash encode/decode/center and great-circle distance.

All functions are pure and stateless. Geohashes use the standard Base32
alphabet (no a/i/l/o) with longitude/latitude interval bisection starting
on longitude, five bits per character.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidGeohashError, InvalidPointError, InvalidPrecisionError

BASE32 = "0123456789bcdefghjkmnpqrstuvwxyz"
_CHAR_INDEX = {c: i for i, c in enumerate(BASE32)}

#: Beyond 12 characters double precision stops buying resolution.
MAX_PRECISION = 12

#: Earth mean radius in statute miles.
EARTH_RADIUS_MILES = 3958.8


@dataclass(frozen=True, slots=True)
class GeoPoint:
    """A WGS-84 style coordinate. lat in [-90, 90], lon normalized to [-180, 180)."""

    lat: float
    lon: float

    def __post_init__(self):
        lat, lon = float(self.lat), float(self.lon)
        if not (math.isfinite(lat) and math.isfinite(lon)):
            raise InvalidPointError(f"non-finite coordinates ({self.lat}, {self.lon})")
        if not -90.0 <= lat <= 90.0:
            raise InvalidPointError(f"latitude {lat} outside [-90, 90]")
        if not -180.0 <= lon <= 180.0:
            raise InvalidPointError(f"longitude {lon} outside [-180, 180]")
        if lon == 180.0:  # fold the dual representation of the antimeridian
            lon = -180.0
        object.__setattr__(self, "lat", lat)
        object.__setattr__(self, "lon", lon)


@dataclass(frozen=True, slots=True)
class Geohash:
    """A Base32 geohash cell. Precision is the character count."""

    code: str

    def __post_init__(self):
        if not self.code:
            raise InvalidGeohashError("empty geohash")
        for ch in self.code:
            if ch not in _CHAR_INDEX:
                raise InvalidGeohashError(f"character {ch!r} not in geohash alphabet")

    @property
    def precision(self) -> int:
        return len(self.code)

    def __str__(self) -> str:
        return self.code


@dataclass(frozen=True, slots=True)
class BoundingBox:
    """A lat/lon axis-aligned box with min < max on both axes."""

    min_lat: float
    max_lat: float
    min_lon: float
    max_lon: float

    def contains(self, p: GeoPoint) -> bool:
        return (self.min_lat <= p.lat <= self.max_lat
                and self.min_lon <= p.lon <= self.max_lon)

    def center(self) -> GeoPoint:
        return GeoPoint((self.min_lat + self.max_lat) / 2.0,
                        (self.min_lon + self.max_lon) / 2.0)


def encode(p: GeoPoint, precision: int) -> Geohash:
    """Encode a point as a geohash of the given precision (1..12).

    Bisection alternates longitude/latitude starting with longitude; a point
    sitting exactly on a bisection midpoint goes to the upper half, matching
    the de-facto geohash standard.
    """
    if not isinstance(precision, int) or isinstance(precision, bool):
        raise InvalidPrecisionError(f"precision must be an integer, got {precision!r}")
    if not 1 <= precision <= MAX_PRECISION:
        raise InvalidPrecisionError(f"precision {precision} outside [1, {MAX_PRECISION}]")
    if not isinstance(p, GeoPoint):
        p = GeoPoint(*p)

    lat_lo, lat_hi = -90.0, 90.0
    lon_lo, lon_hi = -180.0, 180.0
    even = True
    ch = 0
    bit = 0
    out: list[str] = []
    while len(out) < precision:
        if even:
            mid = (lon_lo + lon_hi) / 2.0
            if p.lon >= mid:
                ch = (ch << 1) | 1
                lon_lo = mid
            else:
                ch <<= 1
                lon_hi = mid
        else:
            mid = (lat_lo + lat_hi) / 2.0
            if p.lat >= mid:
                ch = (ch << 1) | 1
                lat_lo = mid
            else:
                ch <<= 1
                lat_hi = mid
        even = not even
        if bit < 4:
            bit += 1
        else:
            out.append(BASE32[ch])
            ch = 0
            bit = 0
    return Geohash("".join(out))


def decode_bbox(g: Geohash | str) -> BoundingBox:
    """Return the exact bounding box of a geohash cell."""
    if not isinstance(g, Geohash):
        g = Geohash(g)
    lat_lo, lat_hi = -90.0, 90.0
    lon_lo, lon_hi = -180.0, 180.0
    even = True
    for ch in g.code:
        idx = _CHAR_INDEX[ch]
        for shift in (4, 3, 2, 1, 0):
            bit = (idx >> shift) & 1
            if even:
                mid = (lon_lo + lon_hi) / 2.0
                if bit:
                    lon_lo = mid
                else:
                    lon_hi = mid
            else:
                mid = (lat_lo + lat_hi) / 2.0
                if bit:
                    lat_lo = mid
                else:
                    lat_hi = mid
            even = not even
    return BoundingBox(lat_lo, lat_hi, lon_lo, lon_hi)


def center(g: Geohash | str) -> GeoPoint:
    """Return the midpoint of the geohash cell on both axes."""
    return decode_bbox(g).center()


def haversine_miles(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in statute miles (Earth mean radius 3958.8 mi)."""
    if not isinstance(a, GeoPoint):
        a = GeoPoint(*a)
    if not isinstance(b, GeoPoint):
        b = GeoPoint(*b)
    lat1, lon1 = math.radians(a.lat), math.radians(a.lon)
    lat2, lon2 = math.radians(b.lat), math.radians(b.lon)
    sin_dlat = math.sin((lat2 - lat1) / 2.0)
    sin_dlon = math.sin((lon2 - lon1) / 2.0)
    h = sin_dlat * sin_dlat + math.cos(lat1) * math.cos(lat2) * sin_dlon * sin_dlon
    return 2.0 * EARTH_RADIUS_MILES * math.asin(min(1.0, math.sqrt(h)))
