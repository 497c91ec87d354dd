"""Digital track map: geodetic polyline with per-vertex slope.

Supports projecting GNSS fixes onto the track (map matching), chainage
and slope queries, and CSV load/save.  Chainage is measured along
spherical-earth geodesic segment lengths from vertex 0; the projection
itself runs in a local equirectangular plane about the map centroid,
which is accurate to centimetres at city scale.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import OffTrackError, TrackParseError, TrackRangeError

EARTH_RADIUS = 6371000.0  # m, spherical model
MAX_ABS_SLOPE = 0.2       # rad, sanity bound for tramway grades
DEFAULT_OFF_TRACK_GATE = 25.0  # m, urban GNSS multipath bound


@dataclass(frozen=True)
class TrackFix:
    """Result of projecting a geographic fix onto the track."""

    chainage: float        # m from the reference vertex
    lateral_offset: float  # m, residual distance to the polyline
    segment_index: int


def _haversine(lat1, lon1, lat2, lon2):
    """Great-circle distance on the spherical earth; array-friendly."""
    phi1 = np.radians(lat1)
    phi2 = np.radians(lat2)
    dphi = phi2 - phi1
    dlam = np.radians(lon2) - np.radians(lon1)
    h = np.sin(dphi / 2.0) ** 2 + np.cos(phi1) * np.cos(phi2) * np.sin(dlam / 2.0) ** 2
    return EARTH_RADIUS * 2.0 * np.arctan2(np.sqrt(h), np.sqrt(1.0 - h))


class TrackMap:
    """Immutable polyline of (lat, lon, slope) vertices with cached chainage."""

    def __init__(self, vertices):
        arr = np.atleast_2d(np.asarray(vertices, dtype=float))
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise TrackParseError("vertices must be (lat, lon, slope) triples")
        if arr.shape[0] < 2:
            raise TrackParseError("a track needs at least 2 vertices")
        if not np.all(np.isfinite(arr)):
            raise TrackParseError("vertices must be finite")
        if np.any(np.abs(arr[:, 2]) >= MAX_ABS_SLOPE):
            raise TrackParseError(
                f"|slope| must stay below {MAX_ABS_SLOPE} rad for a tramway"
            )
        same = (arr[1:, 0] == arr[:-1, 0]) & (arr[1:, 1] == arr[:-1, 1])
        if np.any(same):
            raise TrackParseError(
                f"consecutive duplicate vertex at index {int(np.argmax(same)) + 1}"
            )

        self.lat = arr[:, 0].copy()
        self.lon = arr[:, 1].copy()
        self.slope = arr[:, 2].copy()

        seg = _haversine(self.lat[:-1], self.lon[:-1], self.lat[1:], self.lon[1:])
        self.chainage = np.concatenate([[0.0], np.cumsum(seg)])
        if np.any(np.diff(self.chainage) <= 0.0):
            raise TrackParseError("zero-length segment; chainage must increase")

        # local planar frame about the centroid, for projection
        self._lat0 = float(np.mean(self.lat))
        self._lon0 = float(np.mean(self.lon))
        self._cos0 = math.cos(math.radians(self._lat0))
        self._east = EARTH_RADIUS * np.radians(self.lon - self._lon0) * self._cos0
        self._north = EARTH_RADIUS * np.radians(self.lat - self._lat0)

    def __len__(self) -> int:
        return len(self.lat)

    @property
    def total_length(self) -> float:
        return float(self.chainage[-1])

    def to_planar(self, lat: float, lon: float) -> tuple[float, float]:
        """(east, north) of a geographic point in the map's local frame, m."""
        east = EARTH_RADIUS * math.radians(lon - self._lon0) * self._cos0
        north = EARTH_RADIUS * math.radians(lat - self._lat0)
        return east, north

    def vertices(self):
        return [
            (float(lat), float(lon), float(slope))
            for lat, lon, slope in zip(self.lat, self.lon, self.slope)
        ]


def project_to_track(
    y_gps: tuple[float, float],
    track: TrackMap,
    gate: float = DEFAULT_OFF_TRACK_GATE,
) -> TrackFix:
    """Map-match a (lat, lon) fix to the closest point of the polyline.

    Orthogonal projection clamped to segment ends, evaluated over all
    segments in the local planar frame; ties go to the lowest segment
    index.  A residual beyond ``gate`` raises OffTrackError.
    """
    lat, lon = float(y_gps[0]), float(y_gps[1])
    pe, pn = track.to_planar(lat, lon)

    ae, an = track._east[:-1], track._north[:-1]
    de = track._east[1:] - ae
    dn = track._north[1:] - an
    seg_len_sq = de * de + dn * dn
    frac = ((pe - ae) * de + (pn - an) * dn) / seg_len_sq
    frac = np.clip(frac, 0.0, 1.0)
    ce = ae + frac * de
    cn = an + frac * dn
    dist_sq = (pe - ce) ** 2 + (pn - cn) ** 2

    best = int(np.argmin(dist_sq))  # argmin returns the first (lowest) index
    offset = float(math.sqrt(dist_sq[best]))
    if offset > gate:
        raise OffTrackError(offset, gate)
    seg_chain = track.chainage[best + 1] - track.chainage[best]
    chainage = float(track.chainage[best] + frac[best] * seg_chain)
    return TrackFix(chainage=chainage, lateral_offset=offset, segment_index=best)


def _check_range(x: float, track: TrackMap, what: str) -> None:
    if not 0.0 <= x <= track.total_length:
        raise TrackRangeError(
            f"{what} {x:.3f} m outside the track [0, {track.total_length:.3f}] m"
        )


def slope_at(x: float, track: TrackMap) -> float:
    """Track slope (rad) at chainage x, linearly interpolated between vertices."""
    _check_range(x, track, "chainage")
    return float(np.interp(x, track.chainage, track.slope))


def point_at(x: float, track: TrackMap) -> tuple[float, float]:
    """Geographic (lat, lon) of the point at chainage x along the polyline."""
    _check_range(x, track, "chainage")
    i = int(np.searchsorted(track.chainage, x, side="right")) - 1
    i = min(max(i, 0), len(track) - 2)
    seg = track.chainage[i + 1] - track.chainage[i]
    frac = (x - track.chainage[i]) / seg
    lat = track.lat[i] + frac * (track.lat[i + 1] - track.lat[i])
    lon = track.lon[i] + frac * (track.lon[i + 1] - track.lon[i])
    return float(lat), float(lon)


def load_track(path) -> TrackMap:
    """Read a track CSV of ``lat,lon,slope_rad`` rows ('#' starts a comment)."""
    rows = []
    with open(path, "r", newline="") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.lower().replace(" ", "") == "lat,lon,slope_rad":
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) != 3:
                raise TrackParseError(
                    f"expected 3 comma-separated values, got {len(parts)}", lineno
                )
            try:
                lat, lon, slope = (float(p) for p in parts)
            except ValueError:
                raise TrackParseError(f"non-numeric value in {parts!r}", lineno)
            if rows and rows[-1][0] == lat and rows[-1][1] == lon:
                raise TrackParseError("duplicate of the previous vertex", lineno)
            if abs(slope) >= MAX_ABS_SLOPE:
                raise TrackParseError(
                    f"|slope| {slope} exceeds the {MAX_ABS_SLOPE} rad bound", lineno
                )
            rows.append((lat, lon, slope))
    if len(rows) < 2:
        raise TrackParseError(f"track has {len(rows)} vertices, need at least 2")
    return TrackMap(rows)


def save_track(track: TrackMap, path) -> None:
    """Write a track CSV that load_track reads back identically."""
    with open(path, "w", newline="") as f:
        f.write("# lat,lon,slope_rad  (WGS-84 decimal degrees, slope in radians)\n")
        writer = csv.writer(f)
        for lat, lon, slope in track.vertices():
            # repr round-trips floats exactly
            writer.writerow([repr(lat), repr(lon), repr(slope)])
