"""Map matching: projecting GNSS fixes onto the digital track.

A handful of noisy fixes around a 5-vertex city track are projected to
the polyline; each yields a chainage (distance along the route from the
reference vertex), a lateral residual, and the interpolated slope at
that chainage.  A fix far off the route trips the off-track gate.
"""

import math

import numpy as np

from tramsim.errors import OffTrackError
from tramsim.track import (
    EARTH_RADIUS,
    TrackMap,
    point_at,
    project_to_track,
    slope_at,
)

track = TrackMap(
    [
        (49.8300, 18.2800, 0.000),
        (49.8330, 18.2810, 0.010),
        (49.8360, 18.2850, -0.020),
        (49.8390, 18.2860, 0.000),
        (49.8420, 18.2900, 0.005),
    ]
)
print(f"track length: {track.total_length:.1f} m over {len(track)} vertices\n")

rng = np.random.default_rng(3)
print(f"{'true x [m]':>11s} {'chainage [m]':>13s} {'offset [m]':>11s} "
      f"{'slope [rad]':>12s} {'segment':>8s}")
for x_true in np.linspace(50.0, track.total_length - 50.0, 8):
    lat, lon = point_at(float(x_true), track)
    # a few metres of GNSS error
    lat += math.degrees(rng.normal(0.0, 3.0) / EARTH_RADIUS)
    lon += math.degrees(
        rng.normal(0.0, 3.0) / (EARTH_RADIUS * math.cos(math.radians(lat)))
    )
    fix = project_to_track((lat, lon), track)
    theta = slope_at(fix.chainage, track)
    print(f"{x_true:11.1f} {fix.chainage:13.1f} {fix.lateral_offset:11.2f} "
          f"{theta:12.4f} {fix.segment_index:8d}")

print("\na fix 60 m off the route is rejected by the 25 m gate:")
lat, lon = point_at(700.0, track)
lon += math.degrees(60.0 / (EARTH_RADIUS * math.cos(math.radians(lat))))
try:
    project_to_track((lat, lon), track)
except OffTrackError as err:
    print(f"  OffTrackError: {err}")
