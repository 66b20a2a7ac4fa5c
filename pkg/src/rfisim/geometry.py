"""Ground-to-satellite geometry in a local east-north-up frame.

All network-scale work happens in a flat ENU frame centred on the network.
The Earth's curvature enters only through the nadir/apparent-nadir relation
and the flat-Earth error check that bounds where the flat frame is valid.

Angle conventions
-----------------
* ``alpha_n``: satellite nadir angle, measured at the satellite.
* ``alpha_s``: apparent nadir (look) angle, measured at the ground from the
  local vertical.
* azimuths are clockwise from north (east = +90 deg), elevations are above
  the local horizon. Everything is in radians.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .units import EARTH_RADIUS

#: largest look angle for which the reflected-path model is used
MAX_LOOK_ANGLE = np.deg2rad(80.0)
_ANGLE_TOL = 1e-12
# slack on sin(alpha_s) so horizon angles quoted to 0.01 deg still map to the horizon
_HORIZON_SLACK = 1e-4


@dataclass(frozen=True)
class EarthModel:
    R: float = EARTH_RADIUS

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError("Earth radius must be positive")


EARTH = EarthModel()


@dataclass(frozen=True)
class SatGeometry:
    h_a: float
    alpha_n: float
    alpha_s: float
    alpha_az: float


@dataclass(frozen=True)
class ReflectionGeometry:
    """Two-ray geometry for one ground node.

    ``delta_d`` is the exact path-length difference; ``delta_d_approx`` is the
    ``2 h cos(alpha_s)`` closed form, kept for comparison.
    """

    alpha_i: float
    alpha_los: float
    x_1R: float
    x_RS: float
    delta_d: float
    delta_d_approx: float


def apparent_nadir(alpha_n, h_a, earth: EarthModel = EARTH):
    """Look angle at the ground for a satellite pointing ``alpha_n`` off nadir.

    Nadir angles up to about 0.015 deg past the horizon are clamped to a
    90 deg look angle rather than rejected.

    Raises
    ------
    DomainError
        If the beam misses the Earth (pointing beyond the horizon).
    """
    arg = (earth.R + h_a) / earth.R * np.sin(alpha_n)
    if np.any(np.asarray(alpha_n) < 0) or np.any(arg > 1.0 + _HORIZON_SLACK):
        raise DomainError(
            f"nadir angle beyond the horizon for h_a={h_a} m (sin(alpha_s)={np.max(arg):.6f})"
        )
    return np.arcsin(np.minimum(arg, 1.0))


def nadir_from_apparent(alpha_s, h_a, earth: EarthModel = EARTH):
    """Inverse of :func:`apparent_nadir` on ``[0, pi/2]``."""
    return np.arcsin(earth.R / (earth.R + h_a) * np.sin(alpha_s))


def horizon_nadir(h_a, earth: EarthModel = EARTH):
    """Nadir angle at which the boresight grazes the horizon."""
    return np.arcsin(earth.R / (earth.R + h_a))


def path_difference(h_node, h_s, alpha_s):
    """Exact length difference between the ground-reflected and direct paths.

    The difference of square roots is evaluated in its rationalised form,
    which is algebraically identical but does not cancel catastrophically
    when both paths are hundreds of kilometres long. Valid for
    ``0 <= alpha_s <= pi/2``; the horizontal node-satellite separation is
    ``h_s * tan(alpha_s)``.
    """
    c = np.cos(alpha_s)
    s = np.sin(alpha_s)
    # everything scaled by cos(alpha_s) so alpha_s = pi/2 stays finite
    up = np.sqrt((h_s * s) ** 2 + ((h_s + h_node) * c) ** 2)
    down = np.sqrt((h_s * s) ** 2 + ((h_s - h_node) * c) ** 2)
    return 4.0 * h_node * h_s * c / (up + down)


def path_difference_approx(h_node, alpha_s):
    return 2.0 * h_node * np.cos(alpha_s)


def reflection_geometry(h_node, h_s, alpha_s) -> ReflectionGeometry:
    """Incidence angle, reflection point and path difference for one node.

    ``alpha_los`` is measured from the downward vertical at the node, the same
    convention as the beamforming angle (0 = straight down, pi = straight up).
    Works elementwise on arrays.
    """
    h_node = np.asarray(h_node, dtype=float)
    alpha_s = np.asarray(alpha_s, dtype=float)
    if np.any(h_s < 100.0 * h_node):
        raise DomainError("reflection geometry needs h_s >= 100 * h_node")
    if np.any(alpha_s < 0) or np.any(alpha_s > MAX_LOOK_ANGLE + _ANGLE_TOL):
        raise DomainError("look angle outside [0, 80] deg")
    alpha_i = np.arctan(h_s / (h_s + h_node) * np.tan(alpha_s))
    x = h_s * np.tan(alpha_s)
    alpha_los = np.arctan2(h_s - h_node, x) + np.pi / 2
    return ReflectionGeometry(
        alpha_i=alpha_i,
        alpha_los=alpha_los,
        x_1R=h_node * np.tan(alpha_i),
        x_RS=h_s * np.tan(alpha_i),
        delta_d=path_difference(h_node, h_s, alpha_s),
        delta_d_approx=path_difference_approx(h_node, alpha_s),
    )


def flat_earth_error(x, earth: EarthModel = EARTH):
    """Height mismatch between a flat and a spherical ground at distance ``x``.

    Geometric construction: the tangent-plane point at distance ``x`` and the
    sphere point on the same Earth radius are ``x_c`` (the chord) and ``x``
    from the tangent point, separated by ``gamma/2`` there. Their distance is
    ``sqrt(x^2 + x_c^2 - 2 x x_c cos(gamma/2))``; note the square root, the
    bare quadratic is an area, not a length. It reduces to
    ``sqrt(R^2 + x^2) - R``, evaluated here without cancellation.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("distance must be non-negative")
    return x * x / (np.sqrt(earth.R**2 + x * x) + earth.R)


def enu_direction(az, el):
    """Unit vector(s) in ENU for azimuth/elevation (radians), last axis = xyz."""
    az = np.asarray(az, dtype=float)
    el = np.asarray(el, dtype=float)
    ce = np.cos(el)
    return np.stack([ce * np.sin(az), ce * np.cos(az), np.sin(el)], axis=-1)


def direction_angles(vec):
    """(azimuth, elevation) of ENU vector(s); azimuth wrapped to [0, 2 pi)."""
    vec = np.asarray(vec, dtype=float)
    x, y, z = vec[..., 0], vec[..., 1], vec[..., 2]
    az = np.mod(np.arctan2(x, y), 2 * np.pi)
    el = np.arctan2(z, np.hypot(x, y))
    return az, el


def angle_between(u, v):
    """Great-circle angle between direction vectors, broadcasting on the last axis.

    Uses atan2(|u x v|, u.v), which stays accurate for nearly parallel vectors
    where arccos of the dot product would lose half the digits.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    cross = np.linalg.norm(np.cross(u, v), axis=-1)
    dot = np.sum(u * v, axis=-1)
    return np.arctan2(cross, dot)


def satellite_position(alpha_n, alpha_az, h_a, center=(0.0, 0.0, 0.0), earth: EarthModel = EARTH):
    """Satellite location in the local frame for a beam centred on ``center``.

    The satellite sits at altitude ``h_a`` above ``center`` and is offset
    horizontally by ``h_a * tan(alpha_s)`` along azimuth ``alpha_az``, so the
    line of sight from the centre has the apparent nadir angle that matches
    ``alpha_n``.
    """
    alpha_s = apparent_nadir(alpha_n, h_a, earth)
    x = h_a * np.tan(alpha_s)
    cx, cy, cz = center
    return np.array([cx + x * np.sin(alpha_az), cy + x * np.cos(alpha_az), cz + h_a])


def sat_geometry(alpha_n, alpha_az, h_a, earth: EarthModel = EARTH) -> SatGeometry:
    return SatGeometry(
        h_a=float(h_a),
        alpha_n=float(alpha_n),
        alpha_s=float(apparent_nadir(alpha_n, h_a, earth)),
        alpha_az=float(alpha_az),
    )
