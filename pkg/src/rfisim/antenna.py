"""Beam patterns, sectors and geometric beamforming.

The pattern is a quadratic-in-dB main lobe with a hard side-lobe floor,
evaluated on the great-circle angle between the steering direction and the
target direction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .geometry import angle_between, direction_angles, enu_direction

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class BeamPattern:
    """Rotationally symmetric beam.

    Attributes
    ----------
    g_max : float
        Boresight gain, dBi.
    theta_hb : float
        Half-power beamwidth, radians.
    g_floor : float
        Side/back-lobe floor, dBi.
    """

    g_max: float
    theta_hb: float
    g_floor: float

    def __post_init__(self):
        if not self.theta_hb > 0:
            raise ValueError("beamwidth must be positive")
        if not self.g_max > self.g_floor:
            raise ValueError("peak gain must exceed the floor")

    @classmethod
    def from_degrees(cls, g_max, theta_hb_deg, g_floor):
        return cls(float(g_max), float(np.deg2rad(theta_hb_deg)), float(g_floor))

    def gain(self, offset):
        return pattern_gain(self, offset)


# terrestrial node classes; both floors sit at -8.5 dBi
GNB_PATTERN = BeamPattern.from_degrees(35.0, 3.0, -8.5)
UE_PATTERN = BeamPattern.from_degrees(24.5, 10.0, -8.5)


def pattern_gain(pattern: BeamPattern, offset):
    """Gain (dBi) at angular distance ``offset`` (radians) from boresight.

    ``g_max - min(12 (offset / theta_hb)^2, g_max - g_floor)``; exactly 3 dB
    down at half the beamwidth.
    """
    offset = np.abs(np.asarray(offset, dtype=float))
    att = np.minimum(12.0 * (offset / pattern.theta_hb) ** 2, pattern.g_max - pattern.g_floor)
    return pattern.g_max - att


@dataclass
class Sector:
    """Angular sector of a ground node.

    ``boresight`` and ``width`` are azimuths in radians; ``steer`` is the
    current (azimuth, elevation) of the beam or ``None`` when idle. ``role``
    is one of ``"tx"``, ``"rx"`` or ``"silent"``.
    """

    boresight: float
    width: float
    steer: tuple[float, float] | None = None
    active: bool = False
    role: str = "silent"

    def contains(self, az) -> np.ndarray:
        return sector_contains(self.boresight, self.width, az)


def sector_contains(boresight, width, az):
    """True where azimuth ``az`` lies in the sector ``[b - w/2, b + w/2)``."""
    if width >= TWO_PI:
        return np.ones(np.shape(az), dtype=bool)
    rel = np.mod(np.asarray(az) - boresight + width / 2.0, TWO_PI)
    return rel < width


def sector_index(az, first_boresight, n_sectors):
    """Index of the sector (of ``n_sectors`` equal ones) containing ``az``."""
    width = TWO_PI / n_sectors
    rel = np.mod(np.asarray(az) - first_boresight + width / 2.0, TWO_PI)
    return np.minimum((rel // width).astype(int), n_sectors - 1)


def make_sectors(n_sectors: int, first_boresight: float = 0.0) -> list[Sector]:
    width = TWO_PI / n_sectors
    return [Sector(float(np.mod(first_boresight + k * width, TWO_PI)), width) for k in range(n_sectors)]


def geometric_beamform(tx, rx):
    """(azimuth, elevation) of the line from ``tx`` to ``rx`` (ENU points)."""
    v = np.asarray(rx, dtype=float) - np.asarray(tx, dtype=float)
    if np.any(np.linalg.norm(v, axis=-1) == 0):
        raise DomainError("cannot steer between coincident positions")
    return direction_angles(v)


def beamforming_angle(d, h_tx, h_rx):
    """Elevation-plane steering angle measured from the downward vertical.

    0 points straight down, pi/2 at the horizon, pi straight up.
    """
    return np.arctan2(d, np.asarray(h_tx) - np.asarray(h_rx))


def gain_toward(pattern: BeamPattern, steer, target):
    """Gain toward ``target`` for a beam steered at ``steer``.

    Both are (azimuth, elevation) pairs (arrays broadcast) or, if given as
    arrays with a trailing axis of 3, ENU direction vectors.
    """
    return pattern_gain(pattern, angle_between(_as_vec(steer), _as_vec(target)))


def _as_vec(d):
    if isinstance(d, tuple) and len(d) == 2:
        return enu_direction(*d)
    arr = np.asarray(d, dtype=float)
    if arr.shape[-1:] == (3,):
        return arr
    return enu_direction(arr[..., 0], arr[..., 1])
