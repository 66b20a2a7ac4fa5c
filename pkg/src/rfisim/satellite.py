"""Passive-sensor models: placement, boresight and receive gain.

Two scan modes are supported. A conical scanner looks at the network
centre. A limb sounder sits in the same place but looks over the network at
the atmosphere's edge: its boresight grazes the shell ``tangent_height``
above the Earth and then climbs back into space, so rays from the ground
arrive far off boresight.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .antenna import BeamPattern, pattern_gain
from .errors import ConfigError, DomainError
from .geometry import EARTH, MAX_LOOK_ANGLE, EarthModel, angle_between, apparent_nadir, satellite_position

CONICAL = "conical"
LIMB = "limb"


def aperture_gain(theta_hb_deg):
    """Boresight gain (dBi) of a pencil beam, ``10 log10(41253 / theta^2)``."""
    return 10.0 * np.log10(41253.0 / np.asarray(theta_hb_deg, dtype=float) ** 2)


@dataclass(frozen=True)
class SatelliteConfig:
    """Sensor parameters. Angles in radians, altitude and heights in metres.

    ``g_s`` defaults to :func:`aperture_gain` of the beamwidth when ``None``.
    """

    name: str
    h_a: float
    theta_hb: float
    f_c: float
    scan_mode: str
    i_th: float
    g_s: float | None = None
    tangent_height: float = 10e3
    g_floor: float = -8.5

    def __post_init__(self):
        if not self.h_a > 0:
            raise ConfigError(f"{self.name}: altitude must be positive")
        if not self.i_th < 0:
            raise ConfigError(f"{self.name}: interference threshold must be negative dBW")
        if self.scan_mode not in (CONICAL, LIMB):
            raise ConfigError(f"{self.name}: unknown scan mode {self.scan_mode!r}")
        if not self.theta_hb > 0:
            raise ConfigError(f"{self.name}: beamwidth must be positive")
        if self.g_s is None:
            object.__setattr__(self, "g_s", float(aperture_gain(np.rad2deg(self.theta_hb))))

    @property
    def pattern(self) -> BeamPattern:
        return BeamPattern(self.g_s, self.theta_hb, self.g_floor)

    def with_overrides(self, **kw) -> SatelliteConfig:
        if "theta_hb" in kw and "g_s" not in kw:
            kw["g_s"] = None
        return replace(self, **kw)


PRESETS = {
    "tempest-164": SatelliteConfig("tempest-164", 400e3, np.deg2rad(1.68), 164e9, CONICAL, -163.0),
    "tempest-178": SatelliteConfig("tempest-178", 400e3, np.deg2rad(1.72), 178e9, CONICAL, -163.0),
    "aura-mls-240": SatelliteConfig("aura-mls-240", 705e3, np.deg2rad(0.066), 240e9, LIMB, -194.0),
}


def preset(name: str) -> SatelliteConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown satellite preset {name!r}; choose from {sorted(PRESETS)}") from None


@dataclass(frozen=True)
class SatelliteState:
    position: np.ndarray
    boresight: np.ndarray
    alpha_n: float
    alpha_s: float
    alpha_az: float


def make_satellite(cfg: SatelliteConfig, alpha_n, alpha_az, center=(0.0, 0.0, 0.0),
                   earth: EarthModel = EARTH, max_look=MAX_LOOK_ANGLE) -> SatelliteState:
    """Place the sensor for nadir angle ``alpha_n`` and azimuth ``alpha_az``."""
    alpha_s = float(apparent_nadir(alpha_n, cfg.h_a, earth))
    if alpha_s > max_look + 1e-12:
        raise DomainError(
            f"{cfg.name}: look angle {np.rad2deg(alpha_s):.2f} deg exceeds {np.rad2deg(max_look):.0f} deg"
        )
    pos = satellite_position(alpha_n, alpha_az, cfg.h_a, center, earth)
    center = np.asarray(center, dtype=float)
    if cfg.scan_mode == LIMB:
        boresight = limb_boresight(pos, center, alpha_az, cfg.tangent_height, earth)
    else:
        v = center - pos
        boresight = v / np.linalg.norm(v)
    return SatelliteState(pos, boresight, float(alpha_n), alpha_s, float(alpha_az))


def limb_boresight(pos, center, alpha_az, tangent_height, earth: EarthModel = EARTH):
    """Unit vector of the ray from ``pos`` that grazes the shell
    ``tangent_height`` above the Earth, leaning past the network centre.

    The ray lies in the vertical plane through the satellite and the centre,
    so the sensor looks over the network at the limb and the beam never
    reaches the ground. The Earth's centre sits at ``center - (0, 0, R)``.
    """
    pos = np.asarray(pos, dtype=float)
    earth_c = center - np.array([0.0, 0.0, earth.R])
    down = earth_c - pos
    r_sat = np.linalg.norm(down)
    down /= r_sat
    beta = np.arcsin((earth.R + tangent_height) / r_sat)
    toward = center - pos
    side = toward - np.dot(toward, down) * down
    if np.linalg.norm(side) < 1e-9 * r_sat:  # directly overhead: lean away from the azimuth
        side = -np.array([np.sin(alpha_az), np.cos(alpha_az), 0.0])
        side -= np.dot(side, down) * down
    side /= np.linalg.norm(side)
    return np.cos(beta) * down + np.sin(beta) * side


def satellite_gain(state: SatelliteState, cfg: SatelliteConfig, sources):
    """Receive gain (dBi) for rays arriving from ``sources`` (ENU points).

    The offset of each ray from boresight is computed individually, even for
    conical scans where the whole network may sit inside the main lobe.
    """
    v = np.asarray(sources, dtype=float) - state.position
    return pattern_gain(cfg.pattern, angle_between(state.boresight, v))
