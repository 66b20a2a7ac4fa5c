"""Per-ray losses and coherent combination of the direct and ground-reflected rays.

Two rays leave every ground transmitter toward the satellite: the direct
(LoS) ray and the specular reflection off the z = 0 ground plane (GR).
Each carries free-space, atmospheric and (GR only) reflection losses, plus a
blockage flag. Fields carry amplitude ``sqrt(P_linear)`` and a phase, and
received power is ``|sum of fields|^2``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import DomainError, ProfileError
from .geometry import MAX_LOOK_ANGLE
from .units import SPEED_OF_LIGHT, amplitude_from_db, lin_to_db, wavelength

LOS = "los"
GR = "gr"


@dataclass(frozen=True)
class MaterialProperties:
    """Ground-plane material.

    Attributes
    ----------
    epsilon : complex
        Relative permittivity (concrete: 5.24).
    sigma_rough : float
        Surface height standard deviation, metres.
    phi_R : float
        Phase shift applied on reflection, radians.
    """

    epsilon: complex = 5.24
    sigma_rough: float = 0.05e-3
    phi_R: float = np.pi

    def __post_init__(self):
        if np.real(self.epsilon) < 1.0:
            raise ValueError("Re(epsilon) must be >= 1")
        if self.sigma_rough < 0:
            raise ValueError("roughness must be non-negative")


CONCRETE = MaterialProperties()


def fresnel_te(alpha_i, epsilon):
    """TE (perpendicular) Fresnel reflection coefficient.

    ``alpha_i`` is the incidence angle from the surface normal, so 0 is
    normal incidence and pi/2 is grazing. Returns the complex coefficient;
    the simulator only uses its magnitude (the phase is fixed to pi).
    """
    alpha_i = np.asarray(alpha_i, dtype=float)
    n2 = np.asarray(epsilon, dtype=complex)
    c = np.cos(alpha_i)
    root = np.sqrt(n2 - np.sin(alpha_i) ** 2)
    return (c - root) / (c + root)


def roughness_factor(sigma, alpha_i, lam):
    """Rayleigh roughness attenuation ``(rho, g)`` with ``rho = exp(-g/2)``."""
    if np.any(np.asarray(sigma) < 0) or np.any(np.asarray(lam) <= 0):
        raise ValueError("need sigma >= 0 and lambda > 0")
    g = (4.0 * np.pi * np.asarray(sigma) * np.cos(alpha_i) / lam) ** 2
    return np.exp(-g / 2.0), g


def reflection_magnitude(alpha_i, mat: MaterialProperties, f_c):
    """``rho * |r|``, the amplitude factor of the reflected ray."""
    rho, _ = roughness_factor(mat.sigma_rough, alpha_i, wavelength(f_c))
    return rho * np.abs(fresnel_te(alpha_i, mat.epsilon))


def reflection_loss(alpha_i, mat: MaterialProperties, f_c):
    """Reflection loss ``-20 log10(rho |r|)`` in dB (non-negative)."""
    with np.errstate(divide="ignore"):
        return -20.0 * np.log10(reflection_magnitude(alpha_i, mat, f_c))


def free_space_loss(d, f_c):
    """Free-space path loss in dB for distance ``d`` (m) at ``f_c`` (Hz)."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    return 20.0 * np.log10(4.0 * np.pi * f_c * d / SPEED_OF_LIGHT)


# ---------------------------------------------------------------------------
# atmosphere


@dataclass(frozen=True)
class AtmosphereProfile:
    """Specific attenuation against height for one carrier frequency.

    ``heights`` in metres (strictly increasing, first sample at 0),
    ``gamma_o`` / ``gamma_w`` in dB/km. Above the last sample the attenuation
    is zero.
    """

    frequency: float
    heights: np.ndarray
    gamma_o: np.ndarray
    gamma_w: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.heights, dtype=float)
        go = np.asarray(self.gamma_o, dtype=float)
        gw = np.asarray(self.gamma_w, dtype=float)
        if not (h.ndim == 1 and h.shape == go.shape == gw.shape and h.size >= 2):
            raise ProfileError("profile needs matching columns with at least two samples")
        if h[0] != 0.0:
            raise ProfileError(f"profile gap: first sample at {h[0]} m, must start at ground level")
        if np.any(np.diff(h) <= 0):
            raise ProfileError("profile heights must be strictly increasing")
        if not (np.all(np.isfinite(go)) and np.all(np.isfinite(gw))):
            raise ProfileError("profile gap: non-finite attenuation value")
        if np.any(go < 0) or np.any(gw < 0):
            raise ProfileError("specific attenuation must be non-negative")
        object.__setattr__(self, "heights", h)
        object.__setattr__(self, "gamma_o", go)
        object.__setattr__(self, "gamma_w", gw)

    @property
    def h_top(self) -> float:
        return float(self.heights[-1])

    @property
    def gamma(self) -> np.ndarray:
        return self.gamma_o + self.gamma_w

    def zenith_loss(self, h_max: float | None = None) -> float:
        """Vertical path attenuation (dB) from the ground up to ``h_max``.

        Between samples the attenuation is taken to decay exponentially
        (log-linear interpolation), falling back to linear interpolation
        where a sample is zero or the two samples are equal.
        """
        h = self.heights
        g = self.gamma / 1000.0  # dB/m
        if h_max is not None and h_max < h[-1]:
            if h_max <= 0:
                return 0.0
            k = int(np.searchsorted(h, h_max, side="right"))
            g_top = _loglin(h[k - 1], h[k], g[k - 1], g[k], h_max)
            h = np.append(h[:k], h_max)
            g = np.append(g[:k], g_top)
        return float(np.sum(_segment_integrals(h[:-1], h[1:], g[:-1], g[1:])))


def _loglin(h0, h1, g0, g1, h):
    if g0 > 0 and g1 > 0:
        return g0 * (g1 / g0) ** ((h - h0) / (h1 - h0))
    return g0 + (g1 - g0) * (h - h0) / (h1 - h0)


def _segment_integrals(h0, h1, g0, g1):
    dh = h1 - h0
    out = 0.5 * (g0 + g1) * dh
    expo = (g0 > 0) & (g1 > 0) & (np.abs(g1 / np.where(g0 > 0, g0, 1.0) - 1.0) > 1e-9)
    if np.any(expo):
        r = np.log(g1[expo] / g0[expo])
        out[expo] = (g1[expo] - g0[expo]) * dh[expo] / r
    return out


@dataclass
class AtmosphereSet:
    """Profiles keyed by carrier frequency (Hz)."""

    profiles: dict = field(default_factory=dict)
    source: str = ""

    def frequencies(self) -> np.ndarray:
        return np.array(sorted(self.profiles))

    def profile(self, f_c: float) -> AtmosphereProfile:
        for f, prof in self.profiles.items():
            if abs(f - f_c) <= 1e-9 * f_c:
                return prof
        fs = self.frequencies()
        span = f"{fs[0] / 1e9:g}-{fs[-1] / 1e9:g} GHz" if fs.size else "none"
        raise ProfileError(f"no atmosphere profile for {f_c / 1e9:g} GHz (tabulated: {span})")

    def __contains__(self, f_c):
        try:
            self.profile(f_c)
        except ProfileError:
            return False
        return True


def parse_atmosphere(text: str, source: str = "<string>") -> AtmosphereSet:
    """Parse the columnar profile format.

    ``frequency_hz <f>`` opens a block; each following non-comment line is
    ``height_m gamma_o_dB_per_km gamma_w_dB_per_km``.
    """
    blocks: dict[float, list] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "frequency_hz":
                current = float(parts[1])
                if current in blocks:
                    raise ProfileError(f"{source}:{lineno}: duplicate frequency block")
                blocks[current] = []
                continue
            if current is None:
                raise ProfileError(f"{source}:{lineno}: data before any frequency_hz line")
            if len(parts) != 3:
                raise ValueError
            blocks[current].append([float(p) for p in parts])
        except (ValueError, IndexError):
            raise ProfileError(f"{source}:{lineno}: cannot parse {raw!r}") from None
    profiles = {}
    for f, rows in blocks.items():
        arr = np.asarray(rows, dtype=float).reshape(-1, 3)
        try:
            profiles[f] = AtmosphereProfile(f, arr[:, 0], arr[:, 1], arr[:, 2])
        except ProfileError as exc:
            raise ProfileError(f"{source}: {f / 1e9:g} GHz: {exc}") from None
    if not profiles:
        raise ProfileError(f"{source}: no profiles found")
    return AtmosphereSet(profiles, source)


@functools.lru_cache(maxsize=8)
def load_atmosphere(path: str | None = None) -> AtmosphereSet:
    """Load a profile file; ``None`` loads the bundled 100-300 GHz table."""
    if path is None:
        ref = resources.files("rfisim") / "data" / "atmosphere.txt"
        return parse_atmosphere(ref.read_text(), "atmosphere.txt")
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ProfileError(f"cannot read atmosphere file {p}: {exc}") from None
    return parse_atmosphere(text, str(p))


def atmospheric_loss(profile: AtmosphereProfile, alpha_s, h_a=np.inf):
    """Slant-path gaseous absorption (dB) from the ground to altitude ``h_a``.

    Flat layers: the path crosses every layer at the same look angle, so the
    loss is the zenith integral divided by ``cos(alpha_s)``. This ignores
    Earth curvature and refraction, which is acceptable up to 80 deg.
    """
    alpha_s = np.asarray(alpha_s, dtype=float)
    if np.any(alpha_s < 0) or np.any(alpha_s > MAX_LOOK_ANGLE + 1e-12):
        raise DomainError("atmospheric slant path needs 0 <= alpha_s <= 80 deg")
    zenith = profile.zenith_loss(None if not np.isfinite(h_a) else float(h_a))
    return zenith / np.cos(alpha_s)


# ---------------------------------------------------------------------------
# rays


@dataclass(frozen=True)
class TotalLoss:
    """Loss budget of one ray in dB; ``L_B`` is 0 or ``inf``."""

    L_fs: float
    L_R: float
    L_A: float
    L_B: float

    @property
    def total(self) -> float:
        return self.L_fs + self.L_R + self.L_A + self.L_B


def total_ray_loss(L_fs, L_R=0.0, L_A=0.0, blocked=False) -> TotalLoss:
    return TotalLoss(float(L_fs), float(L_R), float(L_A), np.inf if blocked else 0.0)


@dataclass(frozen=True)
class RayContribution:
    """One propagation path from a ground transmitter to the satellite.

    ``p_tx``, ``g_tx``, ``g_rx`` are in dBW/dBi, losses in dB. ``phase`` is the
    total phase in radians (carrier offset, path length and reflection).
    """

    kind: str
    d: float
    L_fs: float
    L_R: float
    L_A: float
    blocked: bool
    phase: float
    g_tx: float
    g_rx: float
    p_tx: float
    field: complex

    @property
    def loss(self) -> TotalLoss:
        return total_ray_loss(self.L_fs, self.L_R, self.L_A, self.blocked)

    @property
    def power_dbw(self) -> float:
        """Received power of this ray alone."""
        return self.p_tx + self.g_tx + self.g_rx - self.loss.total


def make_ray(kind, d, f_c, p_tx, g_tx, g_rx, L_A, phase, blocked=False, L_R=0.0) -> RayContribution:
    """Build a ray and its complex field from a link budget."""
    L_fs = float(free_space_loss(d, f_c))
    if kind == LOS:
        L_R = 0.0
    budget = p_tx + g_tx + g_rx - L_fs - L_R - L_A
    amp = 0.0 if blocked else float(amplitude_from_db(budget))
    return RayContribution(
        kind=kind, d=float(d), L_fs=L_fs, L_R=float(L_R), L_A=float(L_A), blocked=bool(blocked),
        phase=float(phase), g_tx=float(g_tx), g_rx=float(g_rx), p_tx=float(p_tx),
        field=amp * np.exp(1j * phase),
    )


def path_phase(d, f_c):
    """Propagation phase ``2 pi d / lambda`` reduced to [0, 2 pi)."""
    lam = wavelength(f_c)
    return 2.0 * np.pi * np.mod(d, lam) / lam


def combine_rays(contributions) -> float:
    """Received power in dBW of the coherent sum of ray fields.

    Accepts :class:`RayContribution` objects or bare complex fields. An empty
    sum (or perfect cancellation) is ``-inf``.
    """
    total = 0j
    for c in contributions:
        total += c.field if isinstance(c, RayContribution) else complex(c)
    return float(lin_to_db(abs(total) ** 2))


def blockage(a, b, buildings) -> bool:
    """True if the open segment ``a -> b`` crosses any building prism."""
    if buildings is None or len(buildings) == 0:
        return False
    return buildings.segment_blocked(a, b)


def reflected_blocked(node, reflection_point, satellite, buildings) -> bool:
    """The ground-reflected ray is blocked if either of its legs is."""
    if buildings is None or len(buildings) == 0:
        return False
    legs = buildings.segments_blocked([node, reflection_point], [reflection_point, satellite])
    return bool(legs.any())
