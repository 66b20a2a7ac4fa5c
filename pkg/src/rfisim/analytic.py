"""Closed-form beamforming-amplification probabilities for a single link.

A transmitter at fixed height ``h_tx`` steers its beam at a receiver with
horizontal distance ``d ~ U[d1, d2]`` and height ``h_rx ~ U[h1, h2]``. The
elevation steering angle, measured from the downward vertical, is

    alpha_BF = atan2(d, h_tx - h_rx)   in (0, pi).

The direct ray to the satellite leaves at ``pi - alpha_s`` and the reflected
ray at ``alpha_s`` on the same scale; a ray is amplified when it lies within
half a beamwidth of ``alpha_BF``.

Derivation of the CDF
---------------------
Write ``u = h_tx - h_rx`` (uniform) and ``t = tan(alpha)``. For ``u > 0`` and
``alpha < pi/2``, ``alpha_BF <= alpha`` iff ``d <= u t``, whose probability
is ``clip((u t - d1) / (d2 - d1), 0, 1)``. Its antiderivative in ``u`` is

    H(u) = 0                                  u <= d1/t
         = t (u - d1/t)^2 / (2 (d2 - d1))     d1/t <= u <= d2/t
         = (d2 - d1) / (2 t) + u - d2/t       u >= d2/t

so averaging over ``u in [a, b]`` gives ``(H(b) - H(a)) / (b - a)``.
Receivers above the transmitter (``u < 0``) mirror this about pi/2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LinkDistribution:
    """Uniform receiver height and distance ranges, metres."""

    h_tx: float
    h1: float
    h2: float
    d1: float
    d2: float

    def __post_init__(self):
        if not (0 < self.h1 < self.h2):
            raise ValueError(f"need 0 < h1 < h2, got h1={self.h1}, h2={self.h2}")
        if not (0 <= self.d1 < self.d2):
            raise ValueError(f"need 0 <= d1 < d2, got d1={self.d1}, d2={self.d2}")
        if not self.h_tx > 0:
            raise ValueError("transmitter height must be positive")

    @property
    def case(self) -> str:
        """``"C1"`` if the transmitter is above every receiver, ``"C2"`` if
        below, ``"mixed"`` otherwise."""
        if self.h2 < self.h_tx:
            return "C1"
        if self.h1 > self.h_tx:
            return "C2"
        return "mixed"


@dataclass(frozen=True)
class AmplificationEvents:
    theta_los_minus: float
    theta_los_plus: float
    theta_gr_minus: float
    theta_gr_plus: float
    p_a_los: float
    p_a_gr: float


def _antiderivative(u, t, d1, dd):
    ua = d1 / t
    ub = (d1 + dd) / t
    mid = t * (u - ua) ** 2 / (2.0 * dd)
    high = dd / (2.0 * t) + (u - ub)
    return np.where(u <= ua, 0.0, np.where(u <= ub, mid, high))


def _mean_below(t, a, b, d1, dd):
    """Mean over ``u ~ U[a, b]`` (0 <= a < b) of ``P(d <= u t)``."""
    return (_antiderivative(b, t, d1, dd) - _antiderivative(a, t, d1, dd)) / (b - a)


def cdf_alpha_bf(alpha, dist: LinkDistribution):
    """``P(alpha_BF <= alpha)`` for ``alpha`` in radians (any real, vectorised)."""
    alpha = np.asarray(alpha, dtype=float)
    dd = dist.d2 - dist.d1
    u_lo = dist.h_tx - dist.h2
    u_hi = dist.h_tx - dist.h1
    span = u_hi - u_lo
    out = np.zeros_like(alpha)

    # receivers below the transmitter: alpha_BF in (0, pi/2)
    a, b = max(u_lo, 0.0), u_hi
    if b > a:
        w = (b - a) / span
        low = (alpha > 0) & (alpha < np.pi / 2)
        t = np.tan(np.where(low, alpha, np.pi / 4))
        part = np.where(low, _mean_below(t, a, b, dist.d1, dd), 0.0)
        part = np.where(alpha >= np.pi / 2, 1.0, part)
        out = out + w * part

    # receivers above: alpha_BF in (pi/2, pi), mirrored
    a, b = max(-u_hi, 0.0), -u_lo
    if b > a:
        w = (b - a) / span
        high = (alpha > np.pi / 2) & (alpha < np.pi)
        t = np.tan(np.where(high, np.pi - alpha, np.pi / 4))
        part = np.where(high, 1.0 - _mean_below(t, a, b, dist.d1, dd), 0.0)
        part = np.where(alpha >= np.pi, 1.0, part)
        out = out + w * part
    return np.clip(out, 0.0, 1.0)


def event_bounds(alpha_s, theta_hb):
    """Steering-angle windows for amplifying the direct and reflected rays,
    clamped to ``[0, pi]``."""
    half = theta_hb / 2.0
    clamp = lambda x: np.clip(x, 0.0, np.pi)  # noqa: E731
    return (
        clamp(np.pi - alpha_s - half),
        clamp(np.pi - alpha_s + half),
        clamp(alpha_s - half),
        clamp(alpha_s + half),
    )


def amplification_probabilities(alpha_s, theta_hb, dist: LinkDistribution) -> AmplificationEvents:
    """Probabilities that the direct / reflected ray falls inside the main beam."""
    if theta_hb < 0:
        raise ValueError("beamwidth must be non-negative")
    if not 0 <= alpha_s <= np.pi / 2:
        raise ValueError("alpha_s must lie in [0, pi/2]")
    lm, lp, gm, gp = event_bounds(alpha_s, theta_hb)
    f = cdf_alpha_bf(np.array([lm, lp, gm, gp]), dist)
    return AmplificationEvents(
        float(lm), float(lp), float(gm), float(gp),
        p_a_los=float(max(f[1] - f[0], 0.0)),
        p_a_gr=float(max(f[3] - f[2], 0.0)),
    )


def amplification_curve(alpha_s_grid, theta_hb, dist: LinkDistribution):
    """Arrays ``(p_los, p_gr)`` over a grid of look angles."""
    ev = [amplification_probabilities(a, theta_hb, dist) for a in np.asarray(alpha_s_grid, dtype=float)]
    return np.array([e.p_a_los for e in ev]), np.array([e.p_a_gr for e in ev])


# Monte Carlo oracles -------------------------------------------------------


def sample_alpha_bf(dist: LinkDistribution, n: int, rng: np.random.Generator):
    d = rng.uniform(dist.d1, dist.d2, n)
    h_rx = rng.uniform(dist.h1, dist.h2, n)
    return np.arctan2(d, dist.h_tx - h_rx)


def empirical_cdf(alpha, samples):
    """Fraction of ``samples`` at or below each ``alpha``."""
    s = np.sort(np.asarray(samples))
    return np.searchsorted(s, np.asarray(alpha), side="right") / s.size


def mc_amplification(alpha_s, theta_hb, dist: LinkDistribution, n: int, rng: np.random.Generator):
    """Sampled ``(P(A_LoS), P(A_GR))`` straight from the event definitions."""
    a = sample_alpha_bf(dist, n, rng)
    half = theta_hb / 2.0
    p_los = np.mean(np.abs(a - (np.pi - alpha_s)) <= half)
    p_gr = np.mean(np.abs(a - alpha_s) <= half)
    return float(p_los), float(p_gr)
