#!/usr/bin/env python3
"""Generate the bundled gaseous-absorption profile table.

Specific attenuation (dB/km) of oxygen and water vapour is tabulated against
height for a grid of carrier frequencies, in the columnar format read by
``rfisim.propagation.load_atmosphere``.

Sources
-------
* Atmosphere: ITU-R P.835 mean annual global reference atmosphere
  (temperature/pressure layers; water vapour density 7.5 exp(-h/2) g/m^3
  with a 2e-6 mixing-ratio floor).
* Specific attenuation: ITU-R P.676-10 Annex 2 (simplified closed-form
  algorithm, 1-350 GHz). The line-by-line Annex 1 method is not used.

Usage::

    python tools/make_atmosphere.py > src/rfisim/data/atmosphere.txt
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

LAYER_BASE = np.array([0.0, 11.0, 20.0, 32.0, 47.0, 51.0, 71.0])
LAYER_GRADIENT = np.array([-6.5, 0.0, 1.0, 2.8, 0.0, -2.8, -2.0])  # K/km


def reference_atmosphere(h_km):
    """Temperature (K), total pressure (hPa), water vapour density (g/m^3)."""
    h_km = np.atleast_1d(np.asarray(h_km, dtype=float))
    t_base = [288.15]
    p_base = [1013.25]
    for i in range(1, len(LAYER_BASE)):
        dh = LAYER_BASE[i] - LAYER_BASE[i - 1]
        t0, p0, grad = t_base[-1], p_base[-1], LAYER_GRADIENT[i - 1]
        t_base.append(t0 + grad * dh)
        p_base.append(_pressure(p0, t0, grad, dh))
    idx = np.searchsorted(LAYER_BASE, h_km, side="right") - 1
    dh = h_km - LAYER_BASE[idx]
    temp = np.array(t_base)[idx] + LAYER_GRADIENT[idx] * dh
    pres = np.array([_pressure(p_base[i], t_base[i], LAYER_GRADIENT[i], d) for i, d in zip(idx, dh)])
    rho = 7.5 * np.exp(-h_km / 2.0)
    e = rho * temp / 216.7
    low = e / pres < 2e-6
    e = np.where(low, 2e-6 * pres, e)
    rho = e * 216.7 / temp
    return temp, pres, rho


def _pressure(p0, t0, grad, dh):
    if grad == 0.0:
        return p0 * np.exp(-34.1632 * dh / t0)
    return p0 * (t0 / (t0 + grad * dh)) ** (34.1632 / grad)


def _phi(r_p, r_t, a, b, c, d):
    return r_p**a * r_t**b * np.exp(c * (1.0 - r_p) + d * (1.0 - r_t))


def specific_attenuation(f_ghz, temp, pres, rho):
    """(gamma_o, gamma_w) in dB/km, P.676-10 Annex 2, valid for 66 < f <= 350 GHz."""
    f = float(f_ghz)
    if not 66.0 < f <= 350.0:
        raise ValueError("frequency outside the tabulated 66-350 GHz range")
    r_p = pres / 1013.0
    r_t = 288.0 / (temp - 0.15)
    if f <= 120.0:
        xi4 = _phi(r_p, r_t, -0.0112, 0.0092, -0.1033, -0.0009)
        xi5 = _phi(r_p, r_t, 0.2705, -2.7192, -0.3016, -4.1033)
        xi6 = _phi(r_p, r_t, 0.2445, -5.9191, 0.0422, -8.0719)
        xi7 = _phi(r_p, r_t, -0.1833, 6.5589, -0.2402, 6.131)
        gamma_o = f**2 * r_p**2 * 1e-3 * (
            3.02e-4 * r_t**3.5
            + 0.283 * r_t**3.8 / ((f - 118.75) ** 2 + 2.91 * r_p**2 * r_t**1.6)
            + 0.502 * xi6 * (1.0 - 0.0163 * xi7 * (f - 66.0))
            / ((f - 66.0) ** (1.4346 * xi4) + 1.15 * xi5)
        )
    else:
        delta = -0.00306 * _phi(r_p, r_t, 3.211, -14.94, 1.583, -16.37)
        gamma_o = delta + f**2 * r_p**3.5 * 1e-3 * (
            3.02e-4 / (1.0 + 1.9e-5 * f**1.5)
            + 0.283 * r_t**0.3 / ((f - 118.75) ** 2 + 2.91 * r_p**2 * r_t**1.6)
        )
    gamma_o = np.maximum(gamma_o, 0.0)

    eta1 = 0.955 * r_p * r_t**0.68 + 0.006 * rho
    eta2 = 0.735 * r_p * r_t**0.5 + 0.0353 * r_t**4 * rho

    def g(fi):
        return 1.0 + ((f - fi) / (f + fi)) ** 2

    def line(a, b, f0, w, eta, shape=1.0):
        return a * eta * np.exp(b * (1.0 - r_t)) / ((f - f0) ** 2 + w * eta**2) * shape

    gamma_w = (
        line(3.98, 2.23, 22.235, 9.42, eta1, g(22.0))
        + line(11.96, 0.7, 183.31, 11.14, eta1)
        + line(0.081, 6.44, 321.226, 6.29, eta1)
        + line(3.66, 1.6, 325.153, 9.22, eta1)
        + line(25.37, 1.09, 380.0, 0.0, eta1)
        + line(17.4, 1.46, 448.0, 0.0, eta1)
        + line(844.6, 0.17, 557.0, 0.0, eta1, g(557.0))
        + line(290.0, 0.41, 752.0, 0.0, eta1, g(752.0))
        + line(8.3328e4, 0.99, 1780.0, 0.0, eta2, g(1780.0))
    ) * f**2 * r_t**2.5 * rho * 1e-4
    return gamma_o, gamma_w


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--f-start", type=float, default=100.0, help="GHz")
    ap.add_argument("--f-stop", type=float, default=300.0, help="GHz")
    ap.add_argument("--f-step", type=float, default=1.0, help="GHz")
    ap.add_argument("--h-top", type=float, default=86.0, help="km")
    ap.add_argument("--h-step", type=float, default=1.0, help="km")
    args = ap.parse_args(argv)

    heights = np.arange(0.0, args.h_top + 1e-9, args.h_step)
    temp, pres, rho = reference_atmosphere(heights)
    freqs = np.arange(args.f_start, args.f_stop + 1e-9, args.f_step)

    out = sys.stdout
    out.write("# rfisim gaseous absorption profiles, format v1\n")
    out.write("# columns: height_m gamma_o_dB_per_km gamma_w_dB_per_km\n")
    out.write("# atmosphere: ITU-R P.835 mean annual global reference atmosphere\n")
    out.write("# attenuation: ITU-R P.676-10 Annex 2 simplified algorithm\n")
    out.write("# generated by tools/make_atmosphere.py "
              f"--f-start {args.f_start:g} --f-stop {args.f_stop:g} --f-step {args.f_step:g} "
              f"--h-top {args.h_top:g} --h-step {args.h_step:g}\n")
    for f in freqs:
        gamma_o, gamma_w = specific_attenuation(f, temp, pres, rho)
        out.write(f"frequency_hz {f * 1e9:.6e}\n")
        for h, go, gw in zip(heights, gamma_o, gamma_w):
            out.write(f"{h * 1000.0:.0f} {go:.6e} {gw:.6e}\n")


if __name__ == "__main__":
    main()
