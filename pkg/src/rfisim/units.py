"""Physical constants and dB/linear conversions.

Every power<->field conversion in the package goes through this module so
that the factor of two between power and amplitude lives in one place.
"""

from __future__ import annotations

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s
EARTH_RADIUS = 6_371_000.0  # m

# finite stand-in for -inf dBW in serialized output
POWER_FLOOR_DBW = -300.0


def db_to_lin(db):
    """Power ratio from decibels."""
    return np.power(10.0, np.asarray(db, dtype=float) / 10.0)


def lin_to_db(lin):
    """Decibels from a power ratio; zero maps to ``-inf``."""
    lin = np.asarray(lin, dtype=float)
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(lin)


def dbm_to_dbw(dbm):
    return np.asarray(dbm, dtype=float) - 30.0


def amplitude_from_db(db):
    """Field amplitude whose squared magnitude is the linear power of ``db``.

    ``-inf`` (a blocked ray) gives an amplitude of exactly zero.
    """
    return np.sqrt(db_to_lin(db))


def power_dbw(field):
    """Received power in dBW of a complex field amplitude (or array of them)."""
    return lin_to_db(np.abs(field) ** 2)


def wavelength(f_c):
    return SPEED_OF_LIGHT / f_c


def floor_dbw(value):
    """Clamp to :data:`POWER_FLOOR_DBW` for serialization."""
    return np.maximum(np.asarray(value, dtype=float), POWER_FLOOR_DBW)
