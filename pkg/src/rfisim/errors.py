"""Exception hierarchy. ``category`` is what the CLI reports on failure."""

from __future__ import annotations


class RfiSimError(Exception):
    category = "error"
    exit_code = 1


class DomainError(RfiSimError, ValueError):
    """An input falls outside the validity region of a model."""

    category = "domain"
    exit_code = 4


class GeodataError(RfiSimError):
    category = "geodata"
    exit_code = 3


class ProfileError(RfiSimError):
    """Atmosphere profile missing, malformed, or not covering a request."""

    category = "atmosphere"
    exit_code = 3


class PlacementError(RfiSimError):
    category = "placement"
    exit_code = 5


class ConfigError(RfiSimError):
    category = "config"
    exit_code = 2
