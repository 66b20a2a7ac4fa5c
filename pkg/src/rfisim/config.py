"""Campaign configuration files.

YAML (or JSON) with a ``schema_version`` field. Units are spelled out in the
key names; angles are degrees here and radians everywhere past this module.

.. code-block:: yaml

    schema_version: 1
    seed: 0
    scenario:
      type: urban              # or backhaul
      geodata: bundled:synthetic_city
      lambda_g: 45             # gNB/km^2, or nodes_file: nodes.csv
      d_max_m: 200
    campaign:
      iterations: 1000
      rho: [1.0]
      alpha_n_deg: [10, 35, 65]
      azimuth_step_deg: 10
    material:
      epsilon: 5.24
      sigma_rough_m: 5.0e-5
    satellites:
      - preset: tempest-178
      - preset: aura-mls-240
        alpha_n_deg: [10, 35]  # per-sensor override
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigError
from .propagation import MaterialProperties
from .satellite import SatelliteConfig, preset
from .scenario import BACKHAUL, URBAN, PlacementConfig

SCHEMA_VERSION = 1

DEFAULTS = {
    "schema_version": SCHEMA_VERSION,
    "seed": 0,
    "atmosphere": None,
    "scenario": {
        "type": URBAN,
        "geodata": "bundled:synthetic_city",
        "lambda_g": 45.0,
        "nodes_file": None,
        "d_max_m": 200.0,
        "placement": {"projection_radius_m": 50.0, "min_spacing_m": 0.5, "max_rounds": 100},
    },
    "campaign": {
        "iterations": 1000,
        "rho": [1.0],
        "p_tx_given_active": 0.5,
        "alpha_n_deg": [10.0, 35.0, 65.0],
        "azimuth_step_deg": 10.0,
    },
    "material": {"epsilon": 5.24, "sigma_rough_m": 5.0e-5},
    "satellites": [{"preset": "tempest-178"}],
}

_SAT_KEYS = {
    "h_a_km": ("h_a", 1e3),
    "theta_hb_deg": ("theta_hb", np.pi / 180.0),
    "f_c_ghz": ("f_c", 1e9),
    "i_th_dbw": ("i_th", 1.0),
    "g_s_dbi": ("g_s", 1.0),
    "g_floor_dbi": ("g_floor", 1.0),
    "tangent_height_km": ("tangent_height", 1e3),
}


def _merge(base: dict, over: dict, where: str = "") -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if k not in base:
            raise ConfigError(f"unknown key {where}{k!r}")
        if isinstance(base[k], dict) and isinstance(v, dict):
            out[k] = _merge(base[k], v, f"{where}{k}.")
        else:
            out[k] = v
    return out


def resolve(doc: dict | None) -> dict:
    """Fill defaults and validate the schema version; returns a plain dict."""
    doc = doc or {}
    if not isinstance(doc, dict):
        raise ConfigError("config must be a mapping")
    ver = doc.get("schema_version", SCHEMA_VERSION)
    if ver != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {ver!r} (this build reads {SCHEMA_VERSION})")
    cfg = _merge(DEFAULTS, doc)
    if cfg["scenario"]["type"] not in (URBAN, BACKHAUL):
        raise ConfigError(f"scenario.type must be {URBAN!r} or {BACKHAUL!r}")
    for key in ("rho", "alpha_n_deg"):
        v = cfg["campaign"][key]
        cfg["campaign"][key] = [float(x) for x in (v if isinstance(v, list) else [v])]
    if not cfg["satellites"]:
        raise ConfigError("at least one satellite is required")
    return cfg


def load_config(path) -> tuple[dict, str]:
    """Read and resolve a config file. Returns ``(config, raw_text)``."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{path}:{mark.line + 1}:{mark.column + 1}" if mark else str(path)
        raise ConfigError(f"{where}: {getattr(exc, 'problem', exc)}") from None
    try:
        return resolve(doc), text
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def satellite_from_entry(entry: dict) -> tuple[SatelliteConfig, list | None]:
    """Build a sensor from a config entry (preset plus overrides, or fully
    specified). Also returns its own ``alpha_n_deg`` list if given."""
    entry = dict(entry)
    alpha_n = entry.pop("alpha_n_deg", None)
    overrides = {}
    for k, (field, scale) in _SAT_KEYS.items():
        if k in entry:
            overrides[field] = float(entry.pop(k)) * scale
    for k in ("name", "scan_mode"):
        if k in entry:
            overrides[k] = entry.pop(k)
    name = entry.pop("preset", None)
    if entry:
        raise ConfigError(f"unknown satellite keys {sorted(entry)}")
    if name is not None:
        sat = preset(name).with_overrides(**overrides)
    else:
        required = {"name", "h_a", "theta_hb", "f_c", "scan_mode", "i_th"}
        missing = required - set(overrides)
        if missing:
            raise ConfigError(f"satellite without preset is missing {sorted(missing)}")
        sat = SatelliteConfig(**overrides)
    if alpha_n is not None:
        alpha_n = [float(a) for a in (alpha_n if isinstance(alpha_n, list) else [alpha_n])]
    return sat, alpha_n


@dataclass
class ResolvedRun:
    seed: int
    scenario_type: str
    geodata: str
    lambda_g: float | None
    nodes_file: str | None
    d_max: float
    placement: PlacementConfig
    iterations: int
    rhos: list
    p_tx_given_active: float
    alpha_n: list
    azimuths: np.ndarray
    material: MaterialProperties
    satellites: list
    atmosphere: str | None


def interpret(cfg: dict) -> ResolvedRun:
    sc, camp = cfg["scenario"], cfg["campaign"]
    pl = sc["placement"]
    step = float(camp["azimuth_step_deg"])
    if not 0 < step <= 360:
        raise ConfigError("campaign.azimuth_step_deg must be in (0, 360]")
    sats = [satellite_from_entry(e) for e in cfg["satellites"]]
    try:
        eps = complex(str(cfg["material"]["epsilon"]).replace(" ", ""))
        material = MaterialProperties(eps.real if eps.imag == 0 else eps,
                                      float(cfg["material"]["sigma_rough_m"]))
    except ValueError as exc:
        raise ConfigError(f"material: {exc}") from None
    if sc["nodes_file"] is None and sc["lambda_g"] is None:
        raise ConfigError("scenario needs lambda_g or nodes_file")
    return ResolvedRun(
        seed=int(cfg["seed"]),
        scenario_type=sc["type"],
        geodata=str(sc["geodata"]),
        lambda_g=None if sc["lambda_g"] is None else float(sc["lambda_g"]),
        nodes_file=sc["nodes_file"],
        d_max=float(sc["d_max_m"]),
        placement=PlacementConfig(float(pl["projection_radius_m"]), float(pl["min_spacing_m"]),
                                  int(pl["max_rounds"])),
        iterations=int(camp["iterations"]),
        rhos=list(camp["rho"]),
        p_tx_given_active=float(camp["p_tx_given_active"]),
        alpha_n=list(camp["alpha_n_deg"]),
        azimuths=np.deg2rad(np.arange(0.0, 360.0 - 1e-9, step)),
        material=material,
        satellites=sats,
        atmosphere=cfg["atmosphere"],
    )
