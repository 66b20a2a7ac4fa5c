"""Command-line front end.

Every subcommand writes plot-ready CSV/JSON plus a ``manifest.json`` to its
output directory. Failures print one JSON object to stderr with an error
``category`` and exit with a non-zero code.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .analytic import LinkDistribution, amplification_curve, mc_amplification
from .antenna import BeamPattern
from .config import load_config, interpret, resolve
from .errors import ConfigError, RfiSimError
from .montecarlo import CampaignConfig, run_campaign, single_link_sweep
from .propagation import load_atmosphere
from .satellite import PRESETS, preset
from .scenario import build_topology, fixture_path, resolve_geodata

MANIFEST = "manifest.json"


# ---------------------------------------------------------------------------
# helpers


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _input_entry(spec: str | None) -> dict | None:
    if spec is None:
        return None
    path = fixture_path(spec.split(":", 1)[1]) if spec.startswith("bundled:") else Path(spec)
    return {"spec": spec, "sha256": _sha256(path)} if path.is_file() else {"spec": spec}


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2) + "\n")


def _write_manifest(out: Path, command: str, config: dict, seed: int, inputs: dict) -> None:
    outputs = {}
    for p in sorted(out.rglob("*")):
        if p.is_file() and p.name != MANIFEST:
            outputs[str(p.relative_to(out))] = _sha256(p)
    _write_json(out / MANIFEST, {
        "command": command,
        "version": __version__,
        "kernel_backend": kernels.BACKEND,
        "seed": seed,
        "config": config,
        "inputs": {k: v for k, v in inputs.items() if v is not None},
        "outputs": outputs,
        "created_utc": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    })


def _write_rows(path: Path, rows: list[dict]) -> None:
    if not rows:
        path.write_text("")
        return
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (f"{v:.6f}" if isinstance(v, float) else v) for k, v in r.items()})


def _outdir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# subcommands


_SINGLE_LINK_KEYS = ("preset", "h_tx", "alpha_n_deg", "alpha_bf_deg", "altitude_km", "sat_gain_dbi",
                     "sat_hpbw_deg", "tx_gain_dbi", "tx_hpbw_deg", "tx_floor_dbi", "p_tx_dbw",
                     "f_start_ghz", "f_stop_ghz", "f_step_ghz", "atmosphere")
_ANALYTIC_KEYS = ("h_tx", "h_rx", "d", "hpbw_deg", "alpha_s_start_deg", "alpha_s_stop_deg",
                  "alpha_s_step_deg", "oracle")


def _load_manifest(path, command: str) -> dict:
    try:
        man = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read manifest {path}: {exc}") from None
    if not isinstance(man, dict) or man.get("command") != command:
        raise ConfigError(f"{path} is not a {command} manifest")
    return man


def _args_from_manifest(args, command: str, keys) -> dict:
    """Replace ``args`` fields by those recorded in a manifest, if one is given."""
    if args.from_manifest:
        man = _load_manifest(args.from_manifest, command)
        for k in keys:
            if k in man["config"]:
                setattr(args, k, man["config"][k])
        args.seed = man["seed"]
        return {"manifest": _input_entry(args.from_manifest)}
    return {}


def cmd_single_link(args) -> int:
    inputs = _args_from_manifest(args, "single-link", _SINGLE_LINK_KEYS)
    base = preset(args.preset) if args.preset else None
    h_a = args.altitude_km * 1e3 if args.altitude_km is not None else (base.h_a if base else 400e3)
    sat_hpbw = args.sat_hpbw_deg if args.sat_hpbw_deg is not None else (
        np.rad2deg(base.theta_hb) if base else 2.0)
    sat_gain = args.sat_gain_dbi if args.sat_gain_dbi is not None else (base.g_s if base else 38.5)
    freqs = np.arange(args.f_start_ghz, args.f_stop_ghz + 1e-9, args.f_step_ghz) * 1e9
    if freqs.size == 0:
        raise ConfigError("empty frequency sweep")
    atmosphere = load_atmosphere(args.atmosphere)
    rows = single_link_sweep(
        freqs, np.deg2rad(args.alpha_bf_deg), h_tx=args.h_tx, alpha_n=np.deg2rad(args.alpha_n_deg),
        h_a=h_a, tx_pattern=BeamPattern.from_degrees(args.tx_gain_dbi, args.tx_hpbw_deg, args.tx_floor_dbi),
        sat_gain=sat_gain, sat_theta_hb=np.deg2rad(sat_hpbw), p_tx_dbw=args.p_tx_dbw, atmosphere=atmosphere,
    )
    out = _outdir(args.out)
    _write_rows(out / "single_link.csv", rows)
    config = {k: getattr(args, k) for k in _SINGLE_LINK_KEYS}
    inputs["atmosphere"] = _input_entry(args.atmosphere)
    _write_manifest(out, "single-link", config, args.seed, inputs)
    return 0


def cmd_analytic(args) -> int:
    inputs = _args_from_manifest(args, "analytic", _ANALYTIC_KEYS)
    for k in ("h_rx", "d"):
        if len(getattr(args, k)) != 2:
            raise ConfigError(f"--{k.replace('_', '-')} takes exactly two values")
    h1, h2 = args.h_rx
    d1, d2 = args.d
    grid = np.arange(args.alpha_s_start_deg, args.alpha_s_stop_deg + 1e-9, args.alpha_s_step_deg)
    theta = np.deg2rad(args.hpbw_deg)
    rows = []
    for k, h_tx in enumerate(args.h_tx):
        dist = LinkDistribution(h_tx, h1, h2, d1, d2)
        p_los, p_gr = amplification_curve(np.deg2rad(grid), theta, dist)
        for j, a in enumerate(grid):
            row = {"h_tx_m": h_tx, "alpha_s_deg": float(a), "p_a_los": float(p_los[j]), "p_a_gr": float(p_gr[j])}
            if args.oracle:
                rng = np.random.default_rng([args.seed, k, j])
                row["p_a_los_mc"], row["p_a_gr_mc"] = mc_amplification(np.deg2rad(a), theta, dist,
                                                                       args.oracle, rng)
            rows.append(row)
    out = _outdir(args.out)
    _write_rows(out / "analytic.csv", rows)
    config = {k: getattr(args, k) for k in _ANALYTIC_KEYS}
    _write_manifest(out, "analytic", config, args.seed, inputs)
    return 0


_CAMPAIGN_FLAGS = (
    ("rho", "campaign", "rho"),
    ("iterations", "campaign", "iterations"),
    ("alpha_n_deg", "campaign", "alpha_n_deg"),
    ("azimuth_step_deg", "campaign", "azimuth_step_deg"),
    ("lambda_g", "scenario", "lambda_g"),
    ("geodata", "scenario", "geodata"),
)


def cmd_campaign(args) -> int:
    inputs = {}
    if args.from_manifest:
        cfg = resolve(_load_manifest(args.from_manifest, "campaign")["config"])
        inputs["manifest"] = _input_entry(args.from_manifest)
    elif args.config:
        cfg, _ = load_config(args.config)
        inputs["config"] = _input_entry(args.config)
    else:
        cfg = resolve({})
    # flags override the file, but not a manifest
    if not args.from_manifest:
        if args.seed_given:
            cfg["seed"] = args.seed
        for flag, section, key in _CAMPAIGN_FLAGS:
            if getattr(args, flag) is not None:
                cfg[section][key] = getattr(args, flag)
    cfg = resolve(cfg)
    run = interpret(cfg)

    scn = resolve_geodata(run.geodata)
    topo = build_topology(scn, run.scenario_type, run.lambda_g, run.seed, run.d_max, run.nodes_file,
                          run.placement)
    atmosphere = load_atmosphere(run.atmosphere)
    camp = CampaignConfig(run.iterations, run.rhos[0], run.p_tx_given_active, run.seed, run.material)
    workers = args.workers or os.cpu_count() or 1

    out = _outdir(args.out)
    res_dir = out / "results"
    res_dir.mkdir(exist_ok=True)
    summaries = []
    for sat, own_alpha_n in run.satellites:
        alpha_n = np.deg2rad(own_alpha_n if own_alpha_n is not None else run.alpha_n)
        for r in run_campaign(topo, scn.buildings, [sat], alpha_n, run.azimuths, camp, rhos=run.rhos,
                              atmosphere=atmosphere, workers=workers):
            stem = f"{r.satellite}_an{np.rad2deg(r.alpha_n):g}_rho{r.rho:g}"
            r.write(res_dir, stem)
            s = r.summary()
            s.pop("by_azimuth")
            s.pop("ecdf")
            s["files"] = [f"results/{stem}.csv", f"results/{stem}.json"]
            summaries.append(s)
    _write_json(out / "topology.json", {
        "scenario_type": topo.scenario_type, "geodata": run.geodata, "area_km2": scn.area_km2,
        "buildings": len(scn.buildings), "gnbs": len(topo.gnbs), "ues": len(topo.ues),
        "attached_ues": int((topo.attach >= 0).sum()), "populated_sectors": int(topo.populated_sectors.size),
        "backhaul_links": int(topo.link_tx.size), "digest": topo.digest(),
    })
    _write_json(out / "summary.json", summaries)
    inputs["geodata"] = _input_entry(run.geodata)
    inputs["nodes_file"] = _input_entry(run.nodes_file)
    inputs["atmosphere"] = _input_entry(run.atmosphere)
    _write_manifest(out, "campaign", cfg, run.seed, inputs)
    return 0


def cmd_validate_geodata(args) -> int:
    scn = resolve_geodata(args.path)
    h = scn.buildings.heights
    report = {
        "path": args.path, "valid": True, "buildings": len(scn.buildings), "area_km2": scn.area_km2,
        "valid_region_km2": scn.valid_region.area / 1e6,
        "height_m": {"min": float(h.min()), "max": float(h.max()), "mean": float(h.mean())} if h.size else None,
        "origin": scn.origin,
    }
    print(json.dumps(report, indent=2))
    return 0


# ---------------------------------------------------------------------------
# parser


class _SeedAction(argparse.Action):
    def __call__(self, parser, namespace, values, option_string=None):
        setattr(namespace, self.dest, values)
        namespace.seed_given = True


def build_parser() -> argparse.ArgumentParser:
    def global_flags(default):
        # subcommands repeat the flags with SUPPRESS so they do not reset values given before the subcommand
        g = argparse.ArgumentParser(add_help=False)
        g.add_argument("--seed", type=int, action=_SeedAction, default=0 if default else argparse.SUPPRESS,
                       help="master random seed (default 0)")
        g.add_argument("--workers", type=int, default=None if default else argparse.SUPPRESS,
                       help="parallel worker processes (default: number of CPUs)")
        return g

    common = global_flags(False)
    p = argparse.ArgumentParser(prog="rfisim", parents=[global_flags(True)],
                                description="Sub-THz terrestrial interference into passive satellite sensors.")
    p.add_argument("--version", action="version", version=f"rfisim {__version__}")
    p.set_defaults(seed_given=False)
    rerun = argparse.ArgumentParser(add_help=False)
    rerun.add_argument("--from-manifest", metavar="PATH",
                       help="repeat the run recorded in a manifest.json (its settings win over flags)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("single-link", parents=[common, rerun], help="one transmitter, frequency sweep")
    s.add_argument("--out", default="out/single-link")
    s.add_argument("--preset", choices=sorted(PRESETS), help="take sensor altitude/beam/gain from a preset")
    s.add_argument("--h-tx", type=float, default=3.0, help="transmitter height, m")
    s.add_argument("--alpha-n-deg", type=float, default=35.0)
    s.add_argument("--alpha-bf-deg", type=_floats, default=[35.0, 90.0, 125.0],
                   help="steering angles from the downward vertical, comma-separated")
    s.add_argument("--altitude-km", type=float, default=None)
    s.add_argument("--sat-gain-dbi", type=float, default=None)
    s.add_argument("--sat-hpbw-deg", type=float, default=None)
    s.add_argument("--tx-gain-dbi", type=float, default=35.0)
    s.add_argument("--tx-hpbw-deg", type=float, default=3.0)
    s.add_argument("--tx-floor-dbi", type=float, default=-8.5)
    s.add_argument("--p-tx-dbw", type=float, default=0.0)
    s.add_argument("--f-start-ghz", type=float, default=100.0)
    s.add_argument("--f-stop-ghz", type=float, default=300.0)
    s.add_argument("--f-step-ghz", type=float, default=1.0)
    s.add_argument("--atmosphere", default=None, help="profile file (default: bundled table)")
    s.set_defaults(func=cmd_single_link)

    a = sub.add_parser("analytic", parents=[common, rerun], help="beamforming amplification probabilities")
    a.add_argument("--out", default="out/analytic")
    a.add_argument("--h-tx", type=_floats, default=[2.0, 15.0], help="transmitter heights, m")
    a.add_argument("--h-rx", type=_floats, default=[1.6, 1.8], help="receiver height range h1,h2, m")
    a.add_argument("--d", type=_floats, default=[1.0, 200.0], help="distance range d1,d2, m")
    a.add_argument("--hpbw-deg", type=float, default=3.0)
    a.add_argument("--alpha-s-start-deg", type=float, default=0.0)
    a.add_argument("--alpha-s-stop-deg", type=float, default=90.0)
    a.add_argument("--alpha-s-step-deg", type=float, default=0.5)
    a.add_argument("--oracle", type=int, default=0, metavar="N",
                   help="also estimate each point from N Monte Carlo samples")
    a.set_defaults(func=cmd_analytic)

    c = sub.add_parser("campaign", parents=[common, rerun], help="network-scale Monte Carlo campaign")
    c.add_argument("config", nargs="?", help="YAML config (see rfisim.config)")
    c.add_argument("--out", default="out/campaign")
    c.add_argument("--rho", type=_floats, default=None, help="load factors, comma-separated")
    c.add_argument("--iterations", type=int, default=None)
    c.add_argument("--alpha-n-deg", type=_floats, default=None)
    c.add_argument("--azimuth-step-deg", type=float, default=None)
    c.add_argument("--lambda-g", type=float, default=None)
    c.add_argument("--geodata", default=None, help="file path or bundled:<name>")
    c.set_defaults(func=cmd_campaign)

    v = sub.add_parser("validate-geodata", parents=[common], help="parse and check a geodata file")
    v.add_argument("path", help="file path or bundled:<name>")
    v.set_defaults(func=cmd_validate_geodata)
    return p


def _fail(category: str, message: str, code: int) -> int:
    print(json.dumps({"error": category, "message": message, "exit_code": code}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RfiSimError as exc:
        return _fail(exc.category, str(exc), exc.exit_code)
    except ValueError as exc:
        return _fail("invalid-input", str(exc), 2)


if __name__ == "__main__":
    sys.exit(main())
