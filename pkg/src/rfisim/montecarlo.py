"""Monte Carlo aggregation of ground-to-satellite interference.

For every satellite placement (a *cell*: sensor, nadir angle, azimuth) the
two rays of every potential transmitter are evaluated once and stored as
complex fields in a :class:`LinkTable`. Each iteration then draws which
links are active and who transmits, rotates every active transmitter by an
independent carrier phase, and sums the fields coherently.

Random numbers for iteration ``k`` of azimuth ``j`` come from
``default_rng([seed, j, k])``. The stream does not depend on the load factor,
nadir angle or sensor, so sweeps over those share the same activity draws
(common random numbers), and results never depend on worker scheduling.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .antenna import BeamPattern, pattern_gain, sector_contains
from .geometry import angle_between, enu_direction
from .propagation import (
    CONCRETE,
    GR,
    LOS,
    MaterialProperties,
    atmospheric_loss,
    free_space_loss,
    load_atmosphere,
    make_ray,
    path_phase,
    reflection_loss,
)
from .satellite import SatelliteConfig, SatelliteState, make_satellite, satellite_gain
from .scenario import BACKHAUL, GNB_SECTORS, Topology
from .units import POWER_FLOOR_DBW, amplitude_from_db, dbm_to_dbw, lin_to_db, wavelength

CATEGORIES = ("gnb_los", "gnb_gr", "ue_los", "ue_gr", "gnb", "ue", "los", "gr", "total")


@dataclass(frozen=True)
class CampaignConfig:
    iterations: int = 1000
    rho: float = 1.0
    p_tx_given_active: float = 0.5
    seed: int = 0
    material: MaterialProperties = CONCRETE

    def __post_init__(self):
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError("rho must lie in [0, 1]")
        if self.iterations < 1:
            raise ValueError("need at least one iteration")
        if not 0.0 <= self.p_tx_given_active <= 1.0:
            raise ValueError("p_tx_given_active must lie in [0, 1]")


# ---------------------------------------------------------------------------
# ray evaluation


@dataclass
class NodeRays:
    """Direct and reflected rays from ``n`` ground points to one satellite.

    Everything except the transmitter gain and power: those depend on the
    link the node serves and are applied in :func:`link_fields`.
    """

    pos: np.ndarray
    d_los: np.ndarray
    d_gr: np.ndarray
    refl: np.ndarray
    alpha_i: np.ndarray
    L_fs_los: np.ndarray
    L_fs_gr: np.ndarray
    L_R: np.ndarray
    L_A: float
    blocked_los: np.ndarray
    blocked_gr: np.ndarray
    g_rx_los: np.ndarray
    g_rx_gr: np.ndarray
    phase_los: np.ndarray
    phase_gr: np.ndarray
    dir_los: np.ndarray
    dir_gr: np.ndarray
    sat_az: np.ndarray


def node_rays(pos, sat: SatelliteState, cfg: SatelliteConfig, buildings=None,
              material: MaterialProperties = CONCRETE, atmosphere=None, f_c=None) -> NodeRays:
    """Two-ray geometry, losses, blockage and phases for ground points ``pos``.

    The reflected ray is traced through the image point below the ground;
    its length difference uses ``|S - P'|^2 - |S - P|^2 = 4 z_s h`` so it
    stays exact despite both paths being hundreds of kilometres.
    """
    f_c = cfg.f_c if f_c is None else f_c
    atmosphere = load_atmosphere() if atmosphere is None else atmosphere
    pos = np.atleast_2d(np.asarray(pos, dtype=float))
    n = len(pos)
    S = sat.position
    h = pos[:, 2]
    image = pos * np.array([1.0, 1.0, -1.0])
    to_sat = S - pos
    d_los = np.linalg.norm(to_sat, axis=1)
    d_gr = np.linalg.norm(S - image, axis=1)
    delta = 4.0 * S[2] * h / (d_gr + d_los)
    t = h / (S[2] + h)
    refl = image + t[:, None] * (S - image)
    refl[:, 2] = 0.0
    horiz = np.hypot(S[0] - image[:, 0], S[1] - image[:, 1])
    alpha_i = np.arctan2(horiz, S[2] + h)

    if buildings is not None and len(buildings) and n:
        a = np.vstack([pos, pos, refl])
        b = np.vstack([np.broadcast_to(S, (n, 3)), refl, np.broadcast_to(S, (n, 3))])
        hit = buildings.segments_blocked(a, b)
        blocked_los = hit[:n]
        blocked_gr = hit[n:2 * n] | hit[2 * n:]
    else:
        blocked_los = np.zeros(n, dtype=bool)
        blocked_gr = np.zeros(n, dtype=bool)

    lam = wavelength(f_c)
    phase_los = path_phase(d_los, f_c)
    phase_gr = np.mod(phase_los + 2.0 * np.pi * np.mod(delta, lam) / lam + material.phi_R, 2.0 * np.pi)
    down = refl - pos
    dn = np.linalg.norm(down, axis=1, keepdims=True)
    dir_gr = np.where(dn > 0, down / np.where(dn > 0, dn, 1.0), np.array([0.0, 0.0, -1.0]))
    return NodeRays(
        pos=pos, d_los=d_los, d_gr=d_gr, refl=refl, alpha_i=alpha_i,
        L_fs_los=free_space_loss(d_los, f_c), L_fs_gr=free_space_loss(d_gr, f_c),
        L_R=reflection_loss(alpha_i, material, f_c),
        L_A=float(atmospheric_loss(atmosphere.profile(f_c), sat.alpha_s, S[2])),
        blocked_los=blocked_los, blocked_gr=blocked_gr,
        g_rx_los=satellite_gain(sat, cfg, pos), g_rx_gr=satellite_gain(sat, cfg, refl),
        phase_los=phase_los, phase_gr=phase_gr,
        dir_los=to_sat / d_los[:, None], dir_gr=dir_gr,
        sat_az=np.mod(np.arctan2(to_sat[:, 0], to_sat[:, 1]), 2.0 * np.pi),
    )


def link_fields(rays: NodeRays, idx, steer, pattern: BeamPattern, p_tx_dbw, gate=True):
    """Complex LoS and GR fields for transmitters ``rays[idx]`` steered along
    unit vectors ``steer``. ``gate=False`` silences a link entirely (sector
    not facing the satellite)."""
    idx = np.asarray(idx, dtype=np.int64)
    steer = np.atleast_2d(steer)
    g_los = pattern_gain(pattern, angle_between(steer, rays.dir_los[idx]))
    g_gr = pattern_gain(pattern, angle_between(steer, rays.dir_gr[idx]))
    b_los = p_tx_dbw + g_los + rays.g_rx_los[idx] - rays.L_fs_los[idx] - rays.L_A
    b_gr = p_tx_dbw + g_gr + rays.g_rx_gr[idx] - rays.L_fs_gr[idx] - rays.L_R[idx] - rays.L_A
    on = np.broadcast_to(gate, idx.shape)
    a_los = np.where(on & ~rays.blocked_los[idx], amplitude_from_db(b_los), 0.0)
    a_gr = np.where(on & ~rays.blocked_gr[idx], amplitude_from_db(b_gr), 0.0)
    return (a_los * np.exp(1j * rays.phase_los[idx]), a_gr * np.exp(1j * rays.phase_gr[idx]), g_los, g_gr)


def node_contribution(tx_pos, rx_pos, pattern: BeamPattern, p_tx_dbw, sat: SatelliteState,
                      cfg: SatelliteConfig, buildings=None, material=CONCRETE, atmosphere=None,
                      carrier_phase=0.0, gate=True):
    """The two :class:`~rfisim.propagation.RayContribution` of one transmitter
    beamformed at ``rx_pos``."""
    rays = node_rays([tx_pos], sat, cfg, buildings, material, atmosphere)
    steer = np.asarray(rx_pos, float) - np.asarray(tx_pos, float)
    steer = steer / np.linalg.norm(steer)
    _, _, g_los, g_gr = link_fields(rays, [0], steer, pattern, p_tx_dbw, gate)
    blocked_los = bool(rays.blocked_los[0]) or not gate
    blocked_gr = bool(rays.blocked_gr[0]) or not gate
    los = make_ray(LOS, rays.d_los[0], cfg.f_c, p_tx_dbw, g_los[0], rays.g_rx_los[0], rays.L_A,
                   rays.phase_los[0] + carrier_phase, blocked_los)
    gr = make_ray(GR, rays.d_gr[0], cfg.f_c, p_tx_dbw, g_gr[0], rays.g_rx_gr[0], rays.L_A,
                  rays.phase_gr[0] + carrier_phase, blocked_gr, L_R=rays.L_R[0])
    return los, gr


# ---------------------------------------------------------------------------
# link tables


@dataclass
class LinkTable:
    """Precomputed per-link fields for one satellite placement.

    Urban: entry ``k`` is UE ``topology.sector_ues[k]``; ``dl_*`` are the
    fields when its gNB transmits to it, ``ul_*`` when it transmits.
    Backhaul: entry ``k`` is directed link ``k``, only ``dl_*`` is used.
    """

    scenario_type: str
    dl_los: np.ndarray
    dl_gr: np.ndarray
    ul_los: np.ndarray
    ul_gr: np.ndarray
    sector_start: np.ndarray
    populated: np.ndarray
    link_tx_sector: np.ndarray
    link_rx_sector: np.ndarray
    n_sectors: int
    n_nodes: int
    unblocked_los: int
    unblocked_gr: int
    single_node_mean: float


def build_link_table(topo: Topology, sat: SatelliteState, cfg: SatelliteConfig, buildings=None,
                     material=CONCRETE, atmosphere=None) -> LinkTable:
    g, u = topo.gnbs, topo.ues
    pos = np.vstack([g.positions, u.positions])
    rays = node_rays(pos, sat, cfg, buildings, material, atmosphere)
    n_g = len(g)
    empty = np.zeros(0, dtype=complex)
    if topo.scenario_type == BACKHAUL:
        tx, rx = topo.link_tx, topo.link_rx
        steer = _unit(g.positions[rx] - g.positions[tx])
        gate = sector_contains(_boresight(g, topo.link_tx_sector), 2 * np.pi / GNB_SECTORS, rays.sat_az[tx])
        dl_los, dl_gr, _, _ = link_fields(rays, tx, steer, g.pattern, dbm_to_dbw(g.tx_power_dbm), gate)
        ul_los = ul_gr = empty
        single = np.abs(dl_los + dl_gr) ** 2
    else:
        ue = topo.sector_ues
        gn = topo.attach[ue]
        steer = _unit(u.positions[ue] - g.positions[gn])
        gate = sector_contains(_boresight(g, topo.ue_sector[ue]), 2 * np.pi / GNB_SECTORS, rays.sat_az[gn])
        dl_los, dl_gr, _, _ = link_fields(rays, gn, steer, g.pattern, dbm_to_dbw(g.tx_power_dbm), gate)
        ul_los, ul_gr, _, _ = link_fields(rays, n_g + ue, -steer, u.pattern, dbm_to_dbw(u.tx_power_dbm))
        single = np.concatenate([np.abs(dl_los + dl_gr) ** 2, np.abs(ul_los + ul_gr) ** 2])
    return LinkTable(
        scenario_type=topo.scenario_type,
        dl_los=dl_los, dl_gr=dl_gr, ul_los=ul_los, ul_gr=ul_gr,
        sector_start=topo.sector_start, populated=topo.populated_sectors,
        link_tx_sector=topo.link_tx_sector, link_rx_sector=topo.link_rx_sector,
        n_sectors=topo.n_sectors, n_nodes=len(pos),
        unblocked_los=int((~rays.blocked_los).sum()), unblocked_gr=int((~rays.blocked_gr).sum()),
        single_node_mean=float(single.mean()) if single.size else 0.0,
    )


def _unit(v):
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    return v / n


def _boresight(gnbs, global_sector):
    g = global_sector // GNB_SECTORS
    k = global_sector % GNB_SECTORS
    return gnbs.sector_offset[g] + k * 2 * np.pi / GNB_SECTORS


# ---------------------------------------------------------------------------
# iterations


@dataclass
class ActiveSet:
    """Links active in one iteration.

    Urban: ``links`` index the link table, ``downlink`` says whether the gNB
    (True) or the UE transmits. Backhaul: ``links`` are directed links.
    """

    links: np.ndarray
    downlink: np.ndarray
    phase: np.ndarray


def sample_activity(table: LinkTable, cfg: CampaignConfig, rng: np.random.Generator) -> ActiveSet:
    """Draw the active links of one iteration.

    The number of random draws is fixed by the topology alone, so two
    configurations differing only in ``rho`` see coupled activity.
    """
    if table.scenario_type == BACKHAUL:
        n = len(table.dl_los)
        order = rng.permutation(n)
        accept = rng.random(n) < cfg.rho
        phase = rng.uniform(0.0, 2.0 * np.pi, n)
        active = kernels.activate_links(order, accept.astype(np.uint8), table.link_tx_sector,
                                        table.link_rx_sector, table.n_sectors).astype(bool)
        links = np.flatnonzero(active)
        return ActiveSet(links, np.ones(links.size, dtype=bool), phase[links])
    pop = table.populated
    counts = table.sector_start[pop + 1] - table.sector_start[pop]
    on = rng.random(pop.size) < cfg.rho
    pick = table.sector_start[pop] + (rng.random(pop.size) * counts).astype(np.int64)
    downlink = rng.random(pop.size) < cfg.p_tx_given_active
    phase = rng.uniform(0.0, 2.0 * np.pi, pop.size)
    return ActiveSet(pick[on], downlink[on], phase[on])


@dataclass
class IterationResult:
    """Linear powers (W) per category plus the active-link count.

    ``fields``, when kept, holds every active ray's field after the carrier
    rotation, with ``field_kinds`` naming its category.
    """

    power: dict
    n_active: int
    fields: np.ndarray | None = None
    field_kinds: np.ndarray | None = None

    def dbw(self, category="total") -> float:
        return float(lin_to_db(self.power[category]))


def run_iteration(table: LinkTable, cfg: CampaignConfig, rng: np.random.Generator,
                  keep_fields: bool = False) -> IterationResult:
    act = sample_activity(table, cfg, rng)
    rot = np.exp(1j * act.phase)
    dl, ul = act.downlink, ~act.downlink
    if table.scenario_type == BACKHAUL:
        parts = {
            "gnb_los": table.dl_los[act.links] * rot,
            "gnb_gr": table.dl_gr[act.links] * rot,
            "ue_los": np.zeros(0, complex),
            "ue_gr": np.zeros(0, complex),
        }
    else:
        parts = {
            "gnb_los": table.dl_los[act.links[dl]] * rot[dl],
            "gnb_gr": table.dl_gr[act.links[dl]] * rot[dl],
            "ue_los": table.ul_los[act.links[ul]] * rot[ul],
            "ue_gr": table.ul_gr[act.links[ul]] * rot[ul],
        }
    s = {k: v.sum() for k, v in parts.items()}
    sums = {
        **s,
        "gnb": s["gnb_los"] + s["gnb_gr"],
        "ue": s["ue_los"] + s["ue_gr"],
        "los": s["gnb_los"] + s["ue_los"],
        "gr": s["gnb_gr"] + s["ue_gr"],
        "total": s["gnb_los"] + s["gnb_gr"] + s["ue_los"] + s["ue_gr"],
    }
    power = {k: float(abs(v) ** 2) for k, v in sums.items()}
    res = IterationResult(power, int(act.links.size))
    if keep_fields:
        res.fields = np.concatenate(list(parts.values()))
        res.field_kinds = np.concatenate([np.full(v.size, k) for k, v in parts.items()])
    return res


def iteration_rng(seed: int, az_index: int, iteration: int) -> np.random.Generator:
    return np.random.default_rng([seed, az_index, iteration])


def run_iterations(table: LinkTable, cfg: CampaignConfig, az_index: int = 0):
    """Powers (iterations x categories) and active counts for one cell."""
    out = np.empty((cfg.iterations, len(CATEGORIES)))
    n_active = np.empty(cfg.iterations, dtype=np.int64)
    for k in range(cfg.iterations):
        r = run_iteration(table, cfg, iteration_rng(cfg.seed, az_index, k))
        out[k] = [r.power[c] for c in CATEGORIES]
        n_active[k] = r.n_active
    return out, n_active


# ---------------------------------------------------------------------------
# campaigns


@dataclass
class CampaignResult:
    """Outcome for one (sensor, nadir angle, load factor), pooled over azimuths.

    ``power`` has shape ``(n_azimuths, iterations, len(CATEGORIES))`` in W.
    """

    satellite: str
    f_c: float
    i_th: float
    alpha_n: float
    alpha_s: float
    rho: float
    azimuths: np.ndarray
    power: np.ndarray
    n_active: np.ndarray
    n_nodes: int
    unblocked_los: np.ndarray
    unblocked_gr: np.ndarray
    single_node_mean: np.ndarray
    extra: dict = field(default_factory=dict)

    def dbw(self, category="total") -> np.ndarray:
        return lin_to_db(self.power[..., CATEGORIES.index(category)])

    @property
    def samples(self) -> np.ndarray:
        """Pooled aggregate interference (dBW), floored for finite output."""
        return np.maximum(self.dbw().ravel(), POWER_FLOOR_DBW)

    def ecdf(self):
        """Knots ``(x, F(x))`` of the empirical CDF of aggregate power."""
        x = np.sort(self.samples)
        return x, np.arange(1, x.size + 1) / x.size

    def ecdf_at(self, value) -> float:
        x, _ = self.ecdf()
        return float(np.searchsorted(x, value, side="right") / x.size)

    @property
    def p_exceed(self) -> float:
        """``P(I > i_th)``, strict inequality."""
        return float(np.mean(self.dbw().ravel() > self.i_th))

    @property
    def mean_dbw(self) -> float:
        return float(lin_to_db(self.power[..., -1].mean()))

    @property
    def median_dbw(self) -> float:
        return float(np.median(self.samples))

    @property
    def p95_dbw(self) -> float:
        return float(np.percentile(self.samples, 95))

    @property
    def single_node_mean_dbw(self) -> float:
        return float(lin_to_db(self.single_node_mean.mean()))

    @property
    def unblocked_fraction(self) -> float:
        return float(self.unblocked_los.mean() / self.n_nodes) if self.n_nodes else float("nan")

    def by_azimuth(self) -> list[dict]:
        rows = []
        for j, az in enumerate(self.azimuths):
            tot = lin_to_db(self.power[j, :, -1])
            rows.append({
                "alpha_az_deg": float(np.rad2deg(az)),
                "p_exceed": float(np.mean(tot > self.i_th)),
                "mean_dbw": _finite(lin_to_db(self.power[j, :, -1].mean())),
                "median_dbw": _finite(np.median(np.maximum(tot, POWER_FLOOR_DBW))),
                "unblocked_los": int(self.unblocked_los[j]),
                "unblocked_gr": int(self.unblocked_gr[j]),
            })
        return rows

    def summary(self, ecdf_points: int = 101) -> dict:
        x, p = self.ecdf()
        q = np.linspace(0.0, 1.0, ecdf_points)
        return {
            "satellite": self.satellite,
            "f_c_hz": self.f_c,
            "i_th_dbw": self.i_th,
            "alpha_n_deg": float(np.rad2deg(self.alpha_n)),
            "alpha_s_deg": float(np.rad2deg(self.alpha_s)),
            "rho": self.rho,
            "iterations": int(self.power.shape[1]),
            "azimuths": int(self.power.shape[0]),
            "p_exceed": self.p_exceed,
            "mean_dbw": _finite(self.mean_dbw),
            "median_dbw": self.median_dbw,
            "p95_dbw": self.p95_dbw,
            "single_node_mean_dbw": _finite(self.single_node_mean_dbw),
            "mean_active_links": float(self.n_active.mean()),
            "nodes": self.n_nodes,
            "unblocked_fraction": self.unblocked_fraction,
            "ecdf": {"quantile": q.tolist(), "dbw": np.quantile(x, q).tolist()},
            "by_azimuth": self.by_azimuth(),
            **self.extra,
        }

    def write(self, outdir, stem: str) -> None:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        with (outdir / f"{stem}.csv").open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["alpha_az_deg", "iteration", "n_active", *[f"{c}_dbw" for c in CATEGORIES]])
            db = np.maximum(lin_to_db(self.power), POWER_FLOOR_DBW)
            for j, az in enumerate(self.azimuths):
                for k in range(self.power.shape[1]):
                    w.writerow([f"{np.rad2deg(az):.6g}", k, int(self.n_active[j, k]),
                                *[f"{v:.6f}" for v in db[j, k]]])
        (outdir / f"{stem}.json").write_text(json.dumps(self.summary(), indent=2) + "\n")


def _finite(v):
    return float(max(v, POWER_FLOOR_DBW))


@dataclass
class _CellTask:
    topo: Topology
    buildings: object
    cfg: SatelliteConfig
    alpha_n: float
    az: float
    az_index: int
    rhos: tuple
    camp: CampaignConfig
    atmosphere: object


def _run_cell(task: _CellTask):
    sat = make_satellite(task.cfg, task.alpha_n, task.az)
    table = build_link_table(task.topo, sat, task.cfg, task.buildings, task.camp.material, task.atmosphere)
    runs = []
    for rho in task.rhos:
        cfg = CampaignConfig(task.camp.iterations, rho, task.camp.p_tx_given_active, task.camp.seed,
                             task.camp.material)
        runs.append(run_iterations(table, cfg, task.az_index))
    return sat.alpha_s, table, runs


def run_campaign(topo: Topology, buildings, satellites, alpha_ns, azimuths, cfg: CampaignConfig,
                 rhos=None, atmosphere=None, workers: int = 1) -> list[CampaignResult]:
    """One :class:`CampaignResult` per (satellite, nadir angle, rho), in that
    nesting order. ``alpha_ns`` and ``azimuths`` are in radians."""
    rhos = tuple([cfg.rho] if rhos is None else rhos)
    atmosphere = load_atmosphere() if atmosphere is None else atmosphere
    tasks = [
        _CellTask(topo, buildings, s, float(an), float(az), j, rhos, cfg, atmosphere)
        for s in satellites for an in alpha_ns for j, az in enumerate(azimuths)
    ]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            cells = list(ex.map(_run_cell, tasks))
    else:
        cells = [_run_cell(t) for t in tasks]

    results = []
    n_az = len(azimuths)
    i = 0
    for s in satellites:
        for an in alpha_ns:
            block = cells[i:i + n_az]
            i += n_az
            for r, rho in enumerate(rhos):
                results.append(CampaignResult(
                    satellite=s.name, f_c=s.f_c, i_th=s.i_th, alpha_n=float(an), alpha_s=block[0][0],
                    rho=float(rho), azimuths=np.asarray(azimuths, dtype=float),
                    power=np.stack([c[2][r][0] for c in block]),
                    n_active=np.stack([c[2][r][1] for c in block]),
                    n_nodes=block[0][1].n_nodes,
                    unblocked_los=np.array([c[1].unblocked_los for c in block]),
                    unblocked_gr=np.array([c[1].unblocked_gr for c in block]),
                    single_node_mean=np.array([c[1].single_node_mean for c in block]),
                ))
    return results


# ---------------------------------------------------------------------------
# single link


def single_link_sweep(freqs, alpha_bfs, h_tx=3.0, alpha_n=np.deg2rad(35.0), h_a=400e3,
                      tx_pattern: BeamPattern = BeamPattern.from_degrees(35.0, 3.0, -8.5),
                      sat_gain=38.5, sat_theta_hb=np.deg2rad(2.0), p_tx_dbw=0.0,
                      material=CONCRETE, atmosphere=None):
    """Interference from one transmitter at the network centre over a
    frequency sweep, for each elevation steering angle in ``alpha_bfs``
    (radians from the downward vertical, steered in the satellite's azimuth).

    Returns a list of row dicts with LoS, GR and combined powers (dBW) and
    the constructive/destructive bounds.
    """
    atmosphere = load_atmosphere() if atmosphere is None else atmosphere
    rows = []
    for f in np.asarray(freqs, dtype=float):
        cfg = SatelliteConfig("single-link", h_a, float(sat_theta_hb), float(f), "conical", -163.0,
                              g_s=float(sat_gain))
        sat = make_satellite(cfg, alpha_n, 0.0)
        rays = node_rays([[0.0, 0.0, h_tx]], sat, cfg, None, material, atmosphere)
        for a_bf in np.asarray(alpha_bfs, dtype=float):
            steer = enu_direction(rays.sat_az[0], a_bf - np.pi / 2)
            f_los, f_gr, _, _ = link_fields(rays, [0], steer, tx_pattern, p_tx_dbw)
            a1, a2 = abs(f_los[0]), abs(f_gr[0])
            rows.append({
                "f_c_hz": float(f),
                "alpha_bf_deg": float(np.rad2deg(a_bf)),
                "i_los_dbw": float(lin_to_db(a1**2)),
                "i_gr_dbw": float(lin_to_db(a2**2)),
                "i_combined_dbw": float(lin_to_db(abs(f_los[0] + f_gr[0]) ** 2)),
                "i_constructive_dbw": float(lin_to_db((a1 + a2) ** 2)),
                "i_destructive_dbw": float(lin_to_db((a1 - a2) ** 2)),
            })
    return rows
