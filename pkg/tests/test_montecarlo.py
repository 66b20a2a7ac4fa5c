from __future__ import annotations

import cmath
import json
import math
from decimal import Decimal, getcontext

import numpy as np
import pytest
import shapely

from rfisim.antenna import GNB_PATTERN, UE_PATTERN
from rfisim.buildings import BuildingSet
from rfisim.montecarlo import (
    CATEGORIES,
    CampaignConfig,
    LinkTable,
    build_link_table,
    iteration_rng,
    node_contribution,
    run_campaign,
    run_iteration,
    run_iterations,
    sample_activity,
    single_link_sweep,
)
from rfisim.propagation import CONCRETE, atmospheric_loss, combine_rays
from rfisim.satellite import make_satellite, preset
from rfisim.scenario import (
    BACKHAUL,
    URBAN,
    GeoScenario,
    Topology,
    attach_ues,
    build_topology,
    make_gnbs,
    make_ues,
)
from rfisim.units import POWER_FLOOR_DBW, SPEED_OF_LIGHT

TEMPEST = preset("tempest-178")
NO_BUILDINGS = BuildingSet([], [])


def _table(n_sectors, ues_per_sector=1, populated=None):
    """Hand-made urban link table with unit-amplitude fields."""
    counts = np.full(n_sectors, ues_per_sector) if populated is None else populated
    start = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    n = int(start[-1])
    ones = np.ones(n, dtype=complex)
    return LinkTable(URBAN, ones, 0.5 * ones, 0.25 * ones, 0.125 * ones, start,
                     np.flatnonzero(counts > 0), np.zeros(0, np.int64), np.zeros(0, np.int64),
                     n_sectors, n, n, n, 1.0)


def _one_link_topology(gnb_h=10.0, ue_xy=(60.0, 0.0)):
    """One gNB at the origin (sector 0 boresight north) serving one UE."""
    gnbs = make_gnbs([[0.0, 0.0]], [gnb_h], [0.0])
    ues = make_ues(np.asarray([ue_xy]), [1.7])
    attach, sector, start, items = attach_ues(gnbs, ues, NO_BUILDINGS)
    return Topology(URBAN, gnbs, ues, attach, sector, start, items)


# -- activity ----------------------------------------------------------------


def test_full_load_activates_every_populated_sector(rng):
    table = _table(12, populated=np.array([1, 0, 3, 2, 0, 1, 5, 0, 0, 1, 2, 1]))
    act = sample_activity(table, CampaignConfig(rho=1.0), rng)
    sectors = np.searchsorted(table.sector_start, act.links, side="right") - 1
    assert sorted(sectors) == list(table.populated)


def test_zero_load_is_silent(rng):
    act = sample_activity(_table(50), CampaignConfig(rho=0.0), rng)
    assert act.links.size == 0
    res = run_iteration(_table(50), CampaignConfig(rho=0.0), rng)
    assert res.n_active == 0
    assert all(p == 0.0 for p in res.power.values())
    assert res.dbw() == -np.inf


def test_half_load_fraction():
    table = _table(10_000)
    frac = np.array([sample_activity(table, CampaignConfig(rho=0.5), iteration_rng(0, 0, k)).links.size
                     for k in range(200)]) / 1e4
    assert 0.49 <= frac[0] <= 0.51
    # the window is two binomial standard deviations wide: ~95% coverage
    assert np.mean((frac >= 0.49) & (frac <= 0.51)) > 0.9
    assert frac.mean() == pytest.approx(0.5, abs=0.002)


def test_served_ue_is_uniform():
    table = _table(1, ues_per_sector=4)
    picks = np.concatenate([sample_activity(table, CampaignConfig(), iteration_rng(1, 0, k)).links
                            for k in range(4000)])
    counts = np.bincount(picks, minlength=4)
    assert counts.sum() == 4000
    assert np.all(np.abs(counts - 1000) < 5 * np.sqrt(1000 * 0.75))


def test_direction_split():
    table = _table(10_000)
    act = sample_activity(table, CampaignConfig(p_tx_given_active=0.5), iteration_rng(2, 0, 0))
    assert 0.48 < act.downlink.mean() < 0.52
    for p in (0.0, 1.0):
        act = sample_activity(table, CampaignConfig(p_tx_given_active=p), iteration_rng(2, 0, 0))
        assert np.all(act.downlink == bool(p))


def test_backhaul_one_link_per_sector(grid):
    topo = build_topology(grid, BACKHAUL, lambda_g=100.0, seed=4)
    assert len(topo.link_tx) > 10
    sat = make_satellite(TEMPEST, np.deg2rad(35.0), 0.0, center=grid.center)
    table = build_link_table(topo, sat, TEMPEST, grid.buildings)
    for rho in (1.0, 0.5):
        for k in range(20):
            act = sample_activity(table, CampaignConfig(rho=rho), iteration_rng(0, 0, k))
            used = np.concatenate([topo.link_tx_sector[act.links], topo.link_rx_sector[act.links]])
            assert np.unique(used).size == used.size
    # at full load the active set is maximal: every other link conflicts with it
    act = sample_activity(table, CampaignConfig(rho=1.0), iteration_rng(0, 0, 0))
    used = set(topo.link_tx_sector[act.links]) | set(topo.link_rx_sector[act.links])
    for k in set(range(len(topo.link_tx))) - set(act.links):
        assert topo.link_tx_sector[k] in used or topo.link_rx_sector[k] in used


def test_config_validation():
    for kw in ({"rho": 1.5}, {"rho": -0.1}, {"iterations": 0}, {"p_tx_given_active": 2.0}):
        with pytest.raises(ValueError):
            CampaignConfig(**kw)


# -- single contributions ----------------------------------------------------


def test_courtyard_node_is_fully_blocked(atmosphere):
    ring = shapely.box(-30, -30, 30, 30).difference(shapely.box(-10, -10, 10, 10))
    walls = BuildingSet([ring], [40.0])
    sat = make_satellite(TEMPEST, np.deg2rad(65.0), np.deg2rad(30.0))
    los, gr = node_contribution((0.0, 0.0, 3.0), (5.0, 5.0, 1.7), GNB_PATTERN, -20.0, sat, TEMPEST,
                                walls, CONCRETE, atmosphere)
    assert los.blocked and gr.blocked
    assert los.field == 0 and gr.field == 0
    assert combine_rays([los, gr]) == -np.inf


def test_horizontal_beam_amplifies_neither_ray(atmosphere):
    az = np.deg2rad(70.0)
    sat = make_satellite(TEMPEST, np.deg2rad(35.0), az)
    rx = (300.0 * np.sin(az), 300.0 * np.cos(az), 3.0)
    los, gr = node_contribution((0.0, 0.0, 3.0), rx, GNB_PATTERN, -20.0, sat, TEMPEST,
                                None, CONCRETE, atmosphere)
    assert not los.blocked and not gr.blocked
    edge = GNB_PATTERN.g_max - 3.0
    assert los.g_tx <= edge and gr.g_tx <= edge
    assert los.g_tx == pytest.approx(GNB_PATTERN.g_floor)


def test_steering_selects_amplified_ray(atmosphere):
    rows = single_link_sweep([178e9], np.deg2rad([35.0, 125.0]), atmosphere=atmosphere)
    c1, c2 = rows
    assert c1["i_gr_dbw"] > c1["i_los_dbw"]
    assert c2["i_los_dbw"] > c2["i_gr_dbw"]
    assert c1["i_gr_dbw"] - c1["i_los_dbw"] > 10
    for r in rows:
        assert r["i_destructive_dbw"] <= r["i_combined_dbw"] <= r["i_constructive_dbw"]


def test_sector_gate_silences_link(atmosphere):
    sat = make_satellite(TEMPEST, np.deg2rad(35.0), 0.0)
    los, gr = node_contribution((0.0, 0.0, 3.0), (0.0, -50.0, 1.7), GNB_PATTERN, -20.0, sat, TEMPEST,
                                None, CONCRETE, atmosphere, gate=False)
    assert los.field == 0 and gr.field == 0 and los.blocked and gr.blocked


# -- scalar link-budget oracle ------------------------------------------------


def _scalar_budget(tx, rx, pattern, p_tx_dbw, sat, cfg, atmosphere):
    """Power (dBW) of one unblocked two-ray link, from first principles.

    Path lengths are taken at 40 significant digits so the path difference
    does not lose precision to the 400 km slant range.
    """
    getcontext().prec = 40
    S = [Decimal(float(v)) for v in sat.position]
    P = [Decimal(float(v)) for v in tx]
    img = [P[0], P[1], -P[2]]

    def dist(a, b):
        return sum((x - y) ** 2 for x, y in zip(a, b)).sqrt()

    d_los, d_gr = dist(S, P), dist(S, img)
    lam = SPEED_OF_LIGHT / cfg.f_c
    lam_d = Decimal(SPEED_OF_LIGHT) / Decimal(cfg.f_c)
    dphi = 2.0 * math.pi * float((d_gr - d_los) % lam_d / lam_d) + math.pi
    d_los_f, d_gr_f = float(d_los), float(d_gr)

    s = [float(v) for v in sat.position]
    t = tx[2] / (s[2] + tx[2])
    refl = [tx[0] + t * (s[0] - tx[0]), tx[1] + t * (s[1] - tx[1]), 0.0]
    alpha_i = math.atan2(math.hypot(s[0] - tx[0], s[1] - tx[1]), s[2] + tx[2])

    def unit(v):
        n = math.sqrt(sum(x * x for x in v))
        return [x / n for x in v]

    def angle(u, v):
        c = sum(a * b for a, b in zip(unit(u), unit(v)))
        return math.acos(max(-1.0, min(1.0, c)))

    def gain(pat_max, hb, floor, theta):
        return pat_max - min(12.0 * (theta / hb) ** 2, pat_max - floor)

    steer = [r - x for r, x in zip(rx, tx)]
    g_tx_los = gain(pattern.g_max, pattern.theta_hb, pattern.g_floor, angle(steer, [a - b for a, b in zip(s, tx)]))
    g_tx_gr = gain(pattern.g_max, pattern.theta_hb, pattern.g_floor, angle(steer, [a - b for a, b in zip(refl, tx)]))
    bore = list(sat.boresight)
    g_rx_los = gain(cfg.g_s, cfg.theta_hb, cfg.g_floor, angle(bore, [a - b for a, b in zip(tx, s)]))
    g_rx_gr = gain(cfg.g_s, cfg.theta_hb, cfg.g_floor, angle(bore, [a - b for a, b in zip(refl, s)]))

    fsl = lambda d: 20.0 * math.log10(4.0 * math.pi * d / lam)  # noqa: E731
    c = math.cos(alpha_i)
    r = (c - cmath.sqrt(5.24 - math.sin(alpha_i) ** 2)) / (c + cmath.sqrt(5.24 - math.sin(alpha_i) ** 2))
    rough = math.exp(-0.5 * (4.0 * math.pi * 0.05e-3 * c / lam) ** 2)
    L_R = -20.0 * math.log10(abs(r) * rough)
    L_A = float(atmospheric_loss(atmosphere.profile(cfg.f_c), sat.alpha_s, s[2]))

    a_los = 10 ** ((p_tx_dbw + g_tx_los + g_rx_los - fsl(d_los_f) - L_A) / 20.0)
    a_gr = 10 ** ((p_tx_dbw + g_tx_gr + g_rx_gr - fsl(d_gr_f) - L_R - L_A) / 20.0)
    return 10.0 * math.log10(abs(a_los + a_gr * cmath.exp(1j * dphi)) ** 2)


@pytest.mark.parametrize("alpha_n", [10.0, 35.0])
@pytest.mark.parametrize("downlink", [True, False])
def test_single_active_link_matches_scalar_budget(alpha_n, downlink, atmosphere):
    # UE due east of the gNB: sector 1 (boresight 120 deg) serves it and must
    # face the satellite for the downlink to radiate
    topo = _one_link_topology()
    sat = make_satellite(TEMPEST, np.deg2rad(alpha_n), np.deg2rad(110.0))
    table = build_link_table(topo, sat, TEMPEST, NO_BUILDINGS, CONCRETE, atmosphere)
    cfg = CampaignConfig(rho=1.0, p_tx_given_active=float(downlink))
    res = run_iteration(table, cfg, iteration_rng(0, 0, 0))
    assert res.n_active == 1
    gnb, ue = (0.0, 0.0, 10.0), (60.0, 0.0, 1.7)
    if downlink:
        want = _scalar_budget(gnb, ue, GNB_PATTERN, -20.0, sat, TEMPEST, atmosphere)
        assert res.power["ue_los"] == 0 and res.power["ue_gr"] == 0
    else:
        want = _scalar_budget(ue, gnb, UE_PATTERN, -20.0, sat, TEMPEST, atmosphere)
        assert res.power["gnb_los"] == 0 and res.power["gnb_gr"] == 0
    assert res.dbw() == pytest.approx(want, abs=1e-9)


def test_node_contribution_matches_scalar_budget(atmosphere):
    sat = make_satellite(TEMPEST, np.deg2rad(35.0), np.deg2rad(250.0))
    tx, rx = (5.0, -3.0, 8.0), (-40.0, -20.0, 1.7)
    los, gr = node_contribution(tx, rx, GNB_PATTERN, -20.0, sat, TEMPEST, None, CONCRETE, atmosphere)
    want = _scalar_budget(tx, rx, GNB_PATTERN, -20.0, sat, TEMPEST, atmosphere)
    assert combine_rays([los, gr]) == pytest.approx(want, abs=1e-9)


def test_downlink_outside_facing_sector_is_silent(atmosphere):
    topo = _one_link_topology()
    sat = make_satellite(TEMPEST, np.deg2rad(35.0), np.deg2rad(300.0))
    table = build_link_table(topo, sat, TEMPEST, NO_BUILDINGS, CONCRETE, atmosphere)
    res = run_iteration(table, CampaignConfig(rho=1.0, p_tx_given_active=1.0), iteration_rng(0, 0, 0))
    assert res.n_active == 1 and res.power["total"] == 0.0


# -- coherent combination ----------------------------------------------------


@pytest.mark.parametrize("n", [2, 5, 16])
def test_equal_phase_transmitters_add_coherently(n, atmosphere):
    sat = make_satellite(TEMPEST, np.deg2rad(10.0), 0.0)
    rays = [node_contribution((0.0, 0.0, 5.0), (0.0, 80.0, 1.7), GNB_PATTERN, -20.0, sat, TEMPEST,
                              None, CONCRETE, atmosphere, carrier_phase=0.7)
            for _ in range(n)]
    single = combine_rays(rays[0])
    total = combine_rays([r for pair in rays for r in pair])
    assert total - single == pytest.approx(20.0 * np.log10(n), abs=1e-9)


def test_random_phases_add_incoherently_on_average():
    amps = np.array([1.0, 0.7, 0.3, 0.2, 0.05])
    table = _table(5)
    table.dl_los = amps.astype(complex)
    table.dl_gr = np.zeros(5, complex)
    cfg = CampaignConfig(iterations=20_000, rho=1.0, p_tx_given_active=1.0)
    power, _ = run_iterations(table, cfg)
    mean = power[:, CATEGORIES.index("total")].mean()
    assert mean == pytest.approx(np.sum(amps**2), rel=0.02)


def test_categories_resum_from_fields():
    table = _table(40, ues_per_sector=3)
    gen = np.random.default_rng(3)
    for name in ("dl_los", "dl_gr", "ul_los", "ul_gr"):
        setattr(table, name, gen.normal(size=120) + 1j * gen.normal(size=120))
    res = run_iteration(table, CampaignConfig(rho=0.7), iteration_rng(5, 1, 2), keep_fields=True)
    f, kind = res.fields, res.field_kinds
    groups = {
        "gnb_los": ["gnb_los"], "gnb_gr": ["gnb_gr"], "ue_los": ["ue_los"], "ue_gr": ["ue_gr"],
        "gnb": ["gnb_los", "gnb_gr"], "ue": ["ue_los", "ue_gr"],
        "los": ["gnb_los", "ue_los"], "gr": ["gnb_gr", "ue_gr"],
        "total": ["gnb_los", "gnb_gr", "ue_los", "ue_gr"],
    }
    for cat, members in groups.items():
        want = abs(f[np.isin(kind, members)].sum()) ** 2
        assert res.power[cat] == pytest.approx(want, rel=1e-12)
    assert set(groups) == set(CATEGORIES)
    assert f.size == 2 * res.n_active
    # coherent, not power addition
    assert res.power["total"] != pytest.approx(sum(abs(f) ** 2), rel=1e-3)


# -- campaigns ---------------------------------------------------------------


@pytest.fixture(scope="module")
def grid_topology(grid):
    return build_topology(grid, URBAN, lambda_g=100.0, seed=7)


def _campaign(grid, topo, atmosphere, **kw):
    args = dict(satellites=[TEMPEST], alpha_ns=np.deg2rad([10.0, 65.0]),
                azimuths=np.deg2rad([0.0, 120.0, 240.0]), cfg=CampaignConfig(iterations=40, seed=11),
                rhos=[0.2, 1.0], atmosphere=atmosphere)
    args.update(kw)
    return run_campaign(topo, grid.buildings, **args)


def test_campaign_shape_and_statistics(grid, grid_topology, atmosphere):
    res = _campaign(grid, grid_topology, atmosphere)
    assert [(r.rho, round(np.rad2deg(r.alpha_n))) for r in res] == [(0.2, 10), (1.0, 10), (0.2, 65), (1.0, 65)]
    for r in res:
        assert r.power.shape == (3, 40, len(CATEGORIES))
        x, p = r.ecdf()
        assert np.all(np.diff(x) >= 0) and np.all(np.diff(p) > 0)
        assert p[0] > 0 and p[-1] == 1.0
        assert r.p_exceed == pytest.approx(1.0 - r.ecdf_at(r.i_th))
        assert 0.0 <= r.p_exceed <= 1.0
        assert r.median_dbw <= r.p95_dbw
        assert r.samples.min() >= POWER_FLOOR_DBW
        assert r.n_nodes == len(grid_topology.gnbs) + len(grid_topology.ues)
    low, full = res[0], res[1]
    assert low.mean_dbw <= full.mean_dbw
    assert np.all(low.n_active <= full.n_active)
    assert np.all(full.n_active == grid_topology.populated_sectors.size)
    # nadir 65: further away, more blockage
    assert res[3].unblocked_fraction < res[1].unblocked_fraction
    assert res[3].median_dbw < res[1].median_dbw
    assert res[3].p_exceed == 0.0


def test_campaign_is_deterministic(grid, grid_topology, atmosphere):
    a = _campaign(grid, grid_topology, atmosphere)
    b = _campaign(grid, grid_topology, atmosphere)
    c = _campaign(grid, grid_topology, atmosphere, workers=2)
    for x, y, z in zip(a, b, c):
        assert x.power.tobytes() == y.power.tobytes() == z.power.tobytes()
        assert x.summary() == y.summary() == z.summary()
    d = _campaign(grid, grid_topology, atmosphere, cfg=CampaignConfig(iterations=40, seed=12))
    assert a[1].power.tobytes() != d[1].power.tobytes()


def test_campaign_write(tmp_path, grid, grid_topology, atmosphere):
    r = _campaign(grid, grid_topology, atmosphere, rhos=[0.0])[0]
    assert r.mean_dbw == -np.inf
    r.write(tmp_path, "cell")
    lines = (tmp_path / "cell.csv").read_text().splitlines()
    assert lines[0].startswith("alpha_az_deg,iteration,n_active,gnb_los_dbw")
    assert len(lines) == 1 + 3 * 40
    assert lines[1].split(",")[-1] == "-300.000000"
    summary = json.loads((tmp_path / "cell.json").read_text())
    assert summary["mean_dbw"] == POWER_FLOOR_DBW and summary["p_exceed"] == 0.0
    assert len(summary["by_azimuth"]) == 3


def test_backhaul_exceeds_urban(grid, atmosphere):
    urban = build_topology(grid, URBAN, lambda_g=100.0, seed=2)
    backhaul = build_topology(grid, BACKHAUL, lambda_g=100.0, seed=2)
    kw = dict(satellites=[TEMPEST], alpha_ns=[np.deg2rad(10.0)], azimuths=np.deg2rad([0.0, 180.0]),
              cfg=CampaignConfig(iterations=60), atmosphere=atmosphere)
    u = run_campaign(urban, grid.buildings, **kw)[0]
    b = run_campaign(backhaul, grid.buildings, **kw)[0]
    assert b.median_dbw > u.median_dbw


def test_empty_topology_campaign(atmosphere):
    area = shapely.box(-100, -100, 100, 100)
    scn = GeoScenario(NO_BUILDINGS, area, area)
    topo = build_topology(scn, URBAN, lambda_g=1e-6)
    assert len(topo.gnbs) == 0
    r = run_campaign(topo, scn.buildings, [TEMPEST], [np.deg2rad(35.0)], [0.0],
                     CampaignConfig(iterations=5), atmosphere=atmosphere)[0]
    assert r.n_nodes == 0 and r.p_exceed == 0.0 and np.all(r.samples == POWER_FLOOR_DBW)
