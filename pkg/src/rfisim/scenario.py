"""Geodata ingestion and terrestrial network synthesis.

A :class:`GeoScenario` holds the building prisms, the region where nodes may
stand (streets and open ground) and the study area, all in a local metric
frame. On top of it a :class:`Topology` is built: gNBs from a Poisson point
process, UEs in fixed proportion, UE-to-gNB attachment and, for the backhaul
scenario, the list of gNB pairs in line of sight.

Geodata format
--------------
A GeoJSON ``FeatureCollection`` whose coordinates are already local metres
(east, north). Every feature has ``properties.kind``:

* ``"building"``: Polygon or MultiPolygon, requires a numeric ``height`` (m)
* ``"valid_region"``: where nodes may be placed (optional; defaults to the
  area minus the buildings)
* ``"area"``: the study area (optional; defaults to the bounding box of all
  features)

An optional top-level ``"origin": [lat, lon]`` records the geo-reference.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import shapely
from scipy.spatial import cKDTree
from shapely.geometry import mapping, shape

from .antenna import GNB_PATTERN, UE_PATTERN, BeamPattern, Sector, sector_index
from .buildings import BuildingSet
from .errors import GeodataError, PlacementError

GNB_HEIGHTS = (3.0, 5.0, 8.0, 10.0, 15.0)
UE_HEIGHT_RANGE = (1.6, 1.8)
GNB_SECTORS = 3
UE_PER_SECTOR = 10
URBAN = "urban"
BACKHAUL = "backhaul"
TX_POWER_DBM = {("gNB", URBAN): 10.0, ("gNB", BACKHAUL): 30.0, ("UE", URBAN): 10.0, ("UE", BACKHAUL): 10.0}


@dataclass
class GeoScenario:
    buildings: BuildingSet
    valid_region: object  # shapely (Multi)Polygon
    area: object  # shapely Polygon
    origin: tuple[float, float] | None = None
    name: str = ""

    def __post_init__(self):
        if self.area.is_empty or self.area.area <= 0:
            raise GeodataError("study area must have positive area")
        valid = shapely.intersection(self.valid_region, self.area)
        if len(self.buildings):
            valid = shapely.difference(valid, self.buildings.union)
        # canonical vertex order so that save/load round trips are exact
        self.valid_region = shapely.normalize(valid)
        shapely.prepare(self.area)
        shapely.prepare(self.valid_region)

    @property
    def area_km2(self) -> float:
        return self.area.area / 1e6

    @property
    def center(self) -> np.ndarray:
        c = self.area.centroid
        return np.array([c.x, c.y, 0.0])


# ---------------------------------------------------------------------------
# geodata I/O


def _feature_error(i, msg):
    return GeodataError(f"feature {i}: {msg}")


def geodata_from_dict(doc: dict, name: str = "") -> GeoScenario:
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise GeodataError("expected a GeoJSON FeatureCollection")
    footprints, heights, valid, areas = [], [], [], []
    for i, feat in enumerate(doc.get("features", [])):
        props = feat.get("properties") or {}
        kind = props.get("kind", "building")
        try:
            geom = shape(feat["geometry"])
        except Exception as exc:  # shapely raises several types for bad input
            raise _feature_error(i, f"bad geometry ({exc})") from None
        if geom.geom_type not in ("Polygon", "MultiPolygon"):
            raise _feature_error(i, f"expected a polygon, got {geom.geom_type}")
        if not geom.is_valid:
            raise _feature_error(i, f"polygon is not simple ({shapely.is_valid_reason(geom)})")
        if kind == "building":
            h = props.get("height")
            if h is None:
                raise _feature_error(i, "building without a height attribute")
            try:
                h = float(h)
            except (TypeError, ValueError):
                raise _feature_error(i, f"non-numeric height {h!r}") from None
            if not (np.isfinite(h) and h > 0):
                raise _feature_error(i, f"height must be positive, got {h}")
            footprints.append(geom)
            heights.append(h)
        elif kind == "valid_region":
            valid.append(geom)
        elif kind == "area":
            areas.append(geom)
        else:
            raise _feature_error(i, f"unknown kind {kind!r}")
    buildings = BuildingSet(footprints, heights)
    everything = footprints + valid + areas
    if areas:
        area = shapely.union_all(areas)
    elif everything:
        area = shapely.box(*shapely.union_all(everything).bounds)
    else:
        raise GeodataError("geodata contains no features")
    valid_region = shapely.union_all(valid) if valid else area
    origin = doc.get("origin")
    return GeoScenario(buildings, valid_region, area, tuple(origin) if origin else None, name)


def load_geodata(path) -> GeoScenario:
    """Read a geodata file (see module docstring for the format)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise GeodataError(f"cannot read {path}: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GeodataError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    try:
        return geodata_from_dict(doc, path.stem)
    except GeodataError as exc:
        raise GeodataError(f"{path}: {exc}") from None


def geodata_to_dict(scn: GeoScenario) -> dict:
    feats = [
        {"type": "Feature", "properties": {"kind": "area"}, "geometry": mapping(scn.area)},
        {"type": "Feature", "properties": {"kind": "valid_region"}, "geometry": mapping(scn.valid_region)},
    ]
    for poly, h in scn.buildings.prisms:
        feats.append({"type": "Feature", "properties": {"kind": "building", "height": h},
                      "geometry": mapping(poly)})
    doc = {"type": "FeatureCollection", "features": feats}
    if scn.origin is not None:
        doc["origin"] = list(scn.origin)
    return doc


def write_geodata(scn: GeoScenario, path) -> None:
    Path(path).write_text(json.dumps(geodata_to_dict(scn), separators=(",", ":")) + "\n")


def fixture_path(name: str) -> Path:
    """Path of a bundled geodata fixture (``manhattan_grid``, ``synthetic_city``)."""
    ref = resources.files("rfisim") / "data" / f"{name}.geojson"
    if not ref.is_file():
        raise GeodataError(f"no bundled fixture named {name!r}")
    return Path(str(ref))


def resolve_geodata(spec: str) -> GeoScenario:
    """Load ``bundled:<name>`` fixtures or a file path."""
    if spec.startswith("bundled:"):
        return load_geodata(fixture_path(spec.split(":", 1)[1]))
    return load_geodata(spec)


# ---------------------------------------------------------------------------
# synthetic fixtures


def manhattan_grid(n: int = 10, block: float = 80.0, street: float = 20.0, height: float = 20.0) -> GeoScenario:
    """``n x n`` square blocks of equal height separated by streets, centred on 0."""
    pitch = block + street
    half = (n * pitch + street) / 2.0
    boxes = []
    for i in range(n):
        for j in range(n):
            x0 = -half + street + i * pitch
            y0 = -half + street + j * pitch
            boxes.append((x0, y0, x0 + block, y0 + block))
    buildings = BuildingSet.from_boxes(boxes, [height] * len(boxes))
    area = shapely.box(-half, -half, half, half)
    return GeoScenario(buildings, area, area, name="manhattan_grid")


def synthetic_city(size: float = 2000.0, pitch: float = 100.0, street: float = 20.0,
                   park_fraction: float = 0.1, setback: float = 5.0, seed: int = 7) -> GeoScenario:
    """Irregular downtown-like fixture: blocks split into 1-4 buildings of
    varied height, some blocks left open as parks, a few courtyard buildings.

    Nodes may stand anywhere at least ``setback`` metres from a facade, so
    street nodes sit in the carriageway rather than against walls.
    """
    rng = np.random.default_rng(seed)
    half = size / 2.0
    n = int(round(size / pitch))
    footprints, heights = [], []
    alley = 3.0
    for i in range(n):
        for j in range(n):
            x0 = -half + i * pitch + street / 2.0
            y0 = -half + j * pitch + street / 2.0
            blk = pitch - street
            if rng.random() < park_fraction:
                continue
            nx, ny = rng.integers(1, 3, size=2)
            wx = (blk - (nx - 1) * alley) / nx
            wy = (blk - (ny - 1) * alley) / ny
            for a in range(nx):
                for b in range(ny):
                    bx = x0 + a * (wx + alley)
                    by = y0 + b * (wy + alley)
                    poly = shapely.box(bx, by, bx + wx, by + wy)
                    if nx == ny == 1 and rng.random() < 0.2:
                        inset = 0.3 * wx
                        poly = poly.difference(shapely.box(bx + inset, by + inset, bx + wx - inset, by + wy - inset))
                    footprints.append(poly)
                    heights.append(float(np.clip(6.0 + rng.gamma(2.0, 9.0), 6.0, 120.0)))
    area = shapely.box(-half, -half, half, half)
    buildings = BuildingSet(footprints, heights)
    valid = area.difference(buildings.union.buffer(setback)) if setback > 0 else area
    return GeoScenario(buildings, valid, area, name="synthetic_city")


# ---------------------------------------------------------------------------
# nodes


@dataclass
class GroundNode:
    id: int
    x: float
    y: float
    height: float
    kind: str
    tx_power_dbm: float
    pattern: BeamPattern
    sectors: list[Sector]


@dataclass
class NodeSet:
    """Structure-of-arrays for one node class.

    ``sector_offset[i]`` is the boresight azimuth of node ``i``'s first sector.
    """

    kind: str
    xy: np.ndarray
    height: np.ndarray
    tx_power_dbm: float
    pattern: BeamPattern
    n_sectors: int
    sector_offset: np.ndarray

    def __len__(self):
        return len(self.height)

    @property
    def positions(self) -> np.ndarray:
        return np.column_stack([self.xy, self.height]) if len(self) else np.zeros((0, 3))

    def sector_of(self, idx, az):
        """Local sector index of node(s) ``idx`` containing azimuth ``az``."""
        return sector_index(az, self.sector_offset[idx], self.n_sectors)

    def nodes(self) -> list[GroundNode]:
        width = 2 * np.pi / self.n_sectors
        out = []
        for i in range(len(self)):
            secs = [Sector(float(np.mod(self.sector_offset[i] + k * width, 2 * np.pi)), width)
                    for k in range(self.n_sectors)]
            out.append(GroundNode(i, float(self.xy[i, 0]), float(self.xy[i, 1]), float(self.height[i]),
                                  self.kind, self.tx_power_dbm, self.pattern, secs))
        return out


def make_gnbs(xy, height, sector_offset, scenario_type=URBAN) -> NodeSet:
    return NodeSet("gNB", np.asarray(xy, float).reshape(-1, 2), np.asarray(height, float),
                   TX_POWER_DBM[("gNB", scenario_type)], GNB_PATTERN, GNB_SECTORS,
                   np.asarray(sector_offset, float))


def make_ues(xy, height, scenario_type=URBAN) -> NodeSet:
    n = len(height)
    return NodeSet("UE", np.asarray(xy, float).reshape(-1, 2), np.asarray(height, float),
                   TX_POWER_DBM[("UE", scenario_type)], UE_PATTERN, 1, np.zeros(n))


@dataclass(frozen=True)
class PlacementConfig:
    projection_radius: float = 50.0
    min_spacing: float = 0.5
    max_rounds: int = 100
    erosion: float = 0.25


class _Placer:
    def __init__(self, scn: GeoScenario, cfg: PlacementConfig):
        self.scn = scn
        self.cfg = cfg
        self.bounds = scn.area.bounds
        self.target = scn.valid_region.buffer(-cfg.erosion) if cfg.erosion > 0 else scn.valid_region
        if self.target.is_empty:
            raise PlacementError("valid placement region is empty")
        shapely.prepare(self.target)

    def uniform_in_area(self, n, rng):
        x0, y0, x1, y1 = self.bounds
        out = np.zeros((0, 2))
        while len(out) < n:
            k = max(2 * (n - len(out)), 16)
            pts = np.column_stack([rng.uniform(x0, x1, k), rng.uniform(y0, y1, k)])
            pts = pts[shapely.contains_xy(self.scn.area, pts[:, 0], pts[:, 1])]
            out = np.vstack([out, pts])
        return out[:n]

    def project(self, pts):
        """Snap points to the placement region; NaN where farther than the cap."""
        pts = pts.copy()
        inside = shapely.contains_xy(self.target, pts[:, 0], pts[:, 1])
        out = ~inside
        if out.any():
            geoms = shapely.points(pts[out])
            lines = shapely.shortest_line(self.target, geoms)
            near = shapely.get_coordinates(lines).reshape(-1, 2, 2)[:, 0]
            dist = np.hypot(*(near - pts[out]).T)
            near[dist > self.cfg.projection_radius] = np.nan
            pts[out] = near
        return pts


def place_points(scn: GeoScenario, n: int, rng: np.random.Generator, avoid=None,
                 cfg: PlacementConfig = PlacementConfig()) -> np.ndarray:
    """Draw ``n`` node positions: uniform in the area, projected onto the
    valid region, rejected and redrawn when the projection is too long or a
    point lands within ``min_spacing`` of another node."""
    if n == 0:
        return np.zeros((0, 2))
    placer = _Placer(scn, cfg)
    placed = np.zeros((0, 2))
    fixed = np.asarray(avoid, dtype=float).reshape(-1, 2) if avoid is not None else np.zeros((0, 2))
    for _ in range(cfg.max_rounds):
        need = n - len(placed)
        cand = placer.project(placer.uniform_in_area(need, rng))
        ok = np.isfinite(cand[:, 0])
        others = np.vstack([fixed, placed])
        if len(others):
            d, _ = cKDTree(others).query(np.where(ok[:, None], cand, 0.0))
            ok &= d >= cfg.min_spacing
        if ok.sum() > 1:
            idx = np.flatnonzero(ok)
            for i, j in sorted(cKDTree(cand[idx]).query_pairs(cfg.min_spacing)):
                if ok[idx[i]]:
                    ok[idx[j]] = False
        placed = np.vstack([placed, cand[ok]])
        if len(placed) == n:
            return placed
    raise PlacementError(
        f"placed {len(placed)} of {n} nodes after {cfg.max_rounds} rounds "
        f"(projection radius {cfg.projection_radius} m, spacing {cfg.min_spacing} m)"
    )


def place_gnbs(scn: GeoScenario, lambda_g: float, seed: int, scenario_type=URBAN,
               cfg: PlacementConfig = PlacementConfig()) -> NodeSet:
    """Poisson point process of gNBs with density ``lambda_g`` per km^2."""
    if not lambda_g > 0:
        raise ValueError("gNB density must be positive")
    rng = np.random.default_rng([seed, 1])
    n = int(rng.poisson(lambda_g * scn.area_km2))
    xy = place_points(scn, n, rng, cfg=cfg)
    height = rng.choice(GNB_HEIGHTS, size=n)
    offset = rng.uniform(0.0, 2 * np.pi / GNB_SECTORS, size=n)
    return make_gnbs(xy, height, offset, scenario_type)


def place_ues(scn: GeoScenario, n_gnb: int, seed: int, avoid=None,
              cfg: PlacementConfig = PlacementConfig()) -> NodeSet:
    """``GNB_SECTORS * UE_PER_SECTOR`` UEs per gNB."""
    if n_gnb < 0:
        raise ValueError("gNB count must be non-negative")
    rng = np.random.default_rng([seed, 2])
    n = n_gnb * GNB_SECTORS * UE_PER_SECTOR
    xy = place_points(scn, n, rng, avoid=avoid, cfg=cfg)
    return make_ues(xy, rng.uniform(*UE_HEIGHT_RANGE, size=n))


def load_nodes_csv(path) -> dict:
    """Read ``id,x_m,y_m,height_m,kind`` rows into ``{"gNB": (xy, h), "UE": (xy, h)}``."""
    path = Path(path)
    rows = {"gNB": [], "UE": []}
    try:
        with path.open(newline="") as fh:
            reader = csv.DictReader(fh)
            missing = {"id", "x_m", "y_m", "height_m", "kind"} - set(reader.fieldnames or [])
            if missing:
                raise GeodataError(f"{path}: missing columns {sorted(missing)}")
            for lineno, r in enumerate(reader, 2):
                kind = {"gnb": "gNB", "ue": "UE"}.get(r["kind"].strip().lower())
                if kind is None:
                    raise GeodataError(f"{path}:{lineno}: unknown node kind {r['kind']!r}")
                try:
                    rows[kind].append((float(r["x_m"]), float(r["y_m"]), float(r["height_m"])))
                except ValueError:
                    raise GeodataError(f"{path}:{lineno}: non-numeric coordinate") from None
    except OSError as exc:
        raise GeodataError(f"cannot read {path}: {exc}") from None
    out = {}
    for kind, vals in rows.items():
        arr = np.asarray(vals, dtype=float).reshape(-1, 3)
        out[kind] = (arr[:, :2], arr[:, 2])
    return out


# ---------------------------------------------------------------------------
# topology


@dataclass
class Topology:
    """Placed nodes plus attachment and candidate links.

    Sector ids are global: sector ``k`` of gNB ``g`` is ``g * 3 + k``.
    ``sector_start``/``sector_ues`` list the attached UEs of every sector.
    Backhaul links are directed ``link_tx -> link_rx`` (gNB indices).
    """

    scenario_type: str
    gnbs: NodeSet
    ues: NodeSet
    attach: np.ndarray
    ue_sector: np.ndarray
    sector_start: np.ndarray
    sector_ues: np.ndarray
    link_tx: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    link_rx: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    link_tx_sector: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    link_rx_sector: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    @property
    def n_sectors(self) -> int:
        return len(self.gnbs) * GNB_SECTORS

    @property
    def populated_sectors(self) -> np.ndarray:
        return np.flatnonzero(np.diff(self.sector_start) > 0)

    @property
    def unattached(self) -> np.ndarray:
        return np.flatnonzero(self.attach < 0)

    def digest(self) -> str:
        """SHA-256 over every array, stable across runs and platforms."""
        h = hashlib.sha256(self.scenario_type.encode())
        arrays = [self.gnbs.xy, self.gnbs.height, self.gnbs.sector_offset, self.ues.xy, self.ues.height,
                  self.attach, self.ue_sector, self.sector_start, self.sector_ues,
                  self.link_tx, self.link_rx, self.link_tx_sector, self.link_rx_sector]
        for a in arrays:
            a = np.ascontiguousarray(a)
            h.update(str(a.shape).encode())
            h.update(a.astype(a.dtype.newbyteorder("<")).tobytes())
        return h.hexdigest()


def _azimuth(frm, to):
    d = np.asarray(to) - np.asarray(frm)
    return np.mod(np.arctan2(d[..., 0], d[..., 1]), 2 * np.pi)


def attach_ues(gnbs: NodeSet, ues: NodeSet, buildings: BuildingSet, d_max: float = 200.0):
    """Attach every UE to the closest gNB within ``d_max`` that it sees in LoS.

    Returns ``(attach, ue_sector, sector_start, sector_ues)``; unattached UEs
    have ``-1`` in both per-UE arrays.
    """
    if not d_max > 0:
        raise ValueError("d_max must be positive")
    n_ue, n_g = len(ues), len(gnbs)
    attach = np.full(n_ue, -1, dtype=np.int64)
    ue_sector = np.full(n_ue, -1, dtype=np.int64)
    if n_ue and n_g:
        lists = cKDTree(gnbs.xy).query_ball_point(ues.xy, d_max)
        lens = np.fromiter((len(x) for x in lists), dtype=np.int64, count=n_ue)
        ui = np.repeat(np.arange(n_ue), lens)
        gi = np.fromiter((g for x in lists for g in x), dtype=np.int64, count=int(lens.sum()))
        if ui.size:
            dist = np.hypot(*(ues.xy[ui] - gnbs.xy[gi]).T)
            order = np.lexsort((gi, dist, ui))
            ui, gi = ui[order], gi[order]
            clear = ~buildings.segments_blocked(ues.positions[ui], gnbs.positions[gi])
            first_ue, first = np.unique(ui[clear], return_index=True)
            attach[first_ue] = gi[clear][first]
        ok = attach >= 0
        az = _azimuth(gnbs.xy[attach[ok]], ues.xy[ok])
        ue_sector[ok] = attach[ok] * GNB_SECTORS + gnbs.sector_of(attach[ok], az)
    n_sec = n_g * GNB_SECTORS
    ok = np.flatnonzero(ue_sector >= 0)
    order = ok[np.argsort(ue_sector[ok], kind="stable")]
    counts = np.bincount(ue_sector[ok], minlength=n_sec)
    sector_start = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    return attach, ue_sector, sector_start, order.astype(np.int64)


def los_pairs(gnbs: NodeSet, buildings: BuildingSet) -> np.ndarray:
    """All unordered gNB pairs ``(i, j)``, ``i < j``, with unobstructed LoS."""
    n = len(gnbs)
    if n < 2:
        return np.zeros((0, 2), dtype=np.int64)
    i, j = np.triu_indices(n, k=1)
    pos = gnbs.positions
    clear = ~buildings.segments_blocked(pos[i], pos[j])
    return np.column_stack([i[clear], j[clear]]).astype(np.int64)


def build_backhaul_links(gnbs: NodeSet, buildings: BuildingSet, rng: np.random.Generator):
    """Directed backhaul links: every LoS pair with a random flow direction.

    Returns ``(tx, rx, tx_sector, rx_sector)`` with global sector ids.
    """
    pairs = los_pairs(gnbs, buildings)
    flip = rng.random(len(pairs)) < 0.5
    tx = np.where(flip, pairs[:, 1], pairs[:, 0])
    rx = np.where(flip, pairs[:, 0], pairs[:, 1])
    tx_sec = tx * GNB_SECTORS + gnbs.sector_of(tx, _azimuth(gnbs.xy[tx], gnbs.xy[rx]))
    rx_sec = rx * GNB_SECTORS + gnbs.sector_of(rx, _azimuth(gnbs.xy[rx], gnbs.xy[tx]))
    return tx.astype(np.int64), rx.astype(np.int64), tx_sec.astype(np.int64), rx_sec.astype(np.int64)


def build_topology(scn: GeoScenario, scenario_type: str = URBAN, lambda_g: float | None = None,
                   seed: int = 0, d_max: float = 200.0, nodes_file=None,
                   placement: PlacementConfig = PlacementConfig()) -> Topology:
    """Place nodes (or read them from ``nodes_file``), attach UEs, build backhaul links."""
    if scenario_type not in (URBAN, BACKHAUL):
        raise ValueError(f"unknown scenario type {scenario_type!r}")
    if nodes_file is not None:
        given = load_nodes_csv(nodes_file)
        xy, h = given["gNB"]
        if len(h) and scn.buildings.contains_xy(xy[:, 0], xy[:, 1]).any():
            raise PlacementError(f"{nodes_file}: gNB inside a building footprint")
        rng = np.random.default_rng([seed, 1])
        gnbs = make_gnbs(xy, h, rng.uniform(0.0, 2 * np.pi / GNB_SECTORS, len(h)), scenario_type)
    elif lambda_g is None:
        raise ValueError("need either a gNB density or a node file")
    else:
        gnbs = place_gnbs(scn, lambda_g, seed, scenario_type, placement)
    if scenario_type == BACKHAUL:
        ues = make_ues(np.zeros((0, 2)), np.zeros(0), scenario_type)  # gNB-to-gNB traffic only
    elif nodes_file is not None and len(given["UE"][1]):
        ues = make_ues(*given["UE"], scenario_type)
    else:
        ues = place_ues(scn, len(gnbs), seed, avoid=gnbs.xy, cfg=placement)
    attach, ue_sector, start, items = attach_ues(gnbs, ues, scn.buildings, d_max)
    topo = Topology(scenario_type, gnbs, ues, attach, ue_sector, start, items)
    if scenario_type == BACKHAUL:
        rng = np.random.default_rng([seed, 3])
        topo.link_tx, topo.link_rx, topo.link_tx_sector, topo.link_rx_sector = build_backhaul_links(
            gnbs, scn.buildings, rng)
    return topo
