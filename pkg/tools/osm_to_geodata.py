"""Convert a lon/lat GeoJSON building export (e.g. from Overpass) to rfisim geodata.

Heights come from the ``height`` tag, else ``building:levels`` times
``--level-height``, else ``--default-height``. Coordinates are projected to
local east/north metres with an equirectangular map about the data centroid,
which is accurate to well under a metre over a few kilometres.

    python3 tools/osm_to_geodata.py buildings.geojson city.geojson
"""

from __future__ import annotations

import argparse
import json
import re

import numpy as np
import shapely
from shapely.geometry import mapping, shape
from shapely.ops import transform

from rfisim.units import EARTH_RADIUS


def _number(text):
    m = re.match(r"\s*([0-9]+(?:\.[0-9]+)?)", str(text))
    return float(m.group(1)) if m else None


def building_height(props, level_height, default):
    h = _number(props.get("height", ""))
    if h:
        return h
    levels = _number(props.get("building:levels", ""))
    return levels * level_height if levels else default


def convert(doc, level_height=3.0, default_height=10.0):
    polys, heights = [], []
    for feat in doc["features"]:
        props = feat.get("properties") or {}
        if "building" not in props and "height" not in props:
            continue
        geom = shape(feat["geometry"])
        if geom.geom_type not in ("Polygon", "MultiPolygon"):
            continue
        polys.append(geom)
        heights.append(building_height(props, level_height, default_height))
    if not polys:
        raise SystemExit("no building polygons found")
    lon0, lat0 = shapely.union_all(polys).centroid.coords[0]
    kx = np.deg2rad(1.0) * EARTH_RADIUS * np.cos(np.deg2rad(lat0))
    ky = np.deg2rad(1.0) * EARTH_RADIUS

    def to_local(x, y, z=None):
        return (np.asarray(x) - lon0) * kx, (np.asarray(y) - lat0) * ky

    feats = []
    for geom, h in zip(polys, heights):
        local = shapely.make_valid(transform(to_local, geom))
        local = shapely.union_all([g for g in getattr(local, "geoms", [local]) if g.geom_type == "Polygon"])
        if local.is_empty or local.area < 1.0:
            continue
        feats.append({"type": "Feature", "properties": {"kind": "building", "height": round(h, 2)},
                      "geometry": mapping(local)})
    return {"type": "FeatureCollection", "origin": [lat0, lon0], "features": feats}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("src")
    ap.add_argument("dst")
    ap.add_argument("--level-height", type=float, default=3.0, help="metres per storey")
    ap.add_argument("--default-height", type=float, default=10.0)
    args = ap.parse_args(argv)
    with open(args.src) as fh:
        doc = convert(json.load(fh), args.level_height, args.default_height)
    with open(args.dst, "w") as fh:
        json.dump(doc, fh, separators=(",", ":"))
    print(f"{len(doc['features'])} buildings -> {args.dst}")


if __name__ == "__main__":
    main()
