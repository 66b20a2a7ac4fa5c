"""Extruded building prisms with a uniform-grid index for occlusion queries."""

from __future__ import annotations

import math

import numpy as np
import shapely
from shapely.geometry import MultiPolygon, Polygon

from . import kernels
from .errors import GeodataError

_REGISTER_EPS = 1e-6  # m; inflates footprints when binning into grid cells


def _polygons(geom):
    if isinstance(geom, Polygon):
        return [geom]
    if isinstance(geom, MultiPolygon):
        return list(geom.geoms)
    raise GeodataError(f"expected a polygon footprint, got {geom.geom_type}")


class BuildingSet:
    """Flat-roofed prisms standing on the z = 0 ground plane.

    Parameters
    ----------
    footprints : sequence of shapely polygons (holes allowed)
    heights : sequence of float, metres, one per footprint
    cell_size : float, optional
        Grid cell edge in metres. Defaults to roughly one footprint per cell.

    Read-only after construction, so one instance can be shared by any
    number of concurrent readers.
    """

    def __init__(self, footprints=(), heights=(), cell_size: float | None = None):
        polys: list[Polygon] = []
        hs: list[float] = []
        footprints = list(footprints)
        heights = list(heights)
        if len(footprints) != len(heights):
            raise GeodataError("one height per footprint required")
        for i, (geom, h) in enumerate(zip(footprints, heights)):
            if h is None or not np.isfinite(h) or h <= 0:
                raise GeodataError(f"building {i}: height must be a positive number, got {h!r}")
            for poly in _polygons(geom):
                if poly.is_empty or not poly.is_valid or poly.area <= 0:
                    raise GeodataError(f"building {i}: footprint is not a simple polygon")
                polys.append(poly)
                hs.append(float(h))
        self.footprints = polys
        self.heights = np.asarray(hs, dtype=np.float64)
        self.hmax = float(self.heights.max()) if hs else 0.0
        self._build_arrays()
        self._build_grid(cell_size)
        self._union = None

    @classmethod
    def from_boxes(cls, boxes, heights, cell_size=None):
        """Axis-aligned boxes given as ``(x0, y0, x1, y1)``."""
        return cls([shapely.box(*b) for b in boxes], heights, cell_size)

    def __len__(self):
        return len(self.footprints)

    @property
    def prisms(self):
        return list(zip(self.footprints, self.heights.tolist()))

    def _build_arrays(self):
        edges = []
        starts = [0]
        bbox = []
        for poly in self.footprints:
            rings = [poly.exterior, *poly.interiors]
            for ring in rings:
                xy = np.asarray(ring.coords, dtype=np.float64)
                seg = np.hstack([xy[:-1], xy[1:]])
                edges.append(seg)
            starts.append(starts[-1] + sum(len(r.coords) - 1 for r in rings))
            bbox.append(poly.bounds)
        self.edges = np.ascontiguousarray(np.vstack(edges)) if edges else np.zeros((0, 4))
        self.edge_start = np.asarray(starts, dtype=np.int64)
        self.bbox = np.asarray(bbox, dtype=np.float64).reshape(-1, 4)

    def _build_grid(self, cell_size):
        if len(self) == 0:
            self.grid = (0.0, 0.0, 1.0, 1, 1)
            self.cell_start = np.zeros(2, dtype=np.int64)
            self.cell_items = np.zeros(0, dtype=np.int64)
            return
        x0, y0 = self.bbox[:, 0].min(), self.bbox[:, 1].min()
        x1, y1 = self.bbox[:, 2].max(), self.bbox[:, 3].max()
        if cell_size is None:
            cell_size = math.sqrt(max((x1 - x0) * (y1 - y0), 1.0) / len(self))
            cell_size = min(max(cell_size, 5.0), 250.0)
        gx0, gy0 = x0 - 1.0, y0 - 1.0
        nx = int(math.ceil((x1 + 1.0 - gx0) / cell_size))
        ny = int(math.ceil((y1 + 1.0 - gy0) / cell_size))
        lo_x = np.clip(np.floor((self.bbox[:, 0] - _REGISTER_EPS - gx0) / cell_size), 0, nx - 1).astype(int)
        hi_x = np.clip(np.floor((self.bbox[:, 2] + _REGISTER_EPS - gx0) / cell_size), 0, nx - 1).astype(int)
        lo_y = np.clip(np.floor((self.bbox[:, 1] - _REGISTER_EPS - gy0) / cell_size), 0, ny - 1).astype(int)
        hi_y = np.clip(np.floor((self.bbox[:, 3] + _REGISTER_EPS - gy0) / cell_size), 0, ny - 1).astype(int)
        cells, items = [], []
        for p in range(len(self)):
            ix, iy = np.meshgrid(np.arange(lo_x[p], hi_x[p] + 1), np.arange(lo_y[p], hi_y[p] + 1))
            c = (iy * nx + ix).ravel()
            cells.append(c)
            items.append(np.full(c.size, p))
        cells = np.concatenate(cells)
        items = np.concatenate(items)
        order = np.argsort(cells, kind="stable")
        counts = np.bincount(cells, minlength=nx * ny)
        self.grid = (float(gx0), float(gy0), float(cell_size), nx, ny)
        self.cell_start = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        self.cell_items = items[order].astype(np.int64)

    def segments_blocked(self, a, b, backend=None) -> np.ndarray:
        """True where the open segment ``a[i] -> b[i]`` passes through a prism.

        ``a`` and ``b`` are ``(n, 3)`` arrays in the local frame (or single
        points). ``backend`` picks a module from :func:`rfisim.kernels.backends`
        by name; default is the import-time selection.
        """
        a = np.atleast_2d(np.asarray(a, dtype=np.float64))
        b = np.atleast_2d(np.asarray(b, dtype=np.float64))
        a, b = np.broadcast_arrays(a, b)
        impl = kernels if backend is None else kernels.backends()[backend]
        out = impl.segments_blocked(
            np.ascontiguousarray(a), np.ascontiguousarray(b), self.hmax, self.heights, self.bbox,
            self.edge_start, self.edges, self.grid, self.cell_start, self.cell_items,
        )
        return out.astype(bool)

    def segment_blocked(self, a, b) -> bool:
        return bool(self.segments_blocked(a, b)[0])

    def brute_force_blocked(self, a, b, backend=None) -> np.ndarray:
        """Same answer as :meth:`segments_blocked`, testing every prism."""
        a = np.atleast_2d(np.asarray(a, dtype=np.float64))
        b = np.atleast_2d(np.asarray(b, dtype=np.float64))
        a, b = np.broadcast_arrays(a, b)
        impl = kernels if backend is None else kernels.backends()[backend]
        return impl.prism_hits(np.ascontiguousarray(a), np.ascontiguousarray(b), self.heights,
                               self.edge_start, self.edges).astype(bool)

    @property
    def union(self):
        """Union of all footprints (shapely geometry), computed once."""
        if self._union is None:
            self._union = shapely.union_all(self.footprints) if self.footprints else Polygon()
        return self._union

    def contains_xy(self, x, y) -> np.ndarray:
        """True where the ground point lies strictly inside some footprint."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if len(self) == 0:
            return np.zeros(np.broadcast(x, y).shape, dtype=bool)
        return shapely.contains_xy(self.union, x, y)
