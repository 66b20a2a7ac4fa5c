"""Pure-Python occlusion and link-activation kernels.

Line-for-line twin of ``_kernels.pyx``. Selected by :mod:`rfisim.kernels`
when the compiled extension is missing or ``RFISIM_PURE_PYTHON=1``.

Building index layout (shared with the compiled kernel)
-------------------------------------------------------
``heights[p]``            prism height (m)
``bbox[p] = (x0, y0, x1, y1)``
``edge_start[p]:edge_start[p+1]`` rows of ``edges`` (x0, y0, x1, y1), all rings
``grid = (gx0, gy0, cell, nx, ny)``; cell ``c = iy * nx + ix`` owns
``cell_items[cell_start[c]:cell_start[c+1]]``
"""

from __future__ import annotations

import math

import numpy as np


def _orient(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _prism_hit(ax, ay, az, bx, by, bz, height, e0, e1, edges):
    t0 = 0.0
    t1 = 1.0
    dz = bz - az
    if dz == 0.0:
        if az < 0.0 or az > height:
            return False
    else:
        ta = -az / dz
        tb = (height - az) / dz
        if ta > tb:
            ta, tb = tb, ta
        if ta > t0:
            t0 = ta
        if tb < t1:
            t1 = tb
        if t0 > t1:
            return False
    dx = bx - ax
    dy = by - ay
    px = ax + t0 * dx
    py = ay + t0 * dy
    qx = ax + t1 * dx
    qy = ay + t1 * dy
    inside = False
    for e in range(e0, e1):
        x0, y0, x1, y1 = edges[e]
        if (y0 > py) != (y1 > py):
            xi = x0 + (py - y0) * (x1 - x0) / (y1 - y0)
            if px < xi:
                inside = not inside
        d1 = _orient(x0, y0, x1, y1, px, py)
        d2 = _orient(x0, y0, x1, y1, qx, qy)
        if (d1 > 0.0 and d2 < 0.0) or (d1 < 0.0 and d2 > 0.0):
            d3 = _orient(px, py, qx, qy, x0, y0)
            d4 = _orient(px, py, qx, qy, x1, y1)
            if (d3 > 0.0 and d4 < 0.0) or (d3 < 0.0 and d4 > 0.0):
                return True
    return inside


def _clip(p, q, lo, hi, s0, s1):
    """Liang-Barsky step for one slab; returns (s0, s1) or None."""
    d = q - p
    if d == 0.0:
        if p < lo or p > hi:
            return None
        return s0, s1
    a = (lo - p) / d
    b = (hi - p) / d
    if a > b:
        a, b = b, a
    if a > s0:
        s0 = a
    if b < s1:
        s1 = b
    if s0 > s1:
        return None
    return s0, s1


def _segment_blocked(ax, ay, az, bx, by, bz, hmax, heights, bbox, edge_start, edges,
                     gx0, gy0, cell, nx, ny, cell_start, cell_items, seen, stamp):
    # part of the segment inside the building height band
    span = _clip(az, bz, 0.0, hmax, 0.0, 1.0)
    if span is None:
        return False
    t0, t1 = span
    x0 = ax + t0 * (bx - ax)
    y0 = ay + t0 * (by - ay)
    x1 = ax + t1 * (bx - ax)
    y1 = ay + t1 * (by - ay)
    # ... and inside the grid rectangle
    gx1 = gx0 + nx * cell
    gy1 = gy0 + ny * cell
    span = _clip(x0, x1, gx0, gx1, 0.0, 1.0)
    if span is None:
        return False
    span = _clip(y0, y1, gy0, gy1, span[0], span[1])
    if span is None:
        return False
    s0, s1 = span
    sx0 = x0 + s0 * (x1 - x0)
    sy0 = y0 + s0 * (y1 - y0)
    sx1 = x0 + s1 * (x1 - x0)
    sy1 = y0 + s1 * (y1 - y0)
    lox = min(sx0, sx1)
    hix = max(sx0, sx1)
    loy = min(sy0, sy1)
    hiy = max(sy0, sy1)

    ix = min(max(int(math.floor((sx0 - gx0) / cell)), 0), nx - 1)
    iy = min(max(int(math.floor((sy0 - gy0) / cell)), 0), ny - 1)
    dx = sx1 - sx0
    dy = sy1 - sy0
    inf = math.inf
    if dx > 0.0:
        stepx, tmx, tdx = 1, (gx0 + (ix + 1) * cell - sx0) / dx, cell / dx
    elif dx < 0.0:
        stepx, tmx, tdx = -1, (gx0 + ix * cell - sx0) / dx, -cell / dx
    else:
        stepx, tmx, tdx = 0, inf, inf
    if dy > 0.0:
        stepy, tmy, tdy = 1, (gy0 + (iy + 1) * cell - sy0) / dy, cell / dy
    elif dy < 0.0:
        stepy, tmy, tdy = -1, (gy0 + iy * cell - sy0) / dy, -cell / dy
    else:
        stepy, tmy, tdy = 0, inf, inf

    while True:
        c = iy * nx + ix
        for k in range(cell_start[c], cell_start[c + 1]):
            p = cell_items[k]
            if seen[p] == stamp:
                continue
            seen[p] = stamp
            b = bbox[p]
            if b[2] < lox or b[0] > hix or b[3] < loy or b[1] > hiy:
                continue
            if _prism_hit(ax, ay, az, bx, by, bz, heights[p],
                          edge_start[p], edge_start[p + 1], edges):
                return True
        if tmx > 1.0 and tmy > 1.0:
            return False
        if tmx < tmy:
            ix += stepx
            tmx += tdx
        else:
            iy += stepy
            tmy += tdy
        if ix < 0 or ix >= nx or iy < 0 or iy >= ny:
            return False


def segments_blocked(a, b, hmax, heights, bbox, edge_start, edges, grid, cell_start, cell_items):
    """Occlusion flag for each segment ``a[i] -> b[i]`` (arrays of shape (n, 3))."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n = a.shape[0]
    out = np.zeros(n, dtype=np.uint8)
    if len(heights) == 0:
        return out
    gx0, gy0, cell, nx, ny = grid
    nx = int(nx)
    ny = int(ny)
    heights_l = heights.tolist()
    bbox_l = bbox.tolist()
    edge_start_l = edge_start.tolist()
    edges_l = edges.tolist()
    cell_start_l = cell_start.tolist()
    cell_items_l = cell_items.tolist()
    seen = [0] * len(heights_l)
    al = a.tolist()
    bl = b.tolist()
    for i in range(n):
        ax, ay, az = al[i]
        bx, by, bz = bl[i]
        if _segment_blocked(ax, ay, az, bx, by, bz, hmax, heights_l, bbox_l, edge_start_l,
                            edges_l, gx0, gy0, cell, nx, ny, cell_start_l, cell_items_l,
                            seen, i + 1):
            out[i] = 1
    return out


def prism_hits(a, b, heights, edge_start, edges):
    """Brute-force occlusion: test every prism, no spatial index."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    out = np.zeros(a.shape[0], dtype=np.uint8)
    heights_l = heights.tolist()
    es = edge_start.tolist()
    edges_l = edges.tolist()
    for i in range(a.shape[0]):
        ax, ay, az = a[i]
        bx, by, bz = b[i]
        for p in range(len(heights_l)):
            if _prism_hit(ax, ay, az, bx, by, bz, heights_l[p], es[p], es[p + 1], edges_l):
                out[i] = 1
                break
    return out


def activate_links(order, accept, tx_sector, rx_sector, n_sectors):
    """Greedy one-link-per-sector activation in ``order``.

    A link ``l`` with ``accept[l]`` set becomes active if neither its
    transmitting sector nor its receiving sector (``-1`` = none) is busy.
    """
    busy = np.zeros(n_sectors, dtype=np.uint8)
    active = np.zeros(len(accept), dtype=np.uint8)
    for l in order.tolist():
        if not accept[l]:
            continue
        ts = tx_sector[l]
        rs = rx_sector[l]
        if busy[ts] or (rs >= 0 and busy[rs]):
            continue
        busy[ts] = 1
        if rs >= 0:
            busy[rs] = 1
        active[l] = 1
    return active
