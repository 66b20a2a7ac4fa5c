# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled occlusion and link-activation kernels.

Same algorithms and array layout as ``_kernels_py``; see that module for the
building-index description.
"""

import numpy as np

from libc.math cimport floor, INFINITY


cdef inline double _orient(double ax, double ay, double bx, double by,
                           double cx, double cy) noexcept nogil:
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


cdef bint _prism_hit(double ax, double ay, double az, double bx, double by, double bz,
                     double height, Py_ssize_t e0, Py_ssize_t e1,
                     const double[:, ::1] edges) noexcept nogil:
    cdef double t0 = 0.0, t1 = 1.0, dz = bz - az, ta, tb, tmp
    cdef double dx, dy, px, py, qx, qy, x0, y0, x1, y1, xi, d1, d2, d3, d4
    cdef bint inside = False
    cdef Py_ssize_t e
    if dz == 0.0:
        if az < 0.0 or az > height:
            return False
    else:
        ta = -az / dz
        tb = (height - az) / dz
        if ta > tb:
            tmp = ta
            ta = tb
            tb = tmp
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
    for e in range(e0, e1):
        x0 = edges[e, 0]
        y0 = edges[e, 1]
        x1 = edges[e, 2]
        y1 = edges[e, 3]
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


cdef inline bint _clip(double p, double q, double lo, double hi,
                       double* s0, double* s1) noexcept nogil:
    cdef double d = q - p, a, b, tmp
    if d == 0.0:
        return not (p < lo or p > hi)
    a = (lo - p) / d
    b = (hi - p) / d
    if a > b:
        tmp = a
        a = b
        b = tmp
    if a > s0[0]:
        s0[0] = a
    if b < s1[0]:
        s1[0] = b
    return s0[0] <= s1[0]


cdef bint _segment_blocked(double ax, double ay, double az, double bx, double by, double bz,
                           double hmax, const double[::1] heights, const double[:, ::1] bbox,
                           const long long[::1] edge_start, const double[:, ::1] edges,
                           double gx0, double gy0, double cell, Py_ssize_t nx, Py_ssize_t ny,
                           const long long[::1] cell_start, const long long[::1] cell_items,
                           long long[::1] seen, long long stamp) noexcept nogil:
    cdef double t0 = 0.0, t1 = 1.0, s0 = 0.0, s1 = 1.0
    cdef double x0, y0, x1, y1, sx0, sy0, sx1, sy1, lox, hix, loy, hiy
    cdef double dx, dy, tmx, tmy, tdx, tdy
    cdef Py_ssize_t ix, iy, stepx, stepy, c, k, p
    if not _clip(az, bz, 0.0, hmax, &t0, &t1):
        return False
    x0 = ax + t0 * (bx - ax)
    y0 = ay + t0 * (by - ay)
    x1 = ax + t1 * (bx - ax)
    y1 = ay + t1 * (by - ay)
    if not _clip(x0, x1, gx0, gx0 + nx * cell, &s0, &s1):
        return False
    if not _clip(y0, y1, gy0, gy0 + ny * cell, &s0, &s1):
        return False
    sx0 = x0 + s0 * (x1 - x0)
    sy0 = y0 + s0 * (y1 - y0)
    sx1 = x0 + s1 * (x1 - x0)
    sy1 = y0 + s1 * (y1 - y0)
    lox = sx0 if sx0 < sx1 else sx1
    hix = sx1 if sx0 < sx1 else sx0
    loy = sy0 if sy0 < sy1 else sy1
    hiy = sy1 if sy0 < sy1 else sy0

    ix = <Py_ssize_t>floor((sx0 - gx0) / cell)
    iy = <Py_ssize_t>floor((sy0 - gy0) / cell)
    if ix < 0:
        ix = 0
    if ix > nx - 1:
        ix = nx - 1
    if iy < 0:
        iy = 0
    if iy > ny - 1:
        iy = ny - 1
    dx = sx1 - sx0
    dy = sy1 - sy0
    if dx > 0.0:
        stepx = 1
        tmx = (gx0 + (ix + 1) * cell - sx0) / dx
        tdx = cell / dx
    elif dx < 0.0:
        stepx = -1
        tmx = (gx0 + ix * cell - sx0) / dx
        tdx = -cell / dx
    else:
        stepx = 0
        tmx = INFINITY
        tdx = INFINITY
    if dy > 0.0:
        stepy = 1
        tmy = (gy0 + (iy + 1) * cell - sy0) / dy
        tdy = cell / dy
    elif dy < 0.0:
        stepy = -1
        tmy = (gy0 + iy * cell - sy0) / dy
        tdy = -cell / dy
    else:
        stepy = 0
        tmy = INFINITY
        tdy = INFINITY

    while True:
        c = iy * nx + ix
        for k in range(cell_start[c], cell_start[c + 1]):
            p = cell_items[k]
            if seen[p] == stamp:
                continue
            seen[p] = stamp
            if bbox[p, 2] < lox or bbox[p, 0] > hix or bbox[p, 3] < loy or bbox[p, 1] > hiy:
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


def segments_blocked(a, b, double hmax, heights, bbox, edge_start, edges, grid,
                     cell_start, cell_items):
    """Occlusion flag for each segment ``a[i] -> b[i]`` (arrays of shape (n, 3))."""
    cdef const double[:, ::1] A = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[:, ::1] B = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t n = A.shape[0], i
    out_arr = np.zeros(n, dtype=np.uint8)
    if len(heights) == 0:
        return out_arr
    cdef unsigned char[::1] out = out_arr
    cdef const double[::1] H = np.ascontiguousarray(heights, dtype=np.float64)
    cdef const double[:, ::1] BB = np.ascontiguousarray(bbox, dtype=np.float64)
    cdef const long long[::1] ES = np.ascontiguousarray(edge_start, dtype=np.int64)
    cdef const double[:, ::1] E = np.ascontiguousarray(edges, dtype=np.float64)
    cdef const long long[::1] CS = np.ascontiguousarray(cell_start, dtype=np.int64)
    cdef const long long[::1] CI = np.ascontiguousarray(cell_items, dtype=np.int64)
    cdef long long[::1] seen = np.zeros(H.shape[0], dtype=np.int64)
    cdef double gx0 = grid[0], gy0 = grid[1], cell = grid[2]
    cdef Py_ssize_t nx = int(grid[3]), ny = int(grid[4])
    with nogil:
        for i in range(n):
            if _segment_blocked(A[i, 0], A[i, 1], A[i, 2], B[i, 0], B[i, 1], B[i, 2],
                                hmax, H, BB, ES, E, gx0, gy0, cell, nx, ny, CS, CI,
                                seen, i + 1):
                out[i] = 1
    return out_arr


def prism_hits(a, b, heights, edge_start, edges):
    """Brute-force occlusion: test every prism, no spatial index."""
    cdef const double[:, ::1] A = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[:, ::1] B = np.ascontiguousarray(b, dtype=np.float64)
    cdef const double[::1] H = np.ascontiguousarray(heights, dtype=np.float64)
    cdef const long long[::1] ES = np.ascontiguousarray(edge_start, dtype=np.int64)
    cdef const double[:, ::1] E = np.ascontiguousarray(edges, dtype=np.float64)
    cdef Py_ssize_t n = A.shape[0], i, p
    out_arr = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[::1] out = out_arr
    with nogil:
        for i in range(n):
            for p in range(H.shape[0]):
                if _prism_hit(A[i, 0], A[i, 1], A[i, 2], B[i, 0], B[i, 1], B[i, 2],
                              H[p], ES[p], ES[p + 1], E):
                    out[i] = 1
                    break
    return out_arr


def activate_links(order, accept, tx_sector, rx_sector, Py_ssize_t n_sectors):
    """Greedy one-link-per-sector activation in ``order``."""
    cdef const long long[::1] O = np.ascontiguousarray(order, dtype=np.int64)
    cdef const unsigned char[::1] ACC = np.ascontiguousarray(accept, dtype=np.uint8)
    cdef const long long[::1] TS = np.ascontiguousarray(tx_sector, dtype=np.int64)
    cdef const long long[::1] RS = np.ascontiguousarray(rx_sector, dtype=np.int64)
    busy_arr = np.zeros(n_sectors, dtype=np.uint8)
    active_arr = np.zeros(ACC.shape[0], dtype=np.uint8)
    cdef unsigned char[::1] busy = busy_arr
    cdef unsigned char[::1] active = active_arr
    cdef Py_ssize_t k, l
    cdef long long ts, rs
    for k in range(O.shape[0]):
        l = O[k]
        if not ACC[l]:
            continue
        ts = TS[l]
        rs = RS[l]
        if busy[ts] or (rs >= 0 and busy[rs]):
            continue
        busy[ts] = 1
        if rs >= 0:
            busy[rs] = 1
        active[l] = 1
    return active_arr
