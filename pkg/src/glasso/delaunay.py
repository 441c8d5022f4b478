"""Bowyer-Watson Delaunay triangulation of planar points.

Points are inserted one at a time inside a super-triangle. For each insertion
the triangles whose circumcircle contains the new point are removed and the
boundary of the resulting cavity is re-triangulated to the point. The
in-circle test is vectorized over the live triangles.
"""
from __future__ import annotations

import numpy as np

__all__ = ["delaunay_triangles", "delaunay_edges", "in_circumcircle"]

_IN_CIRCLE_TOL = 1e-12


def _orient(p, q, r) -> float:
    return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])


def in_circumcircle(a, b, c, d, tol: float = _IN_CIRCLE_TOL) -> bool:
    """True if ``d`` lies strictly inside the circumcircle of triangle abc.

    Orientation-independent 3x3 determinant test.
    """
    m = np.array(
        [
            [a[0] - d[0], a[1] - d[1], (a[0] - d[0]) ** 2 + (a[1] - d[1]) ** 2],
            [b[0] - d[0], b[1] - d[1], (b[0] - d[0]) ** 2 + (b[1] - d[1]) ** 2],
            [c[0] - d[0], c[1] - d[1], (c[0] - d[0]) ** 2 + (c[1] - d[1]) ** 2],
        ]
    )
    det = float(np.linalg.det(m))
    if _orient(a, b, c) < 0:
        det = -det
    return det > tol


def delaunay_triangles(points) -> np.ndarray:
    """Triangulate ``points`` (shape (n, 2)); returns (T, 3) CCW vertex indices.

    The super-triangle encloses a box ten times the size of the bounding box of
    the input. Exact duplicate points raise ``ValueError``.
    """
    pts = np.asarray(points, dtype=np.float64)
    n = len(pts)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"expected (n, 2) points, got shape {pts.shape}")
    if n < 3:
        return np.zeros((0, 3), dtype=np.int64)
    if len(np.unique(pts, axis=0)) != n:
        raise ValueError("duplicate points")

    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = max(float(np.max(hi - lo)), 1.0)
    mid = 0.5 * (lo + hi)
    big = 10.0 * span
    super_pts = np.array(
        [
            [mid[0] - 2 * big, mid[1] - big],
            [mid[0] + 2 * big, mid[1] - big],
            [mid[0], mid[1] + 2 * big],
        ]
    )
    verts = np.vstack([pts, super_pts])

    cap = 2 * (n + 3) + 8
    tris = np.zeros((cap, 3), dtype=np.int64)
    # circumcircle centre (x, y) and squared radius per triangle slot
    circ = np.zeros((cap, 3))
    alive = np.zeros(cap, dtype=bool)
    count = 0

    def add(i, j, k):
        nonlocal count, tris, circ, alive
        if _orient(verts[i], verts[j], verts[k]) < 0:
            j, k = k, j
        if count == len(tris):
            tris = np.vstack([tris, np.zeros_like(tris)])
            circ = np.vstack([circ, np.zeros_like(circ)])
            alive = np.concatenate([alive, np.zeros_like(alive)])
        ax, ay = verts[i]
        bx, by = verts[j]
        cx, cy = verts[k]
        d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
        a2, b2, c2 = ax * ax + ay * ay, bx * bx + by * by, cx * cx + cy * cy
        ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d
        uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d
        tris[count] = (i, j, k)
        circ[count] = (ux, uy, (ax - ux) ** 2 + (ay - uy) ** 2)
        alive[count] = True
        count += 1

    add(n, n + 1, n + 2)
    for p in range(n):
        x, y = verts[p]
        live = np.flatnonzero(alive[:count])
        cc = circ[live]
        # cheap prefilter on the circumcircle, then the exact determinant test
        near = (cc[:, 0] - x) ** 2 + (cc[:, 1] - y) ** 2 <= cc[:, 2] * (1 + 1e-9) + 1e-12
        bad = [
            t
            for t in live[near]
            if in_circumcircle(*verts[tris[t]], verts[p])
        ]
        if not bad:
            # p is on a circumcircle within tolerance; fall back to the
            # triangle containing it so insertion still proceeds.
            bad = [t for t in live if _contains(verts[tris[t]], verts[p])][:1]
        edges: dict[tuple[int, int], int] = {}
        for t in bad:
            i, j, k = tris[t]
            for e in ((i, j), (j, k), (k, i)):
                key = (min(e), max(e))
                edges[key] = edges.get(key, 0) + 1
            alive[t] = False
        for (i, j), times in edges.items():
            if times == 1:
                add(i, j, p)

    out = tris[:count][alive[:count]]
    keep = np.all(out < n, axis=1)
    return out[keep]


def _contains(tri, p) -> bool:
    a, b, c = tri
    return _orient(a, b, p) >= 0 and _orient(b, c, p) >= 0 and _orient(c, a, p) >= 0


def delaunay_edges(points) -> set[tuple[int, int]]:
    """Undirected edge set ``{(i, j): i < j}`` of the Delaunay triangulation."""
    edges = set()
    for i, j, k in delaunay_triangles(points):
        for u, v in ((i, j), (j, k), (k, i)):
            edges.add((int(min(u, v)), int(max(u, v))))
    return edges
