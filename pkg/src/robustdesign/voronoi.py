"""Planar convex polygon utilities: clipped Voronoi tiles and quadrature.

Tiles are built by repeated half-plane clipping of a bounding box, so
every tile is a convex polygon in counterclockwise order. Quadrature on
a polygon fans it into triangles from an interior apex; this also suits
radially structured integrands whose natural apex is a tile generator.
"""

from __future__ import annotations

import math

import numpy as np

from .quadrature import gl_nodes

_GEOM_TOL = 1e-12


class ConvexPolygon:
    """A convex polygon with counterclockwise vertices.

    Consecutive duplicate vertices are removed on construction; the
    vertex array is read-only afterwards.
    """

    def __init__(self, vertices):
        v = np.asarray(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise ValueError("vertices must form an (m, 2) array")
        scale = max(1.0, float(np.abs(v).max()))
        keep = [0]
        for i in range(1, v.shape[0]):
            if np.abs(v[i] - v[keep[-1]]).max() > _GEOM_TOL * scale:
                keep.append(i)
        if len(keep) > 1 and np.abs(v[keep[-1]] - v[keep[0]]).max() <= _GEOM_TOL * scale:
            keep.pop()
        v = v[keep]
        if v.shape[0] < 3:
            raise ValueError("a polygon needs at least 3 distinct vertices")
        e = np.roll(v, -1, axis=0) - v
        cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
        if np.any(cross < -1e-9 * scale**2):
            raise ValueError("vertices must be convex in counterclockwise order")
        self.vertices = v
        self.vertices.setflags(write=False)

    @property
    def m(self) -> int:
        return self.vertices.shape[0]

    @property
    def area(self) -> float:
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        return 0.5 * float(np.sum(v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]))

    @property
    def centroid(self) -> np.ndarray:
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        cross = v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]
        return (v + w).T @ cross / (6.0 * self.area)

    def contains(self, x, tol: float = 1e-9) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        v = self.vertices
        e = np.roll(v, -1, axis=0) - v
        d = pts[:, None, :] - v[None, :, :]
        cross = e[None, :, 0] * d[:, :, 1] - e[None, :, 1] * d[:, :, 0]
        return np.all(cross >= -tol, axis=1)


def box_polygon(bounds) -> ConvexPolygon:
    """The counterclockwise rectangle of a 2-d box.

    bounds may be a DesignSpace or an array [[xlo, xhi], [ylo, yhi]].
    """
    if hasattr(bounds, "lower"):
        (xlo, ylo), (xhi, yhi) = bounds.lower, bounds.upper
    else:
        (xlo, xhi), (ylo, yhi) = np.asarray(bounds, dtype=float)
    return ConvexPolygon([(xlo, ylo), (xhi, ylo), (xhi, yhi), (xlo, yhi)])


def clip_halfplane(poly: ConvexPolygon, normal, offset: float) -> ConvexPolygon | None:
    """Clip to the half-plane normal . x <= offset; None when empty."""
    a = np.asarray(normal, dtype=float)
    v = poly.vertices
    s = v @ a - offset
    scale = max(1.0, float(np.abs(s).max()))
    out = []
    for i in range(v.shape[0]):
        j = (i + 1) % v.shape[0]
        si, sj = s[i], s[j]
        if si <= _GEOM_TOL * scale:
            out.append(v[i])
        crosses = (si > _GEOM_TOL * scale) != (sj > _GEOM_TOL * scale)
        if crosses and abs(sj - si) > _GEOM_TOL * scale:
            t = si / (si - sj)
            out.append(v[i] + t * (v[j] - v[i]))
    if len(out) < 3:
        return None
    try:
        return ConvexPolygon(out)
    except ValueError:
        return None


def voronoi_tiles(generators, bounds) -> list[ConvexPolygon]:
    """Voronoi cells of the generators clipped to a bounding box."""
    t = np.asarray(generators, dtype=float)
    if t.ndim != 2 or t.shape[1] != 2 or t.shape[0] < 1:
        raise ValueError("generators must form an (m, 2) array")
    box = box_polygon(bounds)
    tiles = []
    for i in range(t.shape[0]):
        cell: ConvexPolygon | None = box
        for j in range(t.shape[0]):
            if j == i or cell is None:
                continue
            # points closer to t_i than to t_j: 2(t_j - t_i).x <= |t_j|^2 - |t_i|^2
            cell = clip_halfplane(cell, 2.0 * (t[j] - t[i]),
                                  float(t[j] @ t[j] - t[i] @ t[i]))
        if cell is None:
            raise ValueError(f"generator {i} has an empty cell inside the box")
        tiles.append(cell)
    return tiles


def contract_polygon(poly: ConvexPolygon, center, factor: float) -> ConvexPolygon:
    """Scale a polygon toward a point; areas scale by factor squared."""
    if not 0.0 < factor <= 1.0:
        raise ValueError("contraction factor must lie in (0, 1]")
    c = np.asarray(center, dtype=float)
    return ConvexPolygon(c + factor * (poly.vertices - c))


def covering_radius(points, center) -> float:
    """Radius of the smallest circle centered at a given point covering all."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    c = np.asarray(center, dtype=float)
    return float(np.sqrt(np.max(np.sum((pts - c) ** 2, axis=1))))


def _circumcircle(p, q, r):
    ax, ay = p
    bx, by = q
    cx, cy = r
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if abs(d) < 1e-14 * max(1.0, abs(ax) + abs(bx) + abs(cx)) ** 2:
        return None
    ux = ((ax**2 + ay**2) * (by - cy) + (bx**2 + by**2) * (cy - ay)
          + (cx**2 + cy**2) * (ay - by)) / d
    uy = ((ax**2 + ay**2) * (cx - bx) + (bx**2 + by**2) * (ax - cx)
          + (cx**2 + cy**2) * (bx - ax)) / d
    center = np.array([ux, uy])
    return center, float(np.linalg.norm(p - center))


def min_enclosing_circle(points) -> tuple[np.ndarray, float]:
    """Smallest circle containing all points, by direct enumeration.

    The optimum is determined by two or three of the points, so for the
    small vertex sets arising here a deterministic scan over pairs and
    triples is enough.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] == 0 or pts.shape[1] != 2:
        raise ValueError("points must form a nonempty (m, 2) array")
    if pts.shape[0] == 1:
        return pts[0].copy(), 0.0
    scale = max(1.0, float(np.abs(pts).max()))
    tol = 1e-9 * scale
    best: tuple[np.ndarray, float] | None = None

    def consider(center, radius):
        nonlocal best
        if best is not None and radius >= best[1]:
            return
        if np.max(np.linalg.norm(pts - center, axis=1)) <= radius + tol:
            best = (center, radius)

    m = pts.shape[0]
    for i in range(m):
        for j in range(i + 1, m):
            consider(0.5 * (pts[i] + pts[j]), 0.5 * float(np.linalg.norm(pts[i] - pts[j])))
    for i in range(m):
        for j in range(i + 1, m):
            for k in range(j + 1, m):
                circ = _circumcircle(pts[i], pts[j], pts[k])
                if circ is not None:
                    consider(*circ)
    assert best is not None
    return best[0], best[1]


def polygon_quad_nodes(poly: ConvexPolygon, order: int = 16, apex=None):
    """Quadrature nodes and weights integrating over a polygon.

    The polygon is fanned into triangles from the apex (default the
    centroid, must lie inside). Each triangle is mapped from the unit
    square by x = apex + s * ((1 - u) p + u q), whose Jacobian is
    2 * area * s, and both axes carry Gauss-Legendre nodes.
    """
    c = poly.centroid if apex is None else np.asarray(apex, dtype=float)
    if not bool(poly.contains(c)[0]):
        raise ValueError("quadrature apex must lie inside the polygon")
    s, ws = gl_nodes(order, 0.0, 1.0)
    u, wu = gl_nodes(order, 0.0, 1.0)
    v = poly.vertices - c
    pts, wts = [], []
    for i in range(poly.m):
        p, q = v[i], v[(i + 1) % poly.m]
        tri2 = abs(p[0] * q[1] - p[1] * q[0])
        if tri2 <= _GEOM_TOL:
            continue
        edge = (1.0 - u)[:, None] * p + u[:, None] * q  # (order, 2)
        pts.append((c + s[:, None, None] * edge[None, :, :]).reshape(-1, 2))
        wts.append(tri2 * ((ws * s)[:, None] * wu[None, :]).ravel())
    return np.concatenate(pts), np.concatenate(wts)


def polygon_integral(poly: ConvexPolygon, fn, order: int = 16, apex=None) -> float:
    """Integrate fn over a polygon; fn maps an (m, 2) array to m values."""
    pts, wts = polygon_quad_nodes(poly, order, apex)
    return float(wts @ np.asarray(fn(pts), dtype=float))


def polygon_radial_mass(poly: ConvexPolygon, center, radius: float, shape: float,
                        order: int = 32) -> float:
    """Integral over a polygon of the ball density C (1 - |x-c|/R)^(b-1).

    C normalizes the density over the full disc of radius R. The polygon
    must contain the center and lie inside the disc. Fanning from the
    center makes the radial integral along each ray closed form, leaving
    one Gauss-Legendre integral per edge.
    """
    c = np.asarray(center, dtype=float)
    if not bool(poly.contains(c)[0]):
        raise ValueError("the density center must lie inside the polygon")
    b = shape
    u, wu = gl_nodes(order, 0.0, 1.0)
    v = poly.vertices - c
    total = 0.0
    for i in range(poly.m):
        p, q = v[i], v[(i + 1) % poly.m]
        tri2 = abs(p[0] * q[1] - p[1] * q[0])  # twice the triangle area
        if tri2 <= _GEOM_TOL:
            continue
        edge = (1.0 - u)[:, None] * p + u[:, None] * q
        z = np.sqrt(np.sum(edge**2, axis=1)) / radius
        if np.any(z > 1.0 + 1e-9):
            raise ValueError("polygon is not contained in the disc")
        z = np.minimum(z, 1.0)
        # int_0^1 (1 - s z)^(b-1) s ds = [int_0^z w (1-w)^(b-1) dw] / z^2,
        # closed form; series below the cancellation threshold
        small = z < 1e-5
        zs = np.where(small, 1.0, z)
        inner = ((1.0 - (1.0 - zs) ** (b + 1.0)) / (b + 1.0)
                 - zs * (1.0 - zs) ** b) / (b * zs**2)
        series = 0.5 - (b - 1.0) * z / 3.0 + (b - 1.0) * (b - 2.0) * z**2 / 8.0
        inner = np.where(small, series, inner)
        total += tri2 * float(wu @ inner)
    # the density constant for k = 2: 1 / (2 pi R^2 B(2, b)) = b (b+1) / (2 pi R^2)
    return total * b * (b + 1.0) / (2.0 * math.pi * radius**2)
