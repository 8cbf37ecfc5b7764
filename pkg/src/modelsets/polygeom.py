"""Convex window geometry in the internal plane.

A Region is an empty set, a single point, or a convex polygon with CCW
vertices.  Erosion of one convex region by another is computed exactly by
shifting each half-plane of the eroded region inward by the support of the
structuring region; degenerate intersections collapse to a point or to the
empty region.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

COLLINEAR_TOL = 1e-12
COLLAPSE_AREA = 1e-18
POINT_FEAS_TOL = 1e-9
DEFAULT_EPS = 1e-9


class Region:
    """Empty | SinglePoint | convex CCW Polygon."""

    __slots__ = ("kind", "vertices")

    def __init__(self, kind, vertices):
        self.kind = kind
        self.vertices = vertices

    @classmethod
    def empty(cls):
        return cls("empty", np.zeros((0, 2)))

    @classmethod
    def single(cls, u):
        return cls("point", np.asarray(u, dtype=float).reshape(1, 2))

    @classmethod
    def polygon(cls, vertices):
        verts = np.asarray(vertices, dtype=float)
        if verts.ndim != 2 or verts.shape[1] != 2 or len(verts) < 3:
            raise ValueError("polygon needs at least 3 planar vertices")
        if _signed_area(verts) < 0:
            verts = verts[::-1]
        verts = _clean_vertices(verts)
        if len(verts) < 3:
            raise ValueError("polygon degenerates after removing duplicates")
        scale = max(1.0, np.abs(verts).max())
        for i in range(len(verts)):
            a = verts[i - 1]
            b = verts[i]
            c = verts[(i + 1) % len(verts)]
            if _cross(b - a, c - b) <= COLLINEAR_TOL * scale * scale:
                raise ValueError("polygon is not strictly convex")
        if _signed_area(verts) <= 0:
            raise ValueError("polygon has non-positive area")
        return cls("polygon", verts)

    @property
    def is_empty(self):
        return self.kind == "empty"

    @property
    def is_point(self):
        return self.kind == "point"

    @property
    def is_polygon(self):
        return self.kind == "polygon"

    @property
    def point(self):
        if not self.is_point:
            raise ValueError("not a single-point region")
        return self.vertices[0]

    def circumradius(self):
        """Largest distance from the origin to the region."""
        if self.is_empty:
            return 0.0
        return float(np.hypot(self.vertices[:, 0], self.vertices[:, 1]).max())

    def __repr__(self):
        if self.is_empty:
            return "Region.empty()"
        if self.is_point:
            return f"Region.single(({self.point[0]}, {self.point[1]}))"
        return f"Region.polygon(<{len(self.vertices)} vertices>)"


def _cross(u, v):
    return float(u[0] * v[1] - u[1] * v[0])


def _signed_area(verts):
    x = verts[:, 0]
    y = verts[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _clean_vertices(verts):
    """Merge near-duplicate vertices and drop collinear ones."""
    scale = max(1.0, np.abs(verts).max())
    out = []
    for v in verts:
        if not out or np.hypot(*(v - out[-1])) > 1e-12 * scale:
            out.append(v)
    if len(out) > 1 and np.hypot(*(out[0] - out[-1])) <= 1e-12 * scale:
        out.pop()
    verts = np.array(out)
    if len(verts) < 3:
        return verts
    keep = []
    for i in range(len(verts)):
        a = verts[i - 1]
        b = verts[i]
        c = verts[(i + 1) % len(verts)]
        if abs(_cross(c - a, b - a)) > COLLINEAR_TOL * scale * scale:
            keep.append(i)
    return verts[keep]


def _edge_normals(P):
    """Unit outward normals and offsets of a CCW polygon's edges."""
    verts = P.vertices
    t = np.roll(verts, -1, axis=0) - verts
    lengths = np.hypot(t[:, 0], t[:, 1])
    normals = np.column_stack([t[:, 1], -t[:, 0]]) / lengths[:, None]
    offsets = np.einsum("ij,ij->i", normals, verts)
    return normals, offsets


def support(P, n):
    """Support value max_{x in P} <x, n>."""
    if P.is_empty:
        raise ValueError("empty support")
    n = np.asarray(n, dtype=float).reshape(2)
    return float((P.vertices @ n).max())


def area(P):
    """Area of the region (0 for the degenerate variants)."""
    if not P.is_polygon:
        return 0.0
    return _signed_area(P.vertices)


def centroid(P):
    if P.is_point:
        return P.vertices[0].copy()
    if not P.is_polygon:
        raise ValueError("centroid of an empty region")
    v = P.vertices
    w = np.roll(v, -1, axis=0)
    cross = v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]
    return (v + w).T @ cross / (6.0 * _signed_area(v))


def translate(P, t):
    if P.is_empty:
        return Region.empty()
    t = np.asarray(t, dtype=float).reshape(2)
    if P.is_point:
        return Region.single(P.vertices[0] + t)
    return Region("polygon", P.vertices + t)


def linear_image(P, M):
    """Image of the region under a 2x2 matrix, re-oriented CCW."""
    M = np.asarray(M, dtype=float)
    if P.is_empty:
        return Region.empty()
    if P.is_point:
        return Region.single(M @ P.vertices[0])
    if abs(np.linalg.det(M)) < 1e-15:
        raise ValueError("singular matrix in linear_image")
    return Region.polygon(P.vertices @ M.T)


def contains(P, u, eps=DEFAULT_EPS):
    """Membership with signed half-plane distance tolerance eps.

    eps >= 0 accepts points within eps of the closed region; a negative
    eps demands points strictly inside by |eps| (open-window convention).
    """
    return bool(contains_many(P, np.asarray(u, dtype=float).reshape(1, 2), eps)[0])


def contains_many(P, pts, eps=DEFAULT_EPS):
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    if P.is_empty:
        return np.zeros(len(pts), dtype=bool)
    if P.is_point:
        d = np.hypot(pts[:, 0] - P.point[0], pts[:, 1] - P.point[1])
        return d <= eps
    normals, offsets = _edge_normals(P)
    dist = pts @ normals.T - offsets
    return dist.max(axis=1) <= eps


def _clip_halfplane(verts, n, c):
    """Sutherland-Hodgman clip of a polygon with the half-plane <u,n> <= c."""
    if len(verts) == 0:
        return verts
    d = verts @ n - c
    out = []
    k = len(verts)
    for i in range(k):
        j = (i + 1) % k
        if d[i] <= 0:
            out.append(verts[i])
        if (d[i] <= 0) != (d[j] <= 0):
            t = d[i] / (d[i] - d[j])
            out.append(verts[i] + t * (verts[j] - verts[i]))
    return np.array(out) if out else np.zeros((0, 2))


def _clip_all(normals, offsets, radius):
    verts = np.array([[-radius, -radius], [radius, -radius],
                      [radius, radius], [-radius, radius]])
    for n, c in zip(normals, offsets):
        verts = _clip_halfplane(verts, n, c)
        if len(verts) == 0:
            break
    return verts


def _degenerate_region(normals, offsets, radius):
    """Classify an (almost) measure-zero half-plane intersection.

    A point survives if the system is feasible within POINT_FEAS_TOL; the
    candidate is refined by least squares on the active constraints so an
    exact singleton is recovered to machine precision.
    """
    inflated = _clip_all(normals, offsets + 1e-6, radius)
    if len(inflated) == 0:
        return Region.empty()
    u0 = inflated.mean(axis=0)
    active = normals @ u0 - offsets >= -3e-6
    if active.sum() < 2:
        active[:] = True
    ustar, *_ = np.linalg.lstsq(normals[active], offsets[active], rcond=None)
    if (normals @ ustar - offsets).max() <= POINT_FEAS_TOL:
        ustar[np.abs(ustar) < 1e-12] = 0.0
        return Region.single(ustar)
    return Region.empty()


def erode(C, K):
    """Erosion {u : K + u is contained in C} of convex regions.

    Computed by shifting every half-plane of C inward by the support of K
    along its outward normal; exact for convex C and K.  The result may be
    a polygon, a single point, or empty.
    """
    if C.is_empty or K.is_empty:
        raise ValueError("erode requires non-empty regions")
    if K.is_point:
        return translate(C, -K.point)
    if C.is_point:
        return Region.empty()
    normals, offsets = _edge_normals(C)
    shifted = offsets - np.array([support(K, n) for n in normals])
    radius = C.circumradius() + K.circumradius() + 1.0
    verts = _clip_all(normals, shifted, radius)
    if len(verts) >= 3 and _signed_area(verts) >= COLLAPSE_AREA:
        try:
            return Region.polygon(verts)
        except ValueError:
            pass
    return _degenerate_region(normals, shifted, radius)


@dataclass(frozen=True)
class GridSpec:
    """Uniform cell grid; cell (ix, iy) covers origin + [ix, ix+1) x [iy, iy+1) * h."""

    origin: tuple
    h: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("grid cell size must be positive")
        if self.nx <= 0 or self.ny <= 0:
            raise ValueError("grid must have positive cell counts")

    def x_centers(self):
        return self.origin[0] + (np.arange(self.nx) + 0.5) * self.h

    def y_centers(self):
        return self.origin[1] + (np.arange(self.ny) + 0.5) * self.h

    def box(self):
        return (self.origin[0], self.origin[1],
                self.origin[0] + self.nx * self.h,
                self.origin[1] + self.ny * self.h)

    def covers(self, P, margin=0.0):
        if P.is_empty:
            return True
        x0, y0, x1, y1 = self.box()
        v = P.vertices
        return (v[:, 0].min() >= x0 + margin and v[:, 0].max() <= x1 - margin
                and v[:, 1].min() >= y0 + margin and v[:, 1].max() <= y1 - margin)


def rasterize(P, grid, supersample=4):
    """Per-cell coverage fractions of a polygon on a grid.

    Each cell is probed at supersample^2 stratified midpoints; the result is
    the inside fraction in [0, 1], zero outside the polygon's bounding box.
    """
    if not P.is_polygon:
        raise ValueError("measure-zero window: rasterization forbidden")
    if not grid.covers(P):
        raise ValueError("grid box must contain the rasterized window")
    if supersample < 1:
        raise ValueError("supersample must be >= 1")
    out = np.zeros((grid.ny, grid.nx))
    v = P.vertices
    h = grid.h
    ix0 = max(0, int(np.floor((v[:, 0].min() - grid.origin[0]) / h)) - 1)
    ix1 = min(grid.nx, int(np.ceil((v[:, 0].max() - grid.origin[0]) / h)) + 1)
    iy0 = max(0, int(np.floor((v[:, 1].min() - grid.origin[1]) / h)) - 1)
    iy1 = min(grid.ny, int(np.ceil((v[:, 1].max() - grid.origin[1]) / h)) + 1)
    if ix0 >= ix1 or iy0 >= iy1:
        return out
    xs = grid.origin[0] + (np.arange(ix0, ix1)) * h
    ys = grid.origin[1] + (np.arange(iy0, iy1)) * h
    X, Y = np.meshgrid(xs, ys)
    count = np.zeros_like(X)
    normals, offsets = _edge_normals(P)
    for a in range(supersample):
        for b in range(supersample):
            px = (X + (a + 0.5) / supersample * h).ravel()
            py = (Y + (b + 0.5) / supersample * h).ravel()
            dist = np.outer(px, normals[:, 0]) + np.outer(py, normals[:, 1]) - offsets
            inside = dist.max(axis=1) <= 0.0
            count += inside.reshape(X.shape)
    out[iy0:iy1, ix0:ix1] = count / supersample**2
    return out
