"""Exact incremental convex hull over rational points.

Inputs here are tiny (a mesh element plus its offset points), so the
quadratic incremental construction is the right tool: no perturbation, no
epsilons, degenerate point sets come back flagged with their true affine
dimension instead of being jittered into shape.
"""

from gmpy2 import mpq

from .rational import (
    Q0,
    RPlane,
    orient3d,
    point_in_triangle,
    point_on_segment,
    sign,
    vcross,
    vdot,
    vsub,
)


class ConvexPolyhedron:
    """Convex hull result.

    vertices : list of rational points (the extreme points only)
    facets   : outward-oriented index triples into `vertices` (dim 3);
               a fan of the hull polygon for dim 2; empty below that
    dim      : affine dimension of the input point set (0..3)
    """

    __slots__ = ("vertices", "facets", "dim", "_planes", "source")

    def __init__(self, vertices, facets, dim, source=None):
        self.vertices = vertices
        self.facets = facets
        self.dim = dim
        self.source = source
        self._planes = None

    @property
    def planes(self):
        """Outward facet planes (eval > 0 is outside). Only for dim 3."""
        if self._planes is None:
            if self.dim != 3:
                raise ValueError("facet planes undefined for degenerate hull")
            self._planes = [
                RPlane.from_points(*(self.vertices[i] for i in f))
                for f in self.facets
            ]
        return self._planes

    def facet_points(self, fi):
        f = self.facets[fi]
        return (self.vertices[f[0]], self.vertices[f[1]], self.vertices[f[2]])

    def locate(self, p):
        """Exact location of p: ('outside'|'boundary'|'inside', facet ids).

        The facet id list names the facets whose plane contains p; it is
        empty unless the point is on the boundary. dim 3 only.
        """
        touching = []
        for i, pl in enumerate(self.planes):
            s = pl.side(p)
            if s > 0:
                return "outside", []
            if s == 0:
                touching.append(i)
        if touching:
            return "boundary", touching
        return "inside", []

    def contains(self, p, strict=False):
        """Closed (or strict) containment, valid for every dimension."""
        if self.dim == 3:
            where, _ = self.locate(p)
            if strict:
                return where == "inside"
            return where != "outside"
        if strict:
            return False
        if self.dim == 0:
            return p == self.vertices[0]
        if self.dim == 1:
            return point_on_segment(p, self.vertices[0], self.vertices[1])
        # dim 2: coplanar and inside the convex polygon (fan of triangles)
        for f in self.facets:
            if point_in_triangle(p, *(self.vertices[i] for i in f)):
                return True
        return False

    def bbox(self):
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        zs = [v[2] for v in self.vertices]
        return (min(xs), min(ys), min(zs)), (max(xs), max(ys), max(zs))


def _dedup(points):
    seen = {}
    out = []
    for p in points:
        if p not in seen:
            seen[p] = len(out)
            out.append(p)
    return out


def _orient2d(o, a, b):
    return sign((a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]))


def _hull2d(pts2):
    """Andrew's monotone chain on exact 2D points; returns CCW ring indices."""
    order = sorted(range(len(pts2)), key=lambda i: pts2[i])
    lower = []
    for i in order:
        while len(lower) >= 2 and _orient2d(
            pts2[lower[-2]], pts2[lower[-1]], pts2[i]
        ) <= 0:
            lower.pop()
        lower.append(i)
    upper = []
    for i in reversed(order):
        while len(upper) >= 2 and _orient2d(
            pts2[upper[-2]], pts2[upper[-1]], pts2[i]
        ) <= 0:
            upper.pop()
        upper.append(i)
    return lower[:-1] + upper[:-1]


def _tetra_facets(i0, i1, i2, i3):
    return [(i0, i1, i2), (i0, i2, i3), (i0, i3, i1), (i1, i3, i2)]


def convex_hull(points, source=None):
    """Exact convex hull of rational points.

    Degenerate inputs (all points affinely dependent) return the true
    lower-dimensional hull with `dim` < 3 rather than raising.
    """
    pts = _dedup(points)
    if not pts:
        raise ValueError("convex hull of no points")
    if len(pts) == 1:
        return ConvexPolyhedron([pts[0]], [], 0, source)

    # affine basis search, in input order for determinism
    i1 = 1  # pts[1] != pts[0] after dedup
    i2 = None
    for k in range(1, len(pts)):
        if k == i1:
            continue
        if vcross(vsub(pts[i1], pts[0]), vsub(pts[k], pts[0])) != (Q0, Q0, Q0):
            i2 = k
            break
    if i2 is None:
        d = vsub(pts[i1], pts[0])
        params = [(vdot(vsub(p, pts[0]), d), j) for j, p in enumerate(pts)]
        lo = min(params)[1]
        hi = max(params)[1]
        return ConvexPolyhedron([pts[lo], pts[hi]], [], 1, source)

    i3 = None
    for k in range(1, len(pts)):
        if k in (i1, i2):
            continue
        if orient3d(pts[0], pts[i1], pts[i2], pts[k]) != 0:
            i3 = k
            break
    if i3 is None:
        n = vcross(vsub(pts[i1], pts[0]), vsub(pts[i2], pts[0]))
        axis = max(range(3), key=lambda ax: abs(n[ax]))
        keep = [ax for ax in range(3) if ax != axis]
        pts2 = [(p[keep[0]], p[keep[1]]) for p in pts]
        ring = _hull2d(pts2)
        verts = [pts[i] for i in ring]
        facets = [(0, i, i + 1) for i in range(1, len(verts) - 1)]
        return ConvexPolyhedron(verts, facets, 2, source)

    if orient3d(pts[0], pts[i1], pts[i2], pts[i3]) > 0:
        i1, i2 = i2, i1
    facets = _tetra_facets(0, i1, i2, i3)
    used = {0, i1, i2, i3}

    for k in range(1, len(pts)):
        if k in used:
            continue
        p = pts[k]
        visible = []
        hidden = []
        for f in facets:
            if orient3d(pts[f[0]], pts[f[1]], pts[f[2]], p) > 0:
                visible.append(f)
            else:
                hidden.append(f)
        if not visible:
            continue  # inside or on the current hull: not an extreme point
        hidden_edges = set()
        for f in hidden:
            hidden_edges.add((f[0], f[1]))
            hidden_edges.add((f[1], f[2]))
            hidden_edges.add((f[2], f[0]))
        new_facets = []
        for f in visible:
            for u, v in ((f[0], f[1]), (f[1], f[2]), (f[2], f[0])):
                if (v, u) in hidden_edges:
                    new_facets.append((u, v, k))
        facets = hidden + new_facets

    ref = sorted({i for f in facets for i in f})
    remap = {old: new for new, old in enumerate(ref)}
    verts = [pts[i] for i in ref]
    out_facets = [(remap[a], remap[b], remap[c]) for a, b, c in facets]
    return ConvexPolyhedron(verts, out_facets, 3, source)
