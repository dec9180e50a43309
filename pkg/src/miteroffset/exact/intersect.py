"""Exact triangle-triangle and ray-triangle intersection.

Everything here returns exact rational geometry. Intersection results carry
a contact tag so callers can tell a genuine crossing from two triangles that
merely share a vertex or an edge.
"""

from gmpy2 import mpq

from .rational import (
    Q0,
    RPlane,
    point_in_triangle,
    sign,
    vcross,
    vdot,
    vlerp,
    vnorm2,
    vsub,
)


class IntersectionError(Exception):
    pass


class TriTriResult:
    """kind: 'none' | 'point' | 'segment' | 'polygon'.

    points  : the intersection set (1, 2, or a convex ring of points)
    coplanar: True when the triangles lie in one plane
    contact : 'shared_vertex' | 'shared_edge' | None
    """

    __slots__ = ("kind", "points", "coplanar", "contact")

    def __init__(self, kind, points=(), coplanar=False, contact=None):
        self.kind = kind
        self.points = list(points)
        self.coplanar = coplanar
        self.contact = contact

    def __repr__(self):
        return f"TriTriResult({self.kind}, {len(self.points)} pts)"


def _tri_plane_section(tri, plane, sides):
    """Points where a triangle meets a plane it straddles or touches."""
    pts = []
    for i in range(3):
        if sides[i] == 0:
            pts.append(tri[i])
    for i, j in ((0, 1), (1, 2), (2, 0)):
        if sides[i] * sides[j] < 0:
            hi = plane.eval(tri[i])
            hj = plane.eval(tri[j])
            t = hi / (hi - hj)
            pts.append(vlerp(tri[i], tri[j], t))
    out = []
    for p in pts:
        if p not in out:
            out.append(p)
    return out


def _clip_convex_by_triangle(poly, tri, n):
    """Sutherland-Hodgman clip of a convex 3D polygon by a coplanar triangle.

    n is the triangle's (rational) normal; inside of each edge is the side
    the opposite vertex lies on. Closed clip: boundary points are kept.
    """
    for e0, e1 in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
        if not poly:
            return []
        m = vcross(vsub(e1, e0), n)  # points away from the triangle interior
        hs = [vdot(m, vsub(p, e0)) for p in poly]
        out = []
        k = len(poly)
        for i in range(k):
            j = (i + 1) % k
            hi, hj = hs[i], hs[j]
            if hi <= 0:
                out.append(poly[i])
                if hj > 0 and hi < 0:
                    out.append(vlerp(poly[i], poly[j], hi / (hi - hj)))
            elif hj < 0:
                out.append(vlerp(poly[i], poly[j], hi / (hi - hj)))
        dedup = []
        for p in out:
            if not dedup or p != dedup[-1]:
                dedup.append(p)
        if len(dedup) > 1 and dedup[0] == dedup[-1]:
            dedup.pop()
        poly = dedup
    return poly


def _farthest_pair(points):
    best = (points[0], points[0])
    best_d = Q0
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            d = vnorm2(vsub(points[i], points[j]))
            if d > best_d:
                best_d = d
                best = (points[i], points[j])
    return best, best_d


def _classify_contact(result, t1, t2):
    if result.kind == "point":
        p = result.points[0]
        if p in t1 and p in t2:
            result.contact = "shared_vertex"
    elif result.kind == "segment":
        ends = {result.points[0], result.points[1]}
        edges1 = [{t1[0], t1[1]}, {t1[1], t1[2]}, {t1[2], t1[0]}]
        edges2 = [{t2[0], t2[1]}, {t2[1], t2[2]}, {t2[2], t2[0]}]
        if ends in edges1 and ends in edges2:
            result.contact = "shared_edge"
    return result


def tri_tri_intersection(t1, t2):
    """Exact intersection of two non-degenerate rational triangles.

    Returns a TriTriResult; coplanar overlaps come back as the convex
    intersection polygon.
    """
    p1 = RPlane.from_points(*t1)
    p2 = RPlane.from_points(*t2)
    sides1 = [p2.side(v) for v in t1]
    if all(s > 0 for s in sides1) or all(s < 0 for s in sides1):
        return TriTriResult("none")
    if sides1 == [0, 0, 0]:
        poly = _clip_convex_by_triangle(list(t1), t2, p2.normal)
        uniq = []
        for p in poly:
            if p not in uniq:
                uniq.append(p)
        if not uniq:
            return TriTriResult("none", coplanar=True)
        if len(uniq) == 1:
            r = TriTriResult("point", uniq, coplanar=True)
        elif len(uniq) == 2:
            r = TriTriResult("segment", uniq, coplanar=True)
        else:
            area = (Q0, Q0, Q0)
            for i in range(1, len(uniq) - 1):
                v = vcross(vsub(uniq[i], uniq[0]), vsub(uniq[i + 1], uniq[0]))
                area = (area[0] + v[0], area[1] + v[1], area[2] + v[2])
            if area == (Q0, Q0, Q0):
                (a, b), d = _farthest_pair(uniq)
                r = TriTriResult(
                    "segment" if d > 0 else "point",
                    [a, b] if d > 0 else [a],
                    coplanar=True,
                )
            else:
                r = TriTriResult("polygon", uniq, coplanar=True)
        return _classify_contact(r, t1, t2)

    sides2 = [p1.side(v) for v in t2]
    if all(s > 0 for s in sides2) or all(s < 0 for s in sides2):
        return TriTriResult("none")

    sec1 = _tri_plane_section(t1, p2, sides1)
    sec2 = _tri_plane_section(t2, p1, sides2)
    if not sec1 or not sec2:
        return TriTriResult("none")

    d = vcross(p1.normal, p2.normal)
    ax = max(range(3), key=lambda i: abs(d[i]))

    def param(p):
        return p[ax] if d[ax] > 0 else -p[ax]

    i1 = sorted(((param(p), p) for p in sec1), key=lambda x: x[0])
    i2 = sorted(((param(p), p) for p in sec2), key=lambda x: x[0])
    lo = max(i1[0], i2[0], key=lambda x: x[0])
    hi = min(i1[-1], i2[-1], key=lambda x: x[0])
    if lo[0] > hi[0]:
        return TriTriResult("none")
    if lo[0] == hi[0]:
        return _classify_contact(TriTriResult("point", [lo[1]]), t1, t2)
    return _classify_contact(TriTriResult("segment", [lo[1], hi[1]]), t1, t2)


def coplanar_segments_intersect(a, b, c, d, n):
    """Closed intersection test for coplanar segments [a,b], [c,d]; n is the
    plane normal used to orient 2D turns."""

    def orient(p, q, r):
        return sign(vdot(vcross(vsub(q, p), vsub(r, p)), n))

    o1 = orient(a, b, c)
    o2 = orient(a, b, d)
    o3 = orient(c, d, a)
    o4 = orient(c, d, b)
    if o1 != o2 and o3 != o4 and 0 not in (o1, o2, o3, o4):
        return True

    def on(p, u, v):
        if orient(u, v, p) != 0:
            return False
        t = vdot(vsub(p, u), vsub(v, u))
        return 0 <= t <= vnorm2(vsub(v, u))

    return on(c, a, b) or on(d, a, b) or on(a, c, d) or on(b, c, d)


def segment_triangle_intersect(a, b, tri):
    """True when the closed segment [a, b] meets the closed triangle. Exact."""
    try:
        pl = RPlane.from_points(*tri)
    except ValueError:
        return False
    ha = pl.eval(a)
    hb = pl.eval(b)
    if (ha > 0 and hb > 0) or (ha < 0 and hb < 0):
        return False
    if ha == 0 and hb == 0:
        if point_in_triangle(a, *tri) or point_in_triangle(b, *tri):
            return True
        n = pl.normal
        for u, v in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            if coplanar_segments_intersect(a, b, u, v, n):
                return True
        return False
    if ha == 0:
        return point_in_triangle(a, *tri)
    if hb == 0:
        return point_in_triangle(b, *tri)
    p = vlerp(a, b, ha / (ha - hb))
    return point_in_triangle(p, *tri)


def ray_triangle(origin, direction, tri):
    """Exact ray-triangle intersection.

    Returns (status, t): status 'none', 'clean', or 'degenerate'; a clean hit
    is a strictly interior crossing at t > 0. Touching an edge or a vertex, a
    hit at t == 0, or a coplanar ray are all 'degenerate'.
    """
    e1 = vsub(tri[1], tri[0])
    e2 = vsub(tri[2], tri[0])
    pvec = vcross(direction, e2)
    det = vdot(e1, pvec)
    if det == 0:
        n = vcross(e1, e2)
        if vdot(n, vsub(origin, tri[0])) != 0:
            return "none", None
        # coplanar ray: degenerate whenever the forward ray touches the
        # triangle (conservative; the caller re-shoots)
        if point_in_triangle(origin, *tri):
            return "degenerate", Q0
        for u, v in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            w0 = vdot(vcross(direction, vsub(u, origin)), n)
            w1 = vdot(vcross(direction, vsub(v, origin)), n)
            if w0 == 0 and w1 == 0:
                # edge collinear with the ray's line
                if (vdot(vsub(u, origin), direction) >= 0
                        or vdot(vsub(v, origin), direction) >= 0):
                    return "degenerate", None
            elif w0 <= 0 <= w1 or w1 <= 0 <= w0:
                p = vlerp(u, v, w0 / (w0 - w1))
                if vdot(vsub(p, origin), direction) >= 0:
                    return "degenerate", None
        return "none", None
    tvec = vsub(origin, tri[0])
    u = vdot(tvec, pvec) / det
    if u < 0 or u > 1:
        return "none", None
    qvec = vcross(tvec, e1)
    v = vdot(direction, qvec) / det
    if v < 0 or u + v > 1:
        return "none", None
    t = vdot(e2, qvec) / det
    if t < 0:
        return "none", None
    if t == 0 or u == 0 or v == 0 or u + v == 1:
        return "degenerate", t
    return "clean", t


def ray_first_hit(origin, direction, triangles, candidates=None, exclude=()):
    """First triangle hit along an exact ray.

    triangles: list of rational point triples. candidates: optional index
    iterable (e.g. from an AABB tree); defaults to all. Returns
    (status, t, index) with status 'clean', 'degenerate' (some contact along
    the ray grazed an edge, vertex, or the origin) or 'none'.
    """
    idxs = range(len(triangles)) if candidates is None else candidates
    best_t = None
    best_i = None
    degenerate = False
    for i in idxs:
        if i in exclude:
            continue
        status, t = ray_triangle(origin, direction, triangles[i])
        if status == "none":
            continue
        if status == "degenerate":
            degenerate = True
            continue
        if best_t is None or t < best_t:
            best_t = t
            best_i = i
    if degenerate:
        return "degenerate", best_t, best_i
    if best_t is None:
        return "none", None, None
    return "clean", best_t, best_i


def ray_parity(origin, direction, triangles, candidates=None):
    """Crossing parity of a ray against a triangle set.

    Returns (inside, ok); ok is False when any contact was degenerate, in
    which case the caller should re-shoot along a fresh direction.
    """
    idxs = range(len(triangles)) if candidates is None else candidates
    count = 0
    for i in idxs:
        status, t = ray_triangle(origin, direction, triangles[i])
        if status == "degenerate":
            return False, False
        if status == "clean":
            count += 1
    return count % 2 == 1, True


def parity_inside(origin, triangles, candidates_for=None, max_attempts=128):
    """Containment in a watertight triangle set by ray parity.

    Re-shoots along deterministic directions (1, k, k*k) until one ray makes
    no degenerate contact; distinct k never give collinear directions and
    each edge, vertex, or plane of the set spoils only finitely many k, so
    the loop terminates for any finite set. candidates_for: optional callable
    direction -> candidate index iterable (e.g. an AABB tree query).
    """
    for k in range(1, max_attempts + 1):
        d = (1, k, k * k)
        cand = None if candidates_for is None else candidates_for(d)
        inside, ok = ray_parity(origin, d, triangles, cand)
        if ok:
            return inside
    raise IntersectionError("no clean parity ray found")
