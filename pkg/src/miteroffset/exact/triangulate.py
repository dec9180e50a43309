"""Conforming triangulation of a facet under point and segment constraints.

Exact throughout. The contract is validity: every constraint point is a
vertex, every constraint segment is a union of edges, triangles cover the
facet with disjoint interiors and none has zero area. Internally the
pseudo-polygon refill uses the Delaunay criterion because it is the standard
terminating choice, but no Delaunay property is promised to callers.

Constraint segments are allowed to cross each other and to overlap
collinearly; the planar subdivision is normalized first (crossings split
both parties, overlaps split at each other's endpoints).
"""

from gmpy2 import mpq

from .rational import Q0, sign, vcross, vdot, vlerp, vsub


class TriangulationError(Exception):
    pass


def _orient2d(a, b, c):
    return sign(
        (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    )


def _incircle(a, b, c, d):
    """> 0 when d is strictly inside the circumcircle of CCW (a, b, c)."""
    adx = a[0] - d[0]
    ady = a[1] - d[1]
    bdx = b[0] - d[0]
    bdy = b[1] - d[1]
    cdx = c[0] - d[0]
    cdy = c[1] - d[1]
    ad2 = adx * adx + ady * ady
    bd2 = bdx * bdx + bdy * bdy
    cd2 = cdx * cdx + cdy * cdy
    det = (
        adx * (bdy * cd2 - cdy * bd2)
        - ady * (bdx * cd2 - cdx * bd2)
        + ad2 * (bdx * cdy - cdx * bdy)
    )
    return sign(det)


_CYCLIC = ((1, 2), (2, 0), (0, 1))


class _Facet2D:
    """Exact 2D chart of a facet plane via its dominant normal axis."""

    def __init__(self, poly):
        n = (Q0, Q0, Q0)
        for i in range(2, len(poly)):
            n = vcross(vsub(poly[1], poly[0]), vsub(poly[i], poly[0]))
            if n != (Q0, Q0, Q0):
                break
        if n == (Q0, Q0, Q0):
            raise TriangulationError("degenerate facet")
        self.normal = n
        ax = max(range(3), key=lambda i: abs(n[i]))
        self.u_ax, self.v_ax = _CYCLIC[ax]

    def uv(self, p):
        return (p[self.u_ax], p[self.v_ax])


class _Mesh2D:
    """Small editable triangulation keyed by vertex ids."""

    def __init__(self):
        self.tris = set()  # (i, j, k) CCW in uv space
        self.edge_map = {}  # frozen (min, max) -> set of tris

    def add(self, t):
        self.tris.add(t)
        for i, j in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
            key = (i, j) if i < j else (j, i)
            self.edge_map.setdefault(key, set()).add(t)

    def remove(self, t):
        self.tris.discard(t)
        for i, j in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
            key = (i, j) if i < j else (j, i)
            s = self.edge_map.get(key)
            if s is not None:
                s.discard(t)
                if not s:
                    del self.edge_map[key]

    def has_edge(self, a, b):
        key = (a, b) if a < b else (b, a)
        return key in self.edge_map

    def edge_tris(self, a, b):
        key = (a, b) if a < b else (b, a)
        return list(self.edge_map.get(key, ()))


def triangulate_facet(facet, points=(), segments=()):
    """Conforming exact triangulation of a rational convex polygon facet.

    facet    : >= 3 rational 3D points in boundary order, orientation
               meaningful; collinear boundary vertices are allowed
    points   : rational 3D points on the facet (closed region)
    segments : (p, q) rational 3D pairs on the facet

    Returns a list of 3D triangles (point triples) oriented like the facet.
    """
    chart = _Facet2D(facet)

    pts3 = []  # id -> 3D point
    uv = []  # id -> 2D point
    index = {}

    def vid(p):
        i = index.get(p)
        if i is None:
            i = len(pts3)
            index[p] = i
            pts3.append(p)
            uv.append(chart.uv(p))
        return i

    fids = [vid(p) for p in facet]
    nf = len(fids)
    if nf < 3 or len(set(fids)) != nf:
        raise TriangulationError("degenerate facet")

    raw_segs = [(fids[i], fids[(i + 1) % nf]) for i in range(nf)]
    for p, q in segments:
        a, b = vid(p), vid(q)
        if a != b:
            raw_segs.append((a, b))
    for p in points:
        vid(p)

    # --- normalize the planar subdivision -------------------------------
    # 1. proper segment crossings mint new vertices
    for i in range(len(raw_segs)):
        a, b = raw_segs[i]
        pa, pb = uv[a], uv[b]
        for j in range(i + 1, len(raw_segs)):
            c, d = raw_segs[j]
            pc, pd = uv[c], uv[d]
            r = (pb[0] - pa[0], pb[1] - pa[1])
            s = (pd[0] - pc[0], pd[1] - pc[1])
            denom = r[0] * s[1] - r[1] * s[0]
            if denom == 0:
                continue  # parallel; collinear overlaps are split in pass 2
            qp = (pc[0] - pa[0], pc[1] - pa[1])
            t = (qp[0] * s[1] - qp[1] * s[0]) / denom
            w = (qp[0] * r[1] - qp[1] * r[0]) / denom
            if 0 <= t <= 1 and 0 <= w <= 1:
                vid(vlerp(pts3[a], pts3[b], t))

    # 2. any vertex strictly inside a segment splits it (this also covers
    # collinear overlaps: the overlapping endpoints are vertices)
    splits = [[] for _ in raw_segs]
    for i, (a, b) in enumerate(raw_segs):
        pa, pb = uv[a], uv[b]
        for pid in range(len(pts3)):
            if pid == a or pid == b:
                continue
            p = uv[pid]
            if _orient2d(pa, pb, p) != 0:
                continue
            t = (p[0] - pa[0]) * (pb[0] - pa[0]) + (p[1] - pa[1]) * (pb[1] - pa[1])
            if 0 < t < (pb[0] - pa[0]) ** 2 + (pb[1] - pa[1]) ** 2:
                splits[i].append((t, pid))

    edges = set()
    for i, (a, b) in enumerate(raw_segs):
        chain = [a] + [pid for _, pid in sorted(splits[i])] + [b]
        for u, v in zip(chain, chain[1:]):
            if u != v:
                edges.add((u, v) if u < v else (v, u))

    # --- build: fan from a convex corner, insert vertices, enforce edges --
    ring = list(fids)
    area2 = Q0
    for i in range(nf):
        pa, pb = uv[ring[i]], uv[ring[(i + 1) % nf]]
        area2 += pa[0] * pb[1] - pa[1] * pb[0]
    if area2 == 0:
        raise TriangulationError("degenerate facet")
    if area2 < 0:
        area2 = -area2
        ring.reverse()

    mesh = _Mesh2D()
    anchor = min(range(nf), key=lambda i: uv[ring[i]])
    in_mesh = set()
    for k in range(1, nf - 1):
        a = ring[anchor]
        b = ring[(anchor + k) % nf]
        c = ring[(anchor + k + 1) % nf]
        # zero orient: boundary vertex collinear with the anchor; the vertex
        # lands on a fan edge and is recovered by point insertion below
        if _orient2d(uv[a], uv[b], uv[c]) > 0:
            mesh.add((a, b, c))
            in_mesh.update((a, b, c))
    if not mesh.tris:
        raise TriangulationError("degenerate facet")

    for pid in range(len(pts3)):
        if pid in in_mesh:
            continue
        _insert_point(mesh, uv, pid)
        in_mesh.add(pid)

    for a, b in sorted(edges):
        if not mesh.has_edge(a, b):
            _enforce_edge(mesh, uv, a, b)

    # --- validate and lift back to 3D ------------------------------------
    total = Q0
    out = []
    fnormal = chart.normal
    for t in mesh.tris:
        a2 = _cross_area(uv[t[0]], uv[t[1]], uv[t[2]])
        if a2 == 0:
            raise TriangulationError("zero-area fragment produced")
        total += abs(a2)
        p0, p1, p2 = pts3[t[0]], pts3[t[1]], pts3[t[2]]
        n = vcross(vsub(p1, p0), vsub(p2, p0))
        if vdot(n, fnormal) < 0:
            p1, p2 = p2, p1
        out.append((p0, p1, p2))
    if total != area2:
        raise TriangulationError("fragments do not tile the facet")
    for a, b in edges:
        if not mesh.has_edge(a, b):
            raise TriangulationError("constraint edge missing from result")
    # conformity: a directed edge may appear in at most one CCW triangle
    directed = set()
    for t in mesh.tris:
        for e in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
            if e in directed:
                raise TriangulationError("overlapping fragments")
            directed.add(e)
    return out


def _cross_area(a, b, c):
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _insert_point(mesh, uv, pid):
    p = uv[pid]
    for t in list(mesh.tris):
        a, b, c = uv[t[0]], uv[t[1]], uv[t[2]]
        o_ab = _orient2d(a, b, p)
        o_bc = _orient2d(b, c, p)
        o_ca = _orient2d(c, a, p)
        if o_ab < 0 or o_bc < 0 or o_ca < 0:
            continue
        zeros = (o_ab == 0) + (o_bc == 0) + (o_ca == 0)
        if zeros == 0:
            mesh.remove(t)
            mesh.add((t[0], t[1], pid))
            mesh.add((t[1], t[2], pid))
            mesh.add((t[2], t[0], pid))
            return
        if zeros == 1:
            if o_ab == 0:
                e = (t[0], t[1])
            elif o_bc == 0:
                e = (t[1], t[2])
            else:
                e = (t[2], t[0])
            for tt in mesh.edge_tris(*e):
                mesh.remove(tt)
                k = [v for v in tt if v not in e]
                other = k[0]
                # split tt=(x,y,other) on edge (x,y): keep orientation
                x, y = _directed(tt, e)
                mesh.add((x, pid, other))
                mesh.add((pid, y, other))
            return
        # zeros == 2: coincides with a vertex; caller filtered these
        return
    raise TriangulationError("point to insert lies outside the facet")


def _directed(tri, edge):
    """Return edge as it is directed inside tri."""
    for i in range(3):
        u, v = tri[i], tri[(i + 1) % 3]
        if {u, v} == set(edge):
            return u, v
    raise TriangulationError("edge not in triangle")


def _enforce_edge(mesh, uv, a, b):
    pa, pb = uv[a], uv[b]
    # find the starting triangle at a crossed by the open segment (a, b)
    start = None
    for t in mesh.tris:
        if a not in t:
            continue
        i = t.index(a)
        x, y = t[(i + 1) % 3], t[(i + 2) % 3]
        # CCW triangle (a, x, y): the segment enters through edge (x, y)
        # when x is strictly right of a->b and y strictly left
        if _orient2d(pa, pb, uv[x]) < 0 and _orient2d(pa, pb, uv[y]) > 0:
            start = (t, y, x)
            break
    if start is None:
        raise TriangulationError("cannot route constraint edge")
    t, left, right = start
    crossed = [t]
    upper = [left]
    lower = [right]
    while True:
        nxt = [tt for tt in mesh.edge_tris(left, right) if tt not in crossed]
        if not nxt:
            raise TriangulationError("constraint walk left the facet")
        t = nxt[0]
        z = [v for v in t if v != left and v != right][0]
        crossed.append(t)
        if z == b:
            break
        o = _orient2d(pa, pb, uv[z])
        if o > 0:
            upper.append(z)
            left = z
        elif o < 0:
            lower.append(z)
            right = z
        else:
            raise TriangulationError("vertex on constraint interior")
    for t in crossed:
        mesh.remove(t)
    _fill_pseudo(mesh, uv, a, b, upper)
    _fill_pseudo(mesh, uv, b, a, list(reversed(lower)))


def _fill_pseudo(mesh, uv, a, b, chain):
    """Retriangulate one side of an enforced edge (Anglada's method).

    chain lists the pseudo-polygon vertices strictly left of a->b, ordered
    from a to b.
    """
    if not chain:
        return
    if len(chain) == 1:
        mesh.add((a, b, chain[0]))
        return
    ci = 0
    for k in range(1, len(chain)):
        if _incircle(uv[a], uv[b], uv[chain[ci]], uv[chain[k]]) > 0:
            ci = k
    c = chain[ci]
    _fill_pseudo(mesh, uv, a, c, chain[:ci])
    _fill_pseudo(mesh, uv, c, b, chain[ci + 1 :])
    mesh.add((a, b, c))
