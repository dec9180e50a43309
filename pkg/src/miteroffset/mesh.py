"""Triangle soup container, exact-coordinate mesh I/O, and vertex
neighborhoods.

Coordinates are parsed from their decimal text directly into rationals, so
'0.1' enters the pipeline as exactly 1/10. Binary STL is promoted from the
exact binary value of each float32. Soups are taken as they come: duplicate
vertices, non-manifold edges and degenerate triangles all load; degenerate
triangles are flagged, never dropped.
"""

import struct

import numpy as np
from gmpy2 import mpq

from .exact.aabb import q_hi, q_lo
from .exact.rational import (
    RPlane,
    parse_decimal,
    point_triangle_dist2,
    vcross,
    vsub,
)

EPSILON_REL = 1e-5  # neighborhood ball, as a fraction of the bbox diagonal


class MeshError(Exception):
    pass


class BBoxInfo:
    """Exact bounds plus the float diagonal used to scale tolerances."""

    __slots__ = ("lo", "hi", "diagonal")

    def __init__(self, lo, hi):
        self.lo = lo
        self.hi = hi
        dx = float(hi[0] - lo[0])
        dy = float(hi[1] - lo[1])
        dz = float(hi[2] - lo[2])
        self.diagonal = float(np.sqrt(dx * dx + dy * dy + dz * dz))

    def float_bounds(self):
        return (
            (q_lo(self.lo[0]), q_lo(self.lo[1]), q_lo(self.lo[2])),
            (q_hi(self.hi[0]), q_hi(self.hi[1]), q_hi(self.hi[2])),
        )


class LocalNeighborhood:
    """Triangles feeding one vertex's offset solve."""

    __slots__ = ("vertex", "triangles", "epsilon_gathered")

    def __init__(self, vertex, triangles, epsilon_gathered):
        self.vertex = vertex
        self.triangles = triangles
        self.epsilon_gathered = epsilon_gathered


class TriangleSoup:
    """Indexed triangle soup with exact rational vertices.

    vertices : list of (mpq, mpq, mpq)
    triangles: list of (i, j, k) index triples
    """

    def __init__(self, vertices, triangles, name=""):
        self.vertices = [tuple(mpq(c) for c in v) for v in vertices]
        self.triangles = [tuple(int(i) for i in t) for t in triangles]
        self.name = name
        n = len(self.vertices)
        for t in self.triangles:
            if len(t) != 3 or any(i < 0 or i >= n for i in t):
                raise MeshError(f"triangle {t} references missing vertices")
        self.degenerate = frozenset(
            ti
            for ti, t in enumerate(self.triangles)
            if len({t[0], t[1], t[2]}) < 3
            or vcross(
                vsub(self.vertices[t[1]], self.vertices[t[0]]),
                vsub(self.vertices[t[2]], self.vertices[t[0]]),
            )
            == (0, 0, 0)
        )
        self._planes = {}
        self._star = None
        self._vfloat = None

    def __len__(self):
        return len(self.triangles)

    def triangle_points(self, ti):
        a, b, c = self.triangles[ti]
        return (self.vertices[a], self.vertices[b], self.vertices[c])

    def plane(self, ti):
        """Triangle's supporting plane, normal following the winding."""
        pl = self._planes.get(ti)
        if pl is None:
            if ti in self.degenerate:
                raise MeshError(f"triangle {ti} is degenerate, has no plane")
            pl = RPlane.from_points(*self.triangle_points(ti))
            self._planes[ti] = pl
        return pl

    def bbox(self):
        if not self.vertices:
            raise MeshError("empty mesh has no bbox")
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        zs = [v[2] for v in self.vertices]
        return BBoxInfo(
            (min(xs), min(ys), min(zs)), (max(xs), max(ys), max(zs))
        )

    def vertex_star(self, vi):
        """Ids of triangles touching vertex vi (degenerate ones included)."""
        if self._star is None:
            star = [[] for _ in self.vertices]
            for ti, t in enumerate(self.triangles):
                for v in set(t):
                    star[v].append(ti)
            self._star = star
        return self._star[vi]

    def vertices_float(self):
        if self._vfloat is None:
            self._vfloat = np.array(
                [[float(c) for c in v] for v in self.vertices], dtype=np.float64
            ).reshape(-1, 3)
        return self._vfloat

    def triangles_array(self):
        return np.array(self.triangles, dtype=np.int64).reshape(-1, 3)


def _star_is_simple_disk(soup, vi, star):
    """Boundary edges (odd use count) must form one closed cycle and no
    star edge may have more than two incident star triangles."""
    use = {}
    for ti in star:
        t = soup.triangles[ti]
        for a, b in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
            key = (a, b) if a < b else (b, a)
            use[key] = use.get(key, 0) + 1
    if any(c > 2 for c in use.values()):
        return False
    boundary = [e for e, c in use.items() if c % 2 == 1]
    if not boundary:
        return False  # no free edges at all: not a disk around vi
    deg = {}
    for a, b in boundary:
        deg[a] = deg.get(a, 0) + 1
        deg[b] = deg.get(b, 0) + 1
    if any(d != 2 for d in deg.values()):
        return False
    # connected single cycle: walk it
    adj = {}
    for a, b in boundary:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    start = boundary[0][0]
    prev, cur = None, start
    seen = 0
    while True:
        nxt = [x for x in adj[cur] if x != prev]
        if not nxt:
            return False
        prev, cur = cur, nxt[0]
        seen += 1
        if cur == start:
            break
        if seen > len(boundary):
            return False
    return seen == len(boundary)


def local_neighborhood(soup, vi, epsilon):
    """Triangles that define vertex vi's offset planes.

    The incident star when it is a simple disk; otherwise every triangle
    within exact distance epsilon of the vertex (whole triangles, no
    clipping). Degenerate triangles never participate.
    """
    star = [ti for ti in soup.vertex_star(vi) if ti not in soup.degenerate]
    if not star:
        raise MeshError(f"vertex {vi} has no usable incident triangles")
    if _star_is_simple_disk(soup, vi, star):
        return LocalNeighborhood(vi, sorted(star), False)
    eps2 = mpq(epsilon) * mpq(epsilon)
    v = soup.vertices[vi]
    picked = []
    for ti in range(len(soup.triangles)):
        if ti in soup.degenerate:
            continue
        if point_triangle_dist2(v, *soup.triangle_points(ti)) <= eps2:
            picked.append(ti)
    if not picked:
        raise MeshError(f"vertex {vi}: empty epsilon neighborhood")
    return LocalNeighborhood(vi, picked, True)


# ---------------------------------------------------------------------------
# parsing

def _parse_obj(text, name):
    vertices = []
    faces = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "v" and len(parts) >= 4:
            vertices.append(tuple(parse_decimal(tok) for tok in parts[1:4]))
        elif parts[0] == "f" and len(parts) >= 4:
            idx = []
            for tok in parts[1:]:
                s = tok.split("/", 1)[0]
                i = int(s)
                idx.append(i - 1 if i > 0 else len(vertices) + i)
            for k in range(1, len(idx) - 1):
                faces.append((idx[0], idx[k], idx[k + 1]))
    return TriangleSoup(vertices, faces, name)


def _parse_off(text, name):
    tokens = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            tokens.extend(line.split())
    if not tokens or tokens[0] != "OFF":
        raise MeshError("not an OFF file")
    k = 1
    nv, nf = int(tokens[k]), int(tokens[k + 1])
    k += 3  # skip edge count
    vertices = []
    for _ in range(nv):
        vertices.append(
            (
                parse_decimal(tokens[k]),
                parse_decimal(tokens[k + 1]),
                parse_decimal(tokens[k + 2]),
            )
        )
        k += 3
    faces = []
    for _ in range(nf):
        cnt = int(tokens[k])
        idx = [int(tokens[k + 1 + j]) for j in range(cnt)]
        k += 1 + cnt
        for j in range(1, cnt - 1):
            faces.append((idx[0], idx[j], idx[j + 1]))
    return TriangleSoup(vertices, faces, name)


def _parse_stl_ascii(text, name):
    vertices = []
    index = {}
    faces = []
    cur = []
    for line in text.splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "vertex" and len(parts) >= 4:
            p = (
                parse_decimal(parts[1]),
                parse_decimal(parts[2]),
                parse_decimal(parts[3]),
            )
            i = index.get(p)
            if i is None:
                i = len(vertices)
                index[p] = i
                vertices.append(p)
            cur.append(i)
            if len(cur) == 3:
                faces.append(tuple(cur))
                cur = []
    return TriangleSoup(vertices, faces, name)


def _parse_stl_binary(data, name):
    if len(data) < 84:
        raise MeshError("binary STL too short")
    (count,) = struct.unpack_from("<I", data, 80)
    vertices = []
    index = {}
    faces = []
    off = 84
    for _ in range(count):
        rec = struct.unpack_from("<12fH", data, off)
        off += 50
        tri = []
        for v in range(3):
            p = tuple(mpq(float(rec[3 + 3 * v + c])) for c in range(3))
            i = index.get(p)
            if i is None:
                i = len(vertices)
                index[p] = i
                vertices.append(p)
            tri.append(i)
        faces.append(tuple(tri))
    return TriangleSoup(vertices, faces, name)


def load_mesh(path):
    """Load OBJ, OFF, or STL into a TriangleSoup with exact coordinates."""
    path = str(path)
    lower = path.lower()
    with open(path, "rb") as fh:
        data = fh.read()
    name = path.rsplit("/", 1)[-1]
    if lower.endswith(".obj"):
        return _parse_obj(data.decode("utf-8", "replace"), name)
    if lower.endswith(".off"):
        return _parse_off(data.decode("utf-8", "replace"), name)
    if lower.endswith(".stl"):
        if data[:5].lower() == b"solid":
            try:
                soup = _parse_stl_ascii(data.decode("utf-8", "replace"), name)
                if len(soup.triangles):
                    return soup
            except (MeshError, ValueError):
                pass
        return _parse_stl_binary(data, name)
    raise MeshError(f"unsupported mesh format: {path}")


def format_coord(value, precision):
    """One coordinate at the given significant-digit count."""
    return f"{float(value):.{precision}g}"


def save_obj(path, vertices, triangles, precision=17, exact=False, comments=()):
    """Write an OBJ file.

    precision is in significant digits (17 round-trips doubles). With
    exact=True, coordinates are written as exact rationals ('p/q'), which
    this package's loader reads back losslessly.
    """
    lines = [f"# {c}" for c in comments]
    if exact:
        for v in vertices:
            lines.append(f"v {mpq(v[0])} {mpq(v[1])} {mpq(v[2])}")
    else:
        for v in vertices:
            lines.append(
                "v "
                + " ".join(format_coord(c, precision) for c in v)
            )
    for t in triangles:
        lines.append(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}")
    with open(str(path), "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_distances(path, n_triangles):
    """Per-face sidecar: one decimal scalar per line, one per triangle."""
    values = []
    with open(str(path)) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                values.append(float(line))
    if len(values) != n_triangles:
        raise MeshError(
            f"distance file has {len(values)} entries, mesh has"
            f" {n_triangles} triangles"
        )
    return values
