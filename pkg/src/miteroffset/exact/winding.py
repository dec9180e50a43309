"""Generalized winding number of a triangle soup, with a reliability flag.

Floating point on purpose: the winding number is only used to pick sides far
from the surface. Queries inside the guard band (1e-9 of the bbox diagonal
by default) are flagged unreliable so the caller can fall back to exact ray
parity.
"""

import numpy as np

GUARD_BAND_REL = 1e-9


def solid_angle_sum(vertices, triangles, query):
    """Sum of signed solid angles over all triangles, divided by 4*pi.

    vertices : (n, 3) float array
    triangles: (m, 3) int array
    query    : (3,) point
    """
    if len(triangles) == 0:
        return 0.0
    a = vertices[triangles[:, 0]] - query
    b = vertices[triangles[:, 1]] - query
    c = vertices[triangles[:, 2]] - query
    la = np.linalg.norm(a, axis=1)
    lb = np.linalg.norm(b, axis=1)
    lc = np.linalg.norm(c, axis=1)
    det = np.einsum("ij,ij->i", a, np.cross(b, c))
    denom = (
        la * lb * lc
        + np.einsum("ij,ij->i", a, b) * lc
        + np.einsum("ij,ij->i", b, c) * la
        + np.einsum("ij,ij->i", c, a) * lb
    )
    omega = 2.0 * np.arctan2(det, denom)
    return float(np.sum(omega) / (4.0 * np.pi))


def points_triangles_distance(points, v0, v1, v2):
    """Min distance from each point to a triangle set, vectorized.

    points: (q, 3); v0, v1, v2: (t, 3). Returns (dist (q,), nearest (q,)).
    The closest point on a triangle is either the in-plane projection or a
    point on one of the edges, so the minimum over those candidates is exact
    up to rounding.
    """
    q = points[:, None, :]  # (q, 1, 3)
    d2 = None
    for a, b in ((v0, v1), (v1, v2), (v2, v0)):
        ab = b - a  # (t, 3)
        t = np.einsum("qtj,tj->qt", q - a, ab) / np.maximum(
            np.einsum("tj,tj->t", ab, ab), 1e-300
        )
        t = np.clip(t, 0.0, 1.0)
        closest = a + t[:, :, None] * ab
        d = np.einsum("qtj,qtj->qt", q - closest, q - closest)
        d2 = d if d2 is None else np.minimum(d2, d)
    n = np.cross(v1 - v0, v2 - v0)  # (t, 3)
    nn = np.einsum("tj,tj->t", n, n)
    safe_nn = np.maximum(nn, 1e-300)
    h = np.einsum("qtj,tj->qt", q - v0, n)
    proj = q - (h / safe_nn)[:, :, None] * n
    # barycentric inside test for the projection
    inside = np.ones(h.shape, dtype=bool)
    for ea, eb in ((v0, v1), (v1, v2), (v2, v0)):
        m = np.cross(eb - ea, n)  # outward-ish edge normal in plane
        s = np.einsum("qtj,tj->qt", proj - ea, m)
        inside &= s <= 0
    inside &= nn > 0
    dplane = h * h / safe_nn
    d2 = np.where(inside, np.minimum(d2, dplane), d2)
    nearest = np.argmin(d2, axis=1)
    return np.sqrt(d2[np.arange(len(points)), nearest]), nearest


class WindingField:
    """Winding-number oracle for one mesh with a guard band.

    query() returns (value, reliable); reliable is False within
    guard_band of the surface, where the float winding number cannot be
    trusted to pick a side.
    """

    def __init__(self, vertices, triangles, diagonal, guard_rel=GUARD_BAND_REL):
        self.vertices = np.asarray(vertices, dtype=np.float64)
        self.triangles = np.asarray(triangles, dtype=np.int64).reshape(-1, 3)
        self.guard = guard_rel * diagonal
        if len(self.triangles):
            self._v0 = self.vertices[self.triangles[:, 0]]
            self._v1 = self.vertices[self.triangles[:, 1]]
            self._v2 = self.vertices[self.triangles[:, 2]]
        else:
            self._v0 = self._v1 = self._v2 = np.zeros((0, 3))

    def query(self, point):
        p = np.asarray(point, dtype=np.float64)
        w = solid_angle_sum(self.vertices, self.triangles, p)
        if len(self.triangles) == 0:
            return w, True
        d, _ = points_triangles_distance(p[None, :], self._v0, self._v1, self._v2)
        return w, bool(d[0] > self.guard)
