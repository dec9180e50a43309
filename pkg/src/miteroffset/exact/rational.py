"""Exact rational points, vectors and planes.

All geometry that decides anything (intersections, containment, orientation)
runs on gmpy2.mpq tuples. Floats only appear as cached, clearly-labelled
mirrors for numeric work that tolerates rounding.
"""

import math

from gmpy2 import mpq

Q0 = mpq(0)
Q1 = mpq(1)


def to_mpq(x):
    """Promote x to mpq exactly. Floats keep their exact binary value."""
    return mpq(x)


def parse_decimal(token):
    """Exact rational from a decimal string token like '1.25' or '-3e-4'.

    No intermediate binary float is involved; '0.1' becomes 1/10 exactly.
    """
    s = token.strip()
    if s.startswith("."):
        s = "0" + s
    elif s[:2] in ("-.", "+."):
        s = s[0] + "0" + s[1:]
    return mpq(s)


def qvec(x, y, z):
    return (mpq(x), mpq(y), mpq(z))


def vadd(a, b):
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def vsub(a, b):
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def vneg(a):
    return (-a[0], -a[1], -a[2])


def vscale(a, s):
    return (a[0] * s, a[1] * s, a[2] * s)


def vdot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def vcross(a, b):
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def vnorm2(a):
    return a[0] * a[0] + a[1] * a[1] + a[2] * a[2]


def vfloat(a):
    return (float(a[0]), float(a[1]), float(a[2]))


def vlerp(a, b, t):
    """a + t*(b-a) with rational t."""
    return (
        a[0] + t * (b[0] - a[0]),
        a[1] + t * (b[1] - a[1]),
        a[2] + t * (b[2] - a[2]),
    )


def centroid(points):
    n = mpq(len(points))
    sx = sum((p[0] for p in points), Q0)
    sy = sum((p[1] for p in points), Q0)
    sz = sum((p[2] for p in points), Q0)
    return (sx / n, sy / n, sz / n)


def sign(q):
    if q > 0:
        return 1
    if q < 0:
        return -1
    return 0


def orient3d(a, b, c, d):
    """Sign of the determinant of (b-a, c-a, d-a).

    +1 when d lies on the positive side of the oriented plane (a, b, c),
    0 when coplanar. Exact.
    """
    return sign(vdot(vcross(vsub(b, a), vsub(c, a)), vsub(d, a)))


class RPlane:
    """Plane a*x + b*y + c*z + d = 0 with exact rational coefficients.

    The rational normal (a, b, c) is unnormalized (square roots are not
    rational); `unit()` returns the floating copy with a^2+b^2+c^2 = 1 for
    numeric consumers.
    """

    __slots__ = ("a", "b", "c", "d", "_unit")

    def __init__(self, a, b, c, d):
        self.a = mpq(a)
        self.b = mpq(b)
        self.c = mpq(c)
        self.d = mpq(d)
        if self.a == 0 and self.b == 0 and self.c == 0:
            raise ValueError("degenerate plane: zero normal")
        self._unit = None

    @classmethod
    def from_points(cls, p0, p1, p2):
        n = vcross(vsub(p1, p0), vsub(p2, p0))
        if n == (0, 0, 0):
            raise ValueError("collinear points define no plane")
        return cls(n[0], n[1], n[2], -vdot(n, p0))

    @property
    def normal(self):
        return (self.a, self.b, self.c)

    def eval(self, p):
        """Exact signed value a*x + b*y + c*z + d (scale of the raw normal)."""
        return self.a * p[0] + self.b * p[1] + self.c * p[2] + self.d

    def side(self, p):
        return sign(self.eval(p))

    def unit(self):
        """Floating (nx, ny, nz, d) scaled so the normal has unit length."""
        if self._unit is None:
            na, nb, nc = float(self.a), float(self.b), float(self.c)
            s = math.sqrt(na * na + nb * nb + nc * nc)
            self._unit = (na / s, nb / s, nc / s, float(self.d) / s)
        return self._unit

    def flipped(self):
        return RPlane(-self.a, -self.b, -self.c, -self.d)

    def __repr__(self):
        return f"RPlane({self.a}, {self.b}, {self.c}, {self.d})"


def point_on_segment(p, a, b):
    """True when p lies on the closed segment [a, b]. Exact."""
    ab = vsub(b, a)
    ap = vsub(p, a)
    if vcross(ab, ap) != (Q0, Q0, Q0):
        return False
    t = vdot(ap, ab)
    return 0 <= t <= vnorm2(ab)


def point_in_triangle(p, a, b, c):
    """Exact closed point-in-triangle test for a coplanar point p.

    Returns False when p is off the triangle's plane.
    """
    n = vcross(vsub(b, a), vsub(c, a))
    if vdot(n, vsub(p, a)) != 0:
        return False
    for u, v in ((a, b), (b, c), (c, a)):
        if vdot(vcross(vsub(v, u), vsub(p, u)), n) < 0:
            return False
    return True


def triangle_area2_vec(a, b, c):
    """Unnormalized area vector (cross product); zero iff degenerate."""
    return vcross(vsub(b, a), vsub(c, a))


def point_triangle_dist2(p, a, b, c):
    """Exact squared distance from p to triangle (a, b, c).

    Classic Voronoi-region walk, all in rationals.
    """
    ab = vsub(b, a)
    ac = vsub(c, a)
    ap = vsub(p, a)
    d1 = vdot(ab, ap)
    d2 = vdot(ac, ap)
    if d1 <= 0 and d2 <= 0:
        return vnorm2(ap)
    bp = vsub(p, b)
    d3 = vdot(ab, bp)
    d4 = vdot(ac, bp)
    if d3 >= 0 and d4 <= d3:
        return vnorm2(bp)
    vc = d1 * d4 - d3 * d2
    if vc <= 0 and d1 >= 0 and d3 <= 0:
        denom = vdot(ab, ab)
        t = d1 / denom
        return vnorm2(vsub(ap, vscale(ab, t)))
    cp = vsub(p, c)
    d5 = vdot(ab, cp)
    d6 = vdot(ac, cp)
    if d6 >= 0 and d5 <= d6:
        return vnorm2(cp)
    vb = d5 * d2 - d1 * d6
    if vb <= 0 and d2 >= 0 and d6 <= 0:
        denom = vdot(ac, ac)
        t = d2 / denom
        return vnorm2(vsub(ap, vscale(ac, t)))
    va = d3 * d6 - d5 * d4
    if va <= 0 and (d4 - d3) >= 0 and (d5 - d6) >= 0:
        bc = vsub(c, b)
        t = (d4 - d3) / (vdot(bc, bc))
        return vnorm2(vsub(bp, vscale(bc, t)))
    # interior: distance along the normal
    n = vcross(ab, ac)
    num = vdot(n, ap)
    return num * num / vnorm2(n)
