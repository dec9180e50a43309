"""Axis-aligned bounding box tree over float boxes.

Boxes come from rational geometry and are rounded OUTWARD, so box queries
can miss nothing; candidates are always confirmed by an exact test on the
caller's side. Ray queries run the slab test in rational arithmetic against
the float boxes, which keeps them conservative too.
"""

import math

from gmpy2 import mpq


def q_lo(q):
    """Largest float <= q."""
    f = float(q)
    return f if mpq(f) <= q else math.nextafter(f, -math.inf)


def q_hi(q):
    """Smallest float >= q."""
    f = float(q)
    return f if mpq(f) >= q else math.nextafter(f, math.inf)


def box_of_points(points):
    """Conservative float box around rational points."""
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    zs = [p[2] for p in points]
    return (
        q_lo(min(xs)),
        q_lo(min(ys)),
        q_lo(min(zs)),
        q_hi(max(xs)),
        q_hi(max(ys)),
        q_hi(max(zs)),
    )


def boxes_overlap(a, b):
    return (
        a[0] <= b[3]
        and b[0] <= a[3]
        and a[1] <= b[4]
        and b[1] <= a[4]
        and a[2] <= b[5]
        and b[2] <= a[5]
    )


def merge_boxes(a, b):
    return (
        min(a[0], b[0]),
        min(a[1], b[1]),
        min(a[2], b[2]),
        max(a[3], b[3]),
        max(a[4], b[4]),
        max(a[5], b[5]),
    )


class AabbTree:
    """Static median-split BVH over a list of boxes."""

    LEAF_SIZE = 4

    def __init__(self, boxes):
        self.boxes = list(boxes)
        # node: [box, left, right, items]; leaf iff items is not None
        self.nodes = []
        if self.boxes:
            self._build(list(range(len(self.boxes))))

    def _build(self, items):
        box = self.boxes[items[0]]
        for i in items[1:]:
            box = merge_boxes(box, self.boxes[i])
        idx = len(self.nodes)
        self.nodes.append([box, -1, -1, None])
        if len(items) <= self.LEAF_SIZE:
            self.nodes[idx][3] = items
            return idx
        spans = (box[3] - box[0], box[4] - box[1], box[5] - box[2])
        ax = max(range(3), key=lambda a: spans[a])
        items.sort(key=lambda i: self.boxes[i][ax] + self.boxes[i][ax + 3])
        mid = len(items) // 2
        left = self._build(items[:mid])
        right = self._build(items[mid:])
        self.nodes[idx][1] = left
        self.nodes[idx][2] = right
        return idx

    def query_box(self, box):
        """Ids of stored boxes overlapping the given float box (closed)."""
        if not self.nodes:
            return []
        out = []
        stack = [0]
        while stack:
            node = self.nodes[stack.pop()]
            if not boxes_overlap(node[0], box):
                continue
            if node[3] is not None:
                for i in node[3]:
                    if boxes_overlap(self.boxes[i], box):
                        out.append(i)
            else:
                stack.append(node[1])
                stack.append(node[2])
        out.sort()
        return out

    def query_ray(self, origin, direction):
        """Ids of boxes the exact ray may pass through. Conservative."""
        if not self.nodes:
            return []
        out = []
        stack = [0]
        while stack:
            ni = stack.pop()
            node = self.nodes[ni]
            if not _ray_box_exact(origin, direction, node[0]):
                continue
            if node[3] is not None:
                for i in node[3]:
                    if _ray_box_exact(origin, direction, self.boxes[i]):
                        out.append(i)
            else:
                stack.append(node[1])
                stack.append(node[2])
        out.sort()
        return out


def _ray_box_exact(origin, direction, box):
    """Exact slab test of a rational ray against a float box."""
    tmin = None
    tmax = None
    for ax in range(3):
        o = origin[ax]
        d = direction[ax]
        lo = mpq(box[ax])
        hi = mpq(box[ax + 3])
        if d == 0:
            if o < lo or o > hi:
                return False
            continue
        t0 = (lo - o) / d
        t1 = (hi - o) / d
        if t0 > t1:
            t0, t1 = t1, t0
        if tmin is None or t0 > tmin:
            tmin = t0
        if tmax is None or t1 < tmax:
            tmax = t1
    if tmin is None:
        return True  # direction zero on all axes is rejected upstream
    if tmax < 0:
        return False
    return tmin <= tmax
