"""Local offset polyhedra.

One convex polyhedron per input vertex, edge, and triangle; their union is
the offset volume the extraction stage carves the output surface from.
Offset points enter the hulls as exact rationals (the computed double,
promoted verbatim), so everything downstream stays exact.
"""

import warnings
from concurrent.futures import ThreadPoolExecutor

from gmpy2 import mpq

from .exact import convex_hull


class VolumeError(Exception):
    pass


class OffsetVolumeSet:
    """The dim-3 offset polyhedra plus bookkeeping for the skipped ones.

    polyhedra : ConvexPolyhedron list, element order (vertices, edges,
                triangles), each with .source = (kind, element id)
    by_element: (kind, element id) -> index into polyhedra
    degenerate: source keys whose hull had affine dimension < 3
    skipped_triangles: degenerate input triangles that built nothing
    """

    __slots__ = ("polyhedra", "by_element", "degenerate", "skipped_triangles")

    def __init__(self, polyhedra, by_element, degenerate, skipped_triangles):
        self.polyhedra = polyhedra
        self.by_element = by_element
        self.degenerate = degenerate
        self.skipped_triangles = skipped_triangles

    def __len__(self):
        return len(self.polyhedra)


def _promote(p):
    return (mpq(p[0]), mpq(p[1]), mpq(p[2]))


def collect_edges(soup):
    """edge (a, b), a < b -> sorted ids of the triangles containing both
    endpoints. Non-manifold multiplicity is kept; degenerate triangles are
    not edge sources."""
    edges = {}
    for ti, t in enumerate(soup.triangles):
        if ti in soup.degenerate:
            continue
        for a, b in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
            key = (a, b) if a < b else (b, a)
            edges.setdefault(key, set()).add(ti)
    return {e: sorted(ts) for e, ts in sorted(edges.items())}


def build_vertex_polyhedron(soup, vi, sol):
    """Hull of the vertex and every one of its offset points."""
    pts = [soup.vertices[vi]]
    pts.extend(_promote(p) for p in sol.points)
    return convex_hull(pts, source=("vertex", vi))


def build_edge_polyhedron(soup, edge, tri_ids, sol_a, sol_b):
    """Hull of both endpoints and each endpoint offset point whose plane
    group covers at least one triangle adjacent to the edge."""
    tset = frozenset(tri_ids)
    pts = [soup.vertices[edge[0]], soup.vertices[edge[1]]]
    for sol in (sol_a, sol_b):
        for k in range(sol.K):
            if sol.block_triangles(k) & tset:
                pts.append(_promote(sol.points[k]))
    return convex_hull(pts, source=("edge", edge))


def build_triangle_polyhedron(soup, ti, sols):
    """Hull of the triangle corners and, per corner, the offset point whose
    plane group contains this triangle."""
    if ti in soup.degenerate:
        raise VolumeError(f"triangle {ti} is degenerate")
    pts = list(soup.triangle_points(ti))
    for sol in sols:
        mine = sol.points_for_triangle(ti)
        if not mine:
            raise VolumeError(
                f"vertex {sol.vertex} has no offset group containing"
                f" triangle {ti}"
            )
        pts.extend(_promote(p) for p in mine)
    return convex_hull(pts, source=("triangle", ti))


def build_offset_volumes(soup, solutions, threads=1):
    """Build every element polyhedron.

    solutions: vertex id -> OffsetSolution. Construction is element
    parallel; the result ordering depends only on element ids.
    """
    edges = collect_edges(soup)
    jobs = []
    for vi in sorted(solutions):
        jobs.append(("vertex", vi))
    for e in edges:
        jobs.append(("edge", e))
    skipped = []
    for ti in range(len(soup.triangles)):
        if ti in soup.degenerate:
            skipped.append(ti)
            continue
        jobs.append(("triangle", ti))
    if skipped:
        warnings.warn(
            f"{len(skipped)} degenerate input triangles contribute no"
            " offset volume",
            stacklevel=2,
        )

    def run(job):
        kind, key = job
        if kind == "vertex":
            return build_vertex_polyhedron(soup, key, solutions[key])
        if kind == "edge":
            try:
                sol_a, sol_b = solutions[key[0]], solutions[key[1]]
            except KeyError as exc:
                raise VolumeError(f"edge {key}: missing solution") from exc
            return build_edge_polyhedron(soup, key, edges[key], sol_a, sol_b)
        t = soup.triangles[key]
        try:
            sols = tuple(solutions[v] for v in t)
        except KeyError as exc:
            raise VolumeError(f"triangle {key}: missing solution") from exc
        return build_triangle_polyhedron(soup, key, sols)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            hulls = list(pool.map(run, jobs))
    else:
        hulls = [run(j) for j in jobs]

    polyhedra = []
    by_element = {}
    degenerate = []
    for job, hull in zip(jobs, hulls):
        if hull.dim < 3:
            degenerate.append(job)
            continue
        by_element[job] = len(polyhedra)
        polyhedra.append(hull)
    return OffsetVolumeSet(polyhedra, by_element, degenerate, skipped)
