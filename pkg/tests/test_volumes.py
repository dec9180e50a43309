"""Offset polyhedra: membership rules, degeneracy, and union coverage."""

import math

import numpy as np
import pytest
from gmpy2 import mpq

from miteroffset.mesh import TriangleSoup
from miteroffset.vertex_offset import SolverConfig, offset_vertex
from miteroffset.volumes import (
    VolumeError,
    build_edge_polyhedron,
    build_offset_volumes,
    build_triangle_polyhedron,
    build_vertex_polyhedron,
    collect_edges,
)

CUBE_V = [(x, y, z) for x in (0, 1) for y in (0, 1) for z in (0, 1)]
CUBE_F = [
    (0, 1, 3), (0, 3, 2), (4, 6, 7), (4, 7, 5),
    (0, 4, 5), (0, 5, 1), (2, 3, 7), (2, 7, 6),
    (0, 2, 6), (0, 6, 4), (1, 5, 7), (1, 7, 3),
]

CONFIG = SolverConfig()


def cube_setup(d=0.1):
    soup = TriangleSoup(CUBE_V, CUBE_F, "cube")
    targets = {ti: d for ti in range(12)}
    scale = soup.bbox().diagonal
    sols = {vi: offset_vertex(soup, vi, targets, CONFIG, scale)
            for vi in range(8)}
    return soup, sols


def fin_setup(d=0.1):
    # double-sided fin: one triangle seen from both sides
    soup = TriangleSoup(
        [(0, 0, 0), (1, 0, 0), (0, 1, 0)], [(0, 1, 2), (0, 2, 1)], "fin"
    )
    targets = {0: d, 1: d}
    sols = {vi: offset_vertex(soup, vi, targets, CONFIG, math.sqrt(2.0))
            for vi in range(3)}
    return soup, sols


# ---------------------------------------------------------------------------
# edge collection

def test_collect_edges_cube():
    soup = TriangleSoup(CUBE_V, CUBE_F)
    edges = collect_edges(soup)
    assert len(edges) == 18  # 12 cube edges + 6 face diagonals
    assert all(len(ts) == 2 for ts in edges.values())


def test_collect_edges_nonmanifold():
    soup = TriangleSoup(
        [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1), (0, -1, 0)],
        [(0, 1, 2), (0, 1, 3), (0, 1, 4)],
    )
    assert collect_edges(soup)[(0, 1)] == [0, 1, 2]


# ---------------------------------------------------------------------------
# single-element builders

def test_cube_triangle_prism():
    soup, sols = cube_setup()
    ti = 4  # a y=0 face triangle
    hull = build_triangle_polyhedron(
        soup, ti, [sols[v] for v in soup.triangles[ti]]
    )
    assert hull.dim == 3
    assert len(hull.vertices) == 6
    assert len(hull.facets) == 8
    # swept outward: every hull vertex has y in [-0.1, 0]
    ys = [float(v[1]) for v in hull.vertices]
    assert min(ys) >= -0.1 - 1e-12 and max(ys) <= 1e-12


def test_fin_triangle_prism_one_sided():
    soup, sols = fin_setup()
    for ti, lo, hi in ((0, 0.0, 0.1), (1, -0.1, 0.0)):
        hull = build_triangle_polyhedron(
            soup, ti, [sols[v] for v in soup.triangles[ti]]
        )
        assert hull.dim == 3 and len(hull.vertices) == 6
        zs = [float(v[2]) for v in hull.vertices]
        assert min(zs) >= lo - 1e-9 and max(zs) <= hi + 1e-9


def test_cube_edge_wedge():
    soup, sols = cube_setup()
    hull = build_edge_polyhedron(
        soup, (0, 4), [4, 8], sols[0], sols[4]
    )
    assert hull.dim == 3
    assert len(hull.vertices) == 4  # two corners + one miter point each


def test_face_diagonal_edge_is_flat():
    soup, sols = cube_setup()
    hull = build_edge_polyhedron(soup, (0, 3), [0, 1], sols[0], sols[3])
    assert hull.dim == 2


def test_fin_edge_pulls_both_sides():
    soup, sols = fin_setup()
    hull = build_edge_polyhedron(soup, (0, 1), [0, 1], sols[0], sols[1])
    zs = sorted(float(v[2]) for v in hull.vertices)
    assert zs[0] < -0.09 and zs[-1] > 0.09  # offsets from both blocks
    assert hull.dim == 2  # and yet the wedge itself is flat


def test_vertex_polyhedron_segment_when_single():
    soup, sols = cube_setup()
    hull = build_vertex_polyhedron(soup, 0, sols[0])
    assert hull.dim == 1


def test_triangle_polyhedron_requires_group():
    soup, sols = cube_setup()
    with pytest.raises(VolumeError, match="no offset group"):
        build_triangle_polyhedron(soup, 0, [sols[4], sols[4], sols[4]])


# ---------------------------------------------------------------------------
# a saddle-like vertex whose DP yields three groups

def saddle_setup():
    verts = [
        (0, 0, 0), (0, 1, 0), (0, 0, 1), (4, -3, 1),
        (4, -3, 0), (1, 0, 0), (0, 4, -3), (3, 0, -4),
    ]
    tris = [
        (0, 1, 2),  # normal (1, 0, 0)
        (0, 3, 4),  # normal (3, 4, 0) / 5
        (0, 2, 5),  # normal (0, 1, 0)
        (0, 5, 6),  # normal (0, 3, 4) / 5
        (0, 5, 1),  # normal (0, 0, 1)
        (0, 7, 1),  # normal (4, 0, 3) / 5
    ]
    soup = TriangleSoup(verts, tris, "saddle")
    targets = {0: 0.1, 1: 0.1, 2: 0.15, 3: 0.15, 4: 0.18, 5: 0.18}
    return soup, targets


def test_saddle_vertex_three_groups_dim3():
    soup, targets = saddle_setup()
    sol = offset_vertex(soup, 0, targets, CONFIG, 1.0)
    assert sol.K == 3
    hull = build_vertex_polyhedron(soup, 0, sol)
    assert hull.dim == 3
    assert len(hull.vertices) == 4


# ---------------------------------------------------------------------------
# whole-set assembly

def test_build_offset_volumes_cube():
    soup, sols = cube_setup()
    vols = build_offset_volumes(soup, sols)
    # 12 edge wedges + 12 face prisms survive; 8 vertex segments and
    # 6 flat diagonal wedges do not
    assert len(vols) == 24
    kinds = [p.source[0] for p in vols.polyhedra]
    assert kinds.count("edge") == 12 and kinds.count("triangle") == 12
    assert len(vols.degenerate) == 14
    assert vols.skipped_triangles == []
    for key, pi in vols.by_element.items():
        assert vols.polyhedra[pi].source == key


def test_degenerate_triangle_skipped_with_warning():
    soup = TriangleSoup(
        [(0, 0, 0), (1, 0, 0), (0, 1, 0), (2, 0, 0)],
        [(0, 1, 2), (0, 1, 3)],
    )
    targets = {0: 0.1, 1: 0.1}
    sols = {vi: offset_vertex(soup, vi, targets, CONFIG, 1.0)
            for vi in range(3)}
    with pytest.warns(UserWarning, match="degenerate"):
        vols = build_offset_volumes(soup, sols)
    assert vols.skipped_triangles == [1]
    assert all(p.source != ("triangle", 1) for p in vols.polyhedra)


def test_threaded_assembly_is_deterministic():
    soup, sols = cube_setup()
    a = build_offset_volumes(soup, sols, threads=1)
    b = build_offset_volumes(soup, sols, threads=4)
    assert [p.source for p in a.polyhedra] == [p.source for p in b.polyhedra]
    for pa, pb in zip(a.polyhedra, b.polyhedra):
        assert pa.vertices == pb.vertices
        assert pa.facets == pb.facets
    assert a.degenerate == b.degenerate


# ---------------------------------------------------------------------------
# union invariants

def as_mpq(p):
    return (mpq(float(p[0])), mpq(float(p[1])), mpq(float(p[2])))


def test_every_offset_point_appears_in_a_polyhedron():
    for soup, sols in (cube_setup(), fin_setup()):
        vols = build_offset_volumes(soup, sols)
        for sol in sols.values():
            for p in sol.points:
                q = as_mpq(p)
                assert any(poly.contains(q) for poly in vols.polyhedra)


def test_union_covers_offset_shell_samples():
    soup, sols = cube_setup(d=0.1)
    vols = build_offset_volumes(soup, sols)
    rng = np.random.default_rng(41)
    V = soup.vertices_float()
    hit_polys = set()
    for _ in range(1000):
        ti = int(rng.integers(0, 12))
        a, b, c = (V[i] for i in soup.triangles[ti])
        r1, r2 = rng.random(), rng.random()
        s = math.sqrt(r1)
        x = (1 - s) * a + s * (1 - r2) * b + s * r2 * c
        n = np.cross(b - a, c - a)
        n /= np.linalg.norm(n)
        u = rng.random()
        q = as_mpq(x + n * (u * 0.1 * (1 - 1e-3)))
        owners = [i for i, poly in enumerate(vols.polyhedra)
                  if poly.contains(q)]
        assert owners, q
        hit_polys.update(owners)
    assert len(hit_polys) >= 12  # at least every face prism was exercised
