"""Per-vertex offset solve: clustering, least squares, and the partition DP."""

import math
import time

import numpy as np
import pytest

from miteroffset.mesh import TriangleSoup
from miteroffset.vertex_offset import (
    MERGE_LADDER_DEG,
    PlaneGroup,
    SolverConfig,
    SolverError,
    cluster_planes,
    cluster_to_limit,
    offset_vertex,
    solve_single,
    solve_vertex,
)
from oracles import oracle_partition

CUBE_V = [(x, y, z) for x in (0, 1) for y in (0, 1) for z in (0, 1)]
CUBE_F = [
    (0, 1, 3), (0, 3, 2), (4, 6, 7), (4, 7, 5),
    (0, 4, 5), (0, 5, 1), (2, 3, 7), (2, 7, 6),
    (0, 2, 6), (0, 6, 4), (1, 5, 7), (1, 7, 3),
]


def cube_soup(scale=1):
    verts = [tuple(c * scale for c in v) for v in CUBE_V]
    return TriangleSoup(verts, CUBE_F, "cube")


def plain_groups(normals, d):
    """One singleton group per plane through the origin at distance d."""
    return [
        PlaneGroup(tuple(n), 0.0, d, (i,), 1.0) for i, n in enumerate(normals)
    ]


CONFIG = SolverConfig()


# ---------------------------------------------------------------------------
# least-squares solve

def test_solve_single_one_plane():
    pt, e, viol = solve_single([(0.0, 0.0, 1.0)], [0.25], (0.3, -0.2, 0.0),
                               1e-9)
    assert viol < 1e-9  # the anchor pull leaves a t*lam/(1+lam) residual
    assert abs(pt[0] - 0.3) < 1e-12 and abs(pt[1] + 0.2) < 1e-12
    assert abs(pt[2] - 0.25) < 1e-9
    assert e < 1e-9


def test_solve_single_three_orthogonal():
    normals = [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)]
    pt, e, viol = solve_single(normals, [0.1, 0.1, 0.1], (0.0, 0.0, 0.0),
                               1e-9)
    assert viol < 1e-9
    assert max(abs(c - 0.1) for c in pt) < 1e-9


def test_solve_single_regularizer_breaks_underdetermination():
    # one plane: the anchor pull selects the closest point on the plane
    pt, _, _ = solve_single([(1.0, 0.0, 0.0)], [1.0], (0.0, 5.0, 7.0), 1e-9)
    assert abs(pt[0] - 1.0) < 2e-9
    assert abs(pt[1] - 5.0) < 1e-12 and abs(pt[2] - 7.0) < 1e-12


# ---------------------------------------------------------------------------
# clustering

def tilted_plane_soup(tilts_deg, scale=1.0):
    """One triangle per tilt, rotated about the x axis from the z=0 plane."""
    verts = []
    tris = []
    for t in tilts_deg:
        r = math.radians(t)
        b = len(verts)
        verts.extend([
            (0, 0, 0),
            (scale, 0, 0),
            (0, scale * math.cos(r), scale * math.sin(r)),
        ])
        tris.append((b, b + 1, b + 2))
    return TriangleSoup(verts, tris)


def test_cluster_cube_corner_three_groups():
    soup = cube_soup()
    targets = {ti: 0.1 for ti in range(12)}
    groups = cluster_planes(soup, soup.vertex_star(0), targets, 1.0)
    assert len(groups) == 3
    assert all(len(g.triangle_ids) == 2 for g in groups)
    for g in groups:
        assert abs(math.hypot(*g.normal) - 1.0) < 1e-15
        assert g.offset == 0.1
        assert abs(g.base) < 1e-15  # faces through the corner
        assert abs(g.area - 1.0) < 1e-12


def test_cluster_threshold_and_weighting():
    soup = tilted_plane_soup([0.0, 0.5])
    targets = {0: 0.1, 1: 0.1}
    assert len(cluster_planes(soup, [0, 1], targets, 0.1)) == 2
    merged = cluster_planes(soup, [0, 1], targets, 1.0)
    assert len(merged) == 1 and merged[0].triangle_ids == (0, 1)

    # quadruple the second triangle's area: representative leans its way
    soup2 = TriangleSoup(
        list(soup.vertices[:3])
        + [(0, 0, 0), (2, 0, 0),
           (0, 2 * math.cos(math.radians(0.5)),
            2 * math.sin(math.radians(0.5)))],
        [(0, 1, 2), (3, 4, 5)],
    )
    (g,) = cluster_planes(soup2, [0, 1], targets, 1.0)
    n0 = soup2.plane(0).unit()[:3]
    n1 = soup2.plane(1).unit()[:3]
    dot0 = sum(a * b for a, b in zip(g.normal, n0))
    dot1 = sum(a * b for a, b in zip(g.normal, n1))
    assert dot1 > dot0


def test_cluster_complete_linkage():
    # chain 0, 10, 20, 30, 40 degrees: at 16 degrees the far pair may not
    # merge through the middle
    soup = tilted_plane_soup([0, 10, 20, 30, 40])
    targets = {ti: 0.1 for ti in range(5)}
    groups = cluster_planes(soup, range(5), targets, 16.0)
    assert len(groups) == 3
    for g in groups:
        ids = g.triangle_ids
        assert max(ids) - min(ids) <= 1  # only adjacent tilts merged


def test_cluster_ladder_loosens_until_fit():
    soup = tilted_plane_soup([0, 10, 20, 30, 40])
    targets = {ti: 0.1 for ti in range(5)}
    cfg = SolverConfig(merge_deg=1.0, max_groups=3)
    groups = cluster_to_limit(soup, range(5), targets, cfg)
    assert len(groups) <= 3


def test_cluster_ladder_exhausts():
    soup = tilted_plane_soup([0, 180.0])  # opposite normals never merge
    targets = {0: 0.1, 1: 0.1}
    cfg = SolverConfig(merge_deg=1.0, max_groups=1)
    with pytest.raises(SolverError, match="90"):
        cluster_to_limit(soup, [0, 1], targets, cfg)
    assert MERGE_LADDER_DEG[-1] == 90.0


# ---------------------------------------------------------------------------
# partition DP

def test_corner_stays_single_point():
    groups = plain_groups(
        [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)], 0.1
    )
    sol = solve_vertex(0, (0.0, 0.0, 0.0), groups, CONFIG, 1.0)
    assert sol.K == 1
    assert sol.partition == (0b111,)
    assert max(abs(c - 0.1) for c in sol.points[0]) < 1e-9


def test_fin_splits_into_two():
    groups = plain_groups([(0.0, 0.0, 1.0), (0.0, 0.0, -1.0)], 0.1)
    sol = solve_vertex(0, (0.0, 0.0, 0.0), groups, CONFIG, 1.0)
    assert sol.K == 2
    zs = sorted(p[2] for p in sol.points)
    assert abs(zs[0] + 0.1) < 1e-9 and abs(zs[1] - 0.1) < 1e-9
    assert sol.block_triangles(0) | sol.block_triangles(1) == {0, 1}


def test_near_parallel_split_respects_alpha():
    # identical normals, target gap just below / above 2 * alpha * scale
    for gap, want_k in ((1.8e-6, 1), (2.2e-6, 2)):
        groups = [
            PlaneGroup((1.0, 0.0, 0.0), 0.0, 0.1, (0,), 1.0),
            PlaneGroup((1.0, 0.0, 0.0), 0.0, 0.1 + gap, (1,), 1.0),
        ]
        sol = solve_vertex(0, (0.0, 0.0, 0.0), groups, CONFIG, 1.0)
        assert sol.K == want_k, gap


def test_partition_invariants_random():
    rng = np.random.default_rng(3100)
    for _ in range(200):
        normals, targets = random_instance(rng, nmax=6)
        groups = plain_groups(normals, 0.0)
        for g, t in zip(groups, targets):
            g.offset = t
        sol = solve_vertex(0, (0.0, 0.0, 0.0), groups, CONFIG, 1.0)
        union = 0
        for m in sol.partition:
            assert m > 0 and union & m == 0
            union |= m
        assert union == (1 << len(groups)) - 1
        assert sol.partition == tuple(
            sorted(sol.partition, key=lambda m: m & -m)
        )
        assert sol.total_energy == math.fsum(sol.energies)
        # every reported block satisfies its planes within tolerance
        alpha_abs = CONFIG.alpha * 1.0
        for m, pt in zip(sol.partition, sol.points):
            for j in range(len(groups)):
                if m >> j & 1:
                    n = groups[j].normal
                    r = abs(sum(a * b for a, b in zip(n, pt))
                            - groups[j].target)
                    assert r <= alpha_abs * (1 + 1e-12)
        # a split partition implies the full set was infeasible
        if sol.K > 1:
            _, _, viol = solve_single(
                normals, targets, (0.0, 0.0, 0.0), CONFIG.lambda_reg
            )
            assert viol > alpha_abs


# ---------------------------------------------------------------------------
# solver vs. exhaustive reference

def random_instance(rng, nmax=6):
    """Well-separated base normals with exactly opposed partners.

    Base normals are pairwise 60 to 88 degrees apart; contradictions come
    only from exact negations sharing the base's target, so every infeasible
    subset is infeasible by a wide margin.
    """
    lo, hi = math.cos(math.radians(88.0)), math.cos(math.radians(60.0))
    n_base = int(rng.integers(2, 5))
    normals = []
    tries = 0
    while len(normals) < n_base and tries < 4000:
        tries += 1
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        v = tuple(float(c) for c in v)
        if all(lo <= sum(a * b for a, b in zip(v, u)) <= hi
               for u in normals):
            normals.append(v)
    k_anti = int(rng.integers(0, min(3, nmax - len(normals) + 1)))
    if k_anti:
        for bi in rng.choice(len(normals), size=k_anti, replace=False):
            u = normals[int(bi)]
            normals.append((-u[0], -u[1], -u[2]))
    d = float(rng.uniform(0.05, 0.2))
    return normals, [d] * len(normals)


def test_dp_matches_exhaustive_partitions():
    rng = np.random.default_rng(3000)
    alpha_abs = CONFIG.alpha * 1.0
    split_seen = 0
    for _ in range(100):
        normals, targets = random_instance(rng, nmax=6)
        groups = plain_groups(normals, 0.0)
        for g, t in zip(groups, targets):
            g.offset = t
        sol = solve_vertex(0, (0.0, 0.0, 0.0), groups, CONFIG, 1.0)
        best, _ = oracle_partition(
            normals, targets, (0.0, 0.0, 0.0), CONFIG.lambda_reg, alpha_abs
        )
        assert sol.total_energy == best
        split_seen += sol.K > 1
    assert split_seen > 10  # the family must actually exercise splits


# ---------------------------------------------------------------------------
# end to end on meshes

def test_cube_corner_end_to_end():
    soup = cube_soup()
    targets = {ti: 0.1 for ti in range(12)}
    sol = offset_vertex(soup, 0, targets, CONFIG, math.sqrt(3.0))
    assert sol.K == 1 and sol.n_raw == 6
    assert max(abs(c + 0.1) for c in sol.points[0]) < 1e-9
    sol7 = offset_vertex(soup, 7, targets, CONFIG, math.sqrt(3.0))
    assert max(abs(c - 1.1) for c in sol7.points[0]) < 1e-9


def test_offset_scale_covariance_exact():
    # scaling by a power of two scales every float op exactly, so the whole
    # solve must commute with it bit for bit
    s = 2.0 ** -20
    targets1 = {ti: 0.1 for ti in range(12)}
    targets_s = {ti: 0.1 * s for ti in range(12)}
    big = cube_soup()
    small = cube_soup(scale=mpq_pow2(-20))
    for vi in range(8):
        a = offset_vertex(big, vi, targets1, CONFIG, math.sqrt(3.0))
        b = offset_vertex(small, vi, targets_s, CONFIG, math.sqrt(3.0) * s)
        assert a.partition == b.partition
        for pa, pb in zip(a.points, b.points):
            assert tuple(c * s for c in pa) == pb


def mpq_pow2(k):
    from gmpy2 import mpq
    return mpq(2) ** k


def test_twelve_groups_within_time_budget():
    # icosahedron directions: six antipodal pairs force deep splitting, so
    # the dynamic program visits all 4095 subsets
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    nrm = math.sqrt(1.0 + phi * phi)
    normals = []
    for a, b in ((1.0, phi), (-1.0, phi), (1.0, -phi), (-1.0, -phi)):
        normals.append((a / nrm, b / nrm, 0.0))
        normals.append((0.0, a / nrm, b / nrm))
        normals.append((b / nrm, 0.0, a / nrm))
    groups = plain_groups(normals, 0.1)
    t0 = time.perf_counter()
    sol = solve_vertex(0, (0.0, 0.0, 0.0), groups, CONFIG, 1.0)
    dt = time.perf_counter() - t0
    assert sol.K >= 2
    assert dt < 0.1, f"12-group solve took {dt * 1e3:.1f} ms"


def test_group_count_limit_enforced():
    groups = plain_groups([(1.0, 0.0, 0.0)] * 13, 0.1)
    with pytest.raises(SolverError, match="exceed"):
        solve_vertex(0, (0.0, 0.0, 0.0), groups, CONFIG, 1.0)
