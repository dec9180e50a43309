"""Per-vertex offset points.

Each vertex must sit at prescribed point-to-plane distances from the planes
of its neighborhood triangles. Near-parallel planes are clustered first;
the remaining constraint set is solved by least squares, and when one point
cannot satisfy every plane within tolerance, a bitmask dynamic program
splits the planes into the cheapest feasible groups, one offset point per
group.

The least-squares path is deliberately plain scalar arithmetic in a fixed
accumulation order (ascending plane index): dynamic-program energies must
be reproducible bit for bit by an independent reference that sums the same
way.
"""

import math

import numpy as np

from .mesh import MeshError, local_neighborhood

MERGE_LADDER_DEG = (1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 90.0)


class SolverError(Exception):
    pass


class SolverConfig:
    """Knobs for the per-vertex solve.

    lambda_reg : anchor regularization weight, absolute
    alpha      : plane-distance tolerance, relative to the bbox diagonal
    merge_deg  : starting cluster angle; doubled as needed up to the ladder end
    max_groups : largest clustered plane count the dynamic program accepts
    """

    __slots__ = ("lambda_reg", "alpha", "merge_deg", "max_groups")

    def __init__(self, lambda_reg=1e-9, alpha=1e-6, merge_deg=1.0,
                 max_groups=12):
        if lambda_reg <= 0 or alpha <= 0:
            raise SolverError("lambda_reg and alpha must be positive")
        self.lambda_reg = lambda_reg
        self.alpha = alpha
        self.merge_deg = merge_deg
        self.max_groups = max_groups


class PlaneGroup:
    """One clustered constraint plane.

    normal is unit length; offset is the signed target distance measured
    from base (the area-weighted plane position), so the constraint reads
    normal . O = base + offset.
    """

    __slots__ = ("normal", "base", "offset", "triangle_ids", "area")

    def __init__(self, normal, base, offset, triangle_ids, area):
        self.normal = normal
        self.base = base
        self.offset = offset
        self.triangle_ids = tuple(triangle_ids)
        self.area = area

    @property
    def target(self):
        return self.base + self.offset


class OffsetSolution:
    """DP result for one vertex: a partition of the clustered planes into
    feasible groups and one offset point per group."""

    __slots__ = ("vertex", "plane_groups", "partition", "points", "energies",
                 "total_energy", "n_raw")

    def __init__(self, vertex, plane_groups, partition, points, energies,
                 total_energy, n_raw):
        self.vertex = vertex
        self.plane_groups = plane_groups
        self.partition = partition
        self.points = points
        self.energies = energies
        self.total_energy = total_energy
        self.n_raw = n_raw

    @property
    def K(self):
        return len(self.partition)

    def block_triangles(self, k):
        """Input triangle ids whose planes went into partition block k."""
        ids = []
        mask = self.partition[k]
        j = 0
        while mask:
            if mask & 1:
                ids.extend(self.plane_groups[j].triangle_ids)
            mask >>= 1
            j += 1
        return frozenset(ids)

    def points_for_triangle(self, ti):
        """Offset points whose group contains triangle ti."""
        return [
            self.points[k]
            for k in range(len(self.partition))
            if ti in self.block_triangles(k)
        ]


def _triangle_area(soup, ti):
    a, b, c = (soup.vertices_float()[i] for i in soup.triangles[ti])
    return 0.5 * float(np.linalg.norm(np.cross(b - a, c - a)))


def cluster_planes(soup, triangle_ids, targets, threshold_deg):
    """Greedily merge near-parallel constraint planes.

    Two clusters merge only when every cross pair of member normals stays
    within threshold_deg. Representatives are area-weighted: normal averaged
    and renormalized, plane position and offset averaged.
    """
    items = []
    for ti in triangle_ids:
        nx, ny, nz, d = soup.plane(ti).unit()
        items.append((ti, (nx, ny, nz), -d, float(targets[ti]),
                      _triangle_area(soup, ti)))
    cos_thr = math.cos(math.radians(threshold_deg))
    clusters = [[i] for i in range(len(items))]
    merged = True
    while merged:
        merged = False
        for a in range(len(clusters)):
            for b in range(len(clusters) - 1, a, -1):
                ok = all(
                    items[i][1][0] * items[j][1][0]
                    + items[i][1][1] * items[j][1][1]
                    + items[i][1][2] * items[j][1][2]
                    >= cos_thr
                    for i in clusters[a]
                    for j in clusters[b]
                )
                if ok:
                    clusters[a].extend(clusters[b])
                    del clusters[b]
                    merged = True
    groups = []
    for members in clusters:
        w = sum(items[i][4] for i in members)
        if w == 0.0:
            w = float(len(members))
            weights = [1.0] * len(members)
        else:
            weights = [items[i][4] for i in members]
        nx = sum(wt * items[i][1][0] for wt, i in zip(weights, members))
        ny = sum(wt * items[i][1][1] for wt, i in zip(weights, members))
        nz = sum(wt * items[i][1][2] for wt, i in zip(weights, members))
        nrm = math.sqrt(nx * nx + ny * ny + nz * nz)
        if nrm == 0.0:
            raise SolverError("cluster normals cancel; threshold too loose")
        base = sum(wt * items[i][2] for wt, i in zip(weights, members)) / w
        off = sum(wt * items[i][3] for wt, i in zip(weights, members)) / w
        groups.append(PlaneGroup(
            (nx / nrm, ny / nrm, nz / nrm),
            base, off,
            sorted(items[i][0] for i in members),
            w,
        ))
    groups.sort(key=lambda g: g.triangle_ids)
    return groups


def cluster_to_limit(soup, triangle_ids, targets, config):
    """Cluster at the configured angle, loosening along the ladder until
    the group count fits the dynamic program."""
    ladder = [t for t in MERGE_LADDER_DEG if t >= config.merge_deg]
    if not ladder or ladder[0] != config.merge_deg:
        ladder.insert(0, config.merge_deg)
    groups = None
    for thr in ladder:
        groups = cluster_planes(soup, triangle_ids, targets, thr)
        if len(groups) <= config.max_groups:
            return groups
    raise SolverError(
        f"{len(groups)} plane groups remain at {ladder[-1]} degrees,"
        f" limit is {config.max_groups}"
    )


def solve_single(normals, targets, anchor, lam):
    """Least-squares point for one constraint group.

    Minimizes lam*|O - anchor|^2 + sum_j (n_j . O - t_j)^2. The problem is
    solved in the anchor frame (displacement w = O - anchor) by Cholesky on
    the normal equations; the lam*I term keeps the matrix positive definite,
    and the shift keeps every residual at displacement scale. Returns
    (point, energy, max_violation). Accumulation runs in list order; callers
    that need reproducible energies must pass planes sorted by index.
    """
    ax, ay, az = anchor
    a00 = a11 = a22 = lam
    a01 = a02 = a12 = 0.0
    b0 = b1 = b2 = 0.0
    for n, t in zip(normals, targets):
        nx, ny, nz = n
        r = t - (nx * ax + ny * ay + nz * az)
        a00 += nx * nx
        a01 += nx * ny
        a02 += nx * nz
        a11 += ny * ny
        a12 += ny * nz
        a22 += nz * nz
        b0 += r * nx
        b1 += r * ny
        b2 += r * nz
    d0 = a00
    l10 = a01 / d0
    l20 = a02 / d0
    d1 = a11 - l10 * a01
    u12 = a12 - l20 * a01
    l21 = u12 / d1
    d2 = a22 - l20 * a02 - l21 * u12
    if d0 <= 0.0 or d1 <= 0.0 or d2 <= 0.0:
        raise SolverError("singular normal equations despite regularization")
    y0 = b0
    y1 = b1 - l10 * y0
    y2 = b2 - l20 * y0 - l21 * y1
    wz = y2 / d2
    wy = y1 / d1 - l21 * wz
    wx = y0 / d0 - l10 * wy - l20 * wz
    energy = lam * (wx * wx + wy * wy + wz * wz)
    viol = 0.0
    for n, t in zip(normals, targets):
        nx, ny, nz = n
        e = nx * wx + ny * wy + nz * wz - (t - (nx * ax + ny * ay + nz * az))
        energy += e * e
        if abs(e) > viol:
            viol = abs(e)
    return (ax + wx, ay + wy, az + wz), energy, viol


def solve_vertex(vertex, anchor, groups, config, scale):
    """Partition the clustered planes into feasible groups of minimal total
    energy and return one offset point per group.

    A subset is solved directly when its least-squares point satisfies every
    member plane within alpha * scale; otherwise the best split is chosen
    over submasks containing the subset's lowest bit, ties going to the
    smallest submask.
    """
    n = len(groups)
    if n == 0:
        raise SolverError(f"vertex {vertex}: no constraint planes")
    if n > config.max_groups:
        raise SolverError(f"vertex {vertex}: {n} groups exceed the limit")
    normals = [g.normal for g in groups]
    targets = [g.target for g in groups]
    lam = config.lambda_reg
    alpha_abs = config.alpha * scale
    full = (1 << n) - 1

    pt, e, viol = solve_single(normals, targets, anchor, lam)
    if viol <= alpha_abs:
        return OffsetSolution(
            vertex, tuple(groups), (full,), (pt,), (e,), math.fsum((e,)),
            None,
        )

    members = [()] * (full + 1)
    for m in range(1, full + 1):
        low = (m & -m).bit_length() - 1
        members[m] = ((low,) + members[m & (m - 1)])

    energy = [0.0] * (full + 1)
    point = [None] * (full + 1)
    feasible = [False] * (full + 1)
    split = [0] * (full + 1)

    for m in range(1, full + 1):
        idx = members[m]
        pt, e, viol = solve_single(
            [normals[i] for i in idx], [targets[i] for i in idx],
            anchor, lam,
        )
        if viol <= alpha_abs:
            energy[m] = e
            point[m] = pt
            feasible[m] = True
            continue
        if len(idx) == 1:
            raise SolverError(
                f"vertex {vertex}: single plane infeasible (violation"
                f" {viol:g} > {alpha_abs:g})"
            )
        # best split: submasks holding the lowest bit, smallest mask on ties
        low = m & -m
        rest = m ^ low
        best = math.inf
        best_sub = 0
        s = rest
        while True:
            s = (s - 1) & rest
            sub = low | s
            e2 = energy[sub] + energy[rest ^ s]
            if e2 <= best:
                best = e2
                best_sub = sub
            if s == 0:
                break
        energy[m] = best
        split[m] = best_sub

    blocks = []
    stack = [full]
    while stack:
        m = stack.pop()
        if feasible[m]:
            blocks.append(m)
        else:
            stack.append(split[m])
            stack.append(m ^ split[m])
    blocks.sort(key=lambda m: m & -m)

    return OffsetSolution(
        vertex,
        tuple(groups),
        tuple(blocks),
        tuple(point[m] for m in blocks),
        tuple(energy[m] for m in blocks),
        math.fsum(energy[m] for m in blocks),
        None,
    )


def offset_vertex(soup, vi, targets, config, scale, epsilon=None):
    """Neighborhood, clustering, and DP solve for one vertex."""
    if epsilon is None:
        epsilon = 1e-5 * scale
    nb = local_neighborhood(soup, vi, epsilon)
    groups = cluster_to_limit(soup, nb.triangles, targets, config)
    anchor = tuple(float(c) for c in soup.vertices[vi])
    sol = solve_vertex(vi, anchor, groups, config, scale)
    sol.n_raw = len(nb.triangles)
    return sol
