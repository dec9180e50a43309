"""Exact geometric kernel: rational predicates, hulls, intersections,
conforming triangulation, conservative AABB trees, and the floating
winding-number field."""

from .aabb import AabbTree, box_of_points, boxes_overlap, q_hi, q_lo
from .hull import ConvexPolyhedron, convex_hull
from .intersect import (
    IntersectionError,
    TriTriResult,
    parity_inside,
    ray_first_hit,
    ray_parity,
    ray_triangle,
    segment_triangle_intersect,
    tri_tri_intersection,
)
from .rational import (
    RPlane,
    centroid,
    orient3d,
    parse_decimal,
    point_in_triangle,
    point_on_segment,
    point_triangle_dist2,
    to_mpq,
    qvec,
    vadd,
    vcross,
    vdot,
    vfloat,
    vlerp,
    vneg,
    vnorm2,
    vscale,
    vsub,
)
from .triangulate import TriangulationError, triangulate_facet
from .winding import WindingField, points_triangles_distance, solid_angle_sum

__all__ = [
    "AabbTree",
    "ConvexPolyhedron",
    "IntersectionError",
    "RPlane",
    "TriTriResult",
    "TriangulationError",
    "WindingField",
    "parity_inside",
    "box_of_points",
    "boxes_overlap",
    "centroid",
    "convex_hull",
    "orient3d",
    "parse_decimal",
    "point_in_triangle",
    "point_on_segment",
    "point_triangle_dist2",
    "points_triangles_distance",
    "q_hi",
    "q_lo",
    "qvec",
    "ray_first_hit",
    "ray_parity",
    "ray_triangle",
    "segment_triangle_intersect",
    "solid_angle_sum",
    "to_mpq",
    "tri_tri_intersection",
    "triangulate_facet",
    "vadd",
    "vcross",
    "vdot",
    "vfloat",
    "vlerp",
    "vneg",
    "vnorm2",
    "vscale",
    "vsub",
]
