"""miteroffset: feature-preserving mitered offset surfaces for triangle
soups, built on an exact rational kernel.

The public surface:

- mesh I/O and neighborhoods: `miteroffset.mesh`
- per-vertex offset points:   `miteroffset.vertex_offset`
- local offset polyhedra:     `miteroffset.volumes`
- surface extraction:         `miteroffset.extraction`
- welding and cleanup:        `miteroffset.topology`
- quality metrics:            `miteroffset.metrics`
- one-call driver:            `miteroffset.pipeline.offset_mesh`
"""

__version__ = "0.1.0"
