"""Procedural geometry kernel."""

from .compiler import Scene, compile_program, resolve_params
from .generators import (build_cellular, build_helical, build_primitive, build_slab,
                         build_tubular, fit_slab_block, fit_tubular_block, ply_angles)
from .mesh import GeometryError, Mesh, box, mesh_metrics, signed_volume
from .profile import extrude_profile, loft_profile
from .subdivision import catmull_clark
from .voronoi import voronoi_partition

__all__ = [
    "GeometryError", "Mesh", "Scene", "box", "build_cellular", "build_helical",
    "build_primitive", "build_slab", "build_tubular", "catmull_clark", "compile_program",
    "extrude_profile", "fit_slab_block", "fit_tubular_block", "loft_profile", "mesh_metrics", "ply_angles",
    "resolve_params", "signed_volume", "voronoi_partition",
]
