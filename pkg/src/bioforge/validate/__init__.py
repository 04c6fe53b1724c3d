"""Headless validation, rendering and mesh export."""

from .checks import (ValidationReport, connected_components, count_self_intersections,
                     is_watertight, validate_scene)
from .render import Camera, RenderImage, read_ppm, render_scene
from .stl import export_stl, read_stl

__all__ = [
    "Camera", "RenderImage", "ValidationReport", "connected_components",
    "count_self_intersections", "export_stl", "is_watertight", "read_ppm", "read_stl",
    "render_scene", "validate_scene",
]
