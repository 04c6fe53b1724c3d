"""Program to scene compilation."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ..dsl import schema
from ..dsl.parser import format_program
from ..dsl.program import Block, DesignProgram
from ..rng import Rng
from .generators import GENERATORS
from .mesh import GeometryError, Mesh


@dataclass
class Scene:
    meshes: list[Mesh]
    provenance: dict = field(default_factory=dict)
    blocks: list[dict] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def triangle_count(self) -> int:
        return sum(len(m.triangles()) for m in self.meshes)

    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.min([m.vertices.min(axis=0) for m in self.meshes], axis=0)
        hi = np.max([m.vertices.max(axis=0) for m in self.meshes], axis=0)
        return lo, hi


def resolve_params(block: Block) -> dict:
    """Schema defaults overlaid with explicit params and folded modifiers."""
    p = {**schema.defaults(block.kind), **block.params}
    smooth = block.modifier("smooth")
    default_levels = schema.MODIFIER_DEFAULTS["smooth"] if block.kind == "cellular" else 0
    p["smooth_levels"] = int(smooth.value) if smooth else default_levels
    sandwich = block.modifier("sandwich")
    p["sandwich_thickness"] = float(sandwich.value) if sandwich else 0.0
    noise = block.modifier("noise")
    p["noise_deg"] = float(noise.value) if noise else 0.0
    grad = block.modifier("gradient")
    p["gradient"] = (grad.axis, float(grad.value)) if grad else None
    return p


def compile_block(block: Block, seed: int, index: int) -> tuple[list[Mesh], dict]:
    p = resolve_params(block)
    rng = Rng(seed).derive(index)
    try:
        meshes = GENERATORS[block.kind](p, rng)
    except GeometryError as err:
        err.context.setdefault("block_index", index)
        err.context.setdefault("kind", block.kind)
        raise
    offset = np.array([p["offset_x"], p["offset_y"], p["offset_z"]], dtype=float)
    placed = []
    for m in meshes:
        meta = dict(m.meta)
        meta["block_index"] = index
        out = Mesh(m.vertices + offset if offset.any() else m.vertices, m.faces, block.kind, meta)
        placed.append(out)
    info = {"index": index, "kind": block.kind, "params": _plain(p), "mesh_count": len(placed)}
    if block.kind == "helical" and placed:
        info["angles_deg"] = [m.meta["angle_deg"] for m in placed]
    return placed, info


def _plain(p: dict) -> dict:
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in p.items()}


@lru_cache(maxsize=64)
def _compile_cached(text: str) -> Scene:
    from ..dsl.parser import parse

    return _compile(parse(text))


def _compile(program: DesignProgram) -> Scene:
    meshes, blocks, warnings = [], [], []
    for i, block in enumerate(program.blocks):
        placed, info = compile_block(block, program.seed, i)
        for m in placed:
            warnings.extend(m.meta.pop("warnings", []))
        meshes.extend(placed)
        blocks.append(info)
    if not meshes:
        raise GeometryError("EmptyScene", "program produced no meshes")
    return Scene(meshes, {"name": program.name, "seed": program.seed}, blocks, warnings)


def compile_program(program: DesignProgram) -> Scene:
    """Build every block with its own seeded stream and place it in the scene.

    Compiled scenes are cached on the canonical program text; callers get a
    shallow copy so list mutations never leak between calls.
    """
    scene = _compile_cached(format_program(program))
    return Scene(list(scene.meshes), dict(scene.provenance),
                 [dict(b) for b in scene.blocks], list(scene.warnings))
