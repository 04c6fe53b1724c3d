"""Parameter jitter and syntactic restructuring of base programs."""

from __future__ import annotations

from functools import lru_cache

from ..dsl import schema
from ..dsl.parser import format_number, format_program, parse
from ..dsl.program import Block, DesignProgram
from ..geometry import GeometryError, compile_program
from ..rng import Rng
from ..validate import validate_scene

# relative half-width of the jitter interval; integers move at least one step
DEFAULT_JITTER = {
    "plies": 0.25, "ply_thickness": 0.15, "rotation_deg": 0.25, "fibers_per_ply": 0.2,
    "region_count": 0.2, "randomness": 0.3, "wall_gap": 0.25,
    "tubule_radius": 0.12, "ellipticity": 0.1, "height": 0.15,
    "hole_radius": 0.12, "size_x": 0.1, "size_y": 0.1,
    "size": 0.15, "count_x": 0.0, "count_y": 0.0, "spacing": 0.1,
}
MAX_DRAWS = 8
SEED_BITS = 31


def is_valid(program: DesignProgram) -> bool:
    """Compiles to at least one watertight mesh with no floating parts or intersections."""
    return _valid_text(format_program(program))


@lru_cache(maxsize=2048)
def _valid_text(text: str) -> bool:
    try:
        scene = compile_program(parse(text))
    except GeometryError:
        return False
    report = validate_scene(scene)
    return (report.executed and report.mesh_count > 0 and report.watertight
            and not report.unintended_floating and report.self_intersection_pairs == 0)


def _jitter_value(spec: schema.ParamSpec, value, rel: float, rng: Rng):
    if spec.type is int:
        step = max(1, round(abs(value) * rel)) if rel > 0 else 1
        return spec.clamp(value + rng.randint(-step, step))
    return spec.clamp(round(value * (1.0 + rng.uniform(-rel, rel)), 3))


def jitter_block(block: Block, rng: Rng, jitter: dict) -> Block:
    resolved = {**schema.defaults(block.kind), **block.params}
    params = dict(block.params)
    for name in schema.param_order(block.kind):
        if name in jitter and not name.startswith("offset_"):
            params[name] = _jitter_value(schema.param_spec(block.kind, name), resolved[name],
                                         jitter[name], rng)
    return Block(block.kind, params, list(block.modifiers))


def _restack(blocks: list[Block]) -> None:
    from ..dsl.intent import stack_blocks

    if len(blocks) > 1:
        stack_blocks(blocks)


def diversify(base: DesignProgram, n: int, rng: Rng, jitter: dict | None = None,
              max_draws: int = MAX_DRAWS) -> list[DesignProgram]:
    """``n`` jittered variants of ``base`` with the same block structure.

    Infeasible draws are retried; after ``max_draws`` attempts the variant
    falls back to the base parameters under a fresh seed.
    """
    jitter = DEFAULT_JITTER if jitter is None else jitter
    seen = {format_program(base)}
    out: list[DesignProgram] = []
    for _ in range(n):
        chosen = None
        for _ in range(max_draws):
            blocks = [jitter_block(b, rng, jitter) for b in base.blocks]
            _restack(blocks)
            cand = DesignProgram(base.name, rng.randint(0, (1 << SEED_BITS) - 1), blocks)
            text = format_program(cand)
            if text not in seen and is_valid(cand):
                chosen = cand
                break
        if chosen is None:
            while True:
                chosen = base.copy()
                chosen.seed = rng.randint(0, (1 << SEED_BITS) - 1)
                if format_program(chosen) not in seen:
                    break
        seen.add(format_program(chosen))
        out.append(chosen)
    return out


def restructure(program: DesignProgram, rng: Rng, note: str | None = None) -> str:
    """Equivalent source text: shuffled statements, alias spellings, comments.

    Parsing the result gives back ``program`` exactly.
    """
    lines = []
    if note:
        lines.append(f"# {note}")
    lines += [f"design {program.name} {{", f"  seed {program.seed}"]
    for block in program.blocks:
        if rng.uniform() < 0.5:
            lines.append(f"  # {block.kind} block")
        lines.append(f"  {block.kind} {{")
        names = [k for k in schema.param_order(block.kind) if k in block.params]
        rng.shuffle(names)
        for name in names:
            spec = schema.param_spec(block.kind, name)
            word = rng.choice((name, *spec.aliases)) if spec.aliases else name
            lines.append(f"    {word} {format_number(block.params[name])}")
        for mod in block.modifiers:
            axis = f" {mod.axis}" if mod.axis else ""
            lines.append(f"    {mod.kind}{axis} {format_number(mod.value)}")
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"
