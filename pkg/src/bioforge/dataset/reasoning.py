"""Step-by-step annotations that end with the complete program."""

from __future__ import annotations

from ..dsl import schema
from ..dsl.parser import format_number, format_program, parse
from ..dsl.program import Block, DesignProgram
from ..remote import extract_script


def _fmt(v) -> str:
    return format_number(v)


def _block_sentence(block: Block) -> str:
    p = {**schema.defaults(block.kind), **block.params}
    if block.kind == "helical":
        shape = "rectangular" if p["fiber_profile"] == 1 else "cylindrical"
        return (f"Stack {_fmt(p['plies'])} plies, each {_fmt(p['ply_thickness'])} mm thick and "
                f"holding {_fmt(p['fibers_per_ply'])} {shape} fibers, and turn every ply by "
                f"{_fmt(p['rotation_deg'])} degrees relative to the one below.")
    if block.kind == "cellular":
        return (f"Split a {_fmt(p['size_x'])} x {_fmt(p['size_y'])} x {_fmt(p['size_z'])} mm box "
                f"into {_fmt(p['region_count'])} Voronoi cells with seed randomness "
                f"{_fmt(p['randomness'])}, shrinking each cell to leave a {_fmt(p['wall_gap'])} mm gap.")
    if block.kind == "tubular":
        return (f"Drill {_fmt(p['tubule_count'])} tubules of radius {_fmt(p['tubule_radius'])} mm "
                f"on a {_fmt(p['spacing'])} mm pitch through a {_fmt(p['size_x'])} x "
                f"{_fmt(p['size_y'])} x {_fmt(p['height'])} mm matrix, keeping a "
                f"{_fmt(p['cortical_thickness'])} mm solid cortex around them.")
    if block.kind == "slab":
        return (f"Lay down a {_fmt(p['size_x'])} x {_fmt(p['size_y'])} mm plate "
                f"{_fmt(p['height'])} mm thick and cut {_fmt(p['hole_count'])} holes of radius "
                f"{_fmt(p['hole_radius'])} mm through it.")
    sides = int(p["sides"])
    shapes = "boxes" if sides == 0 else f"{sides}-sided prisms"
    return (f"Place a {_fmt(p['count_x'])} x {_fmt(p['count_y'])} grid of {shapes}, "
            f"{_fmt(p['size'])} mm across and {_fmt(p['height'])} mm tall, "
            f"{_fmt(p['spacing'])} mm apart.")


_MODIFIER_SENTENCES = {
    "noise": "Perturb each ply angle by up to {v} degrees so the twist is irregular.",
    "sandwich": "Close the foam between two dense face sheets {v} mm thick.",
    "smooth": "Round the solids with {v} levels of Catmull-Clark subdivision.",
    "gradient": "Grade the tubule radius along {axis} by a factor of {v} end to end.",
}


def embed_reasoning(program: DesignProgram, text: str | None = None) -> str:
    """Narrated construction of ``program`` followed by the full source.

    ``text`` is the source placed at the end (canonical formatting by
    default); it must parse to ``program``.
    """
    source = text if text is not None else format_program(program)
    steps = [f"Open a design named {program.name} with seed {program.seed} so every random "
             "choice is reproducible."]
    fragments: list[list[str]] = [[f"seed {program.seed}"]]
    for block in program.blocks:
        body = [f"{k} {format_number(block.params[k])}"
                for k in schema.param_order(block.kind) if k in block.params]
        steps.append(_block_sentence(block))
        fragments.append([f"{block.kind} {{", *("  " + b for b in body), "}"])
        for mod in block.modifiers:
            steps.append(_MODIFIER_SENTENCES[mod.kind].format(v=format_number(mod.value),
                                                                axis=mod.axis))
            axis = f" {mod.axis}" if mod.axis else ""
            fragments.append([f"{mod.kind}{axis} {format_number(mod.value)}"])
    out = []
    for i, (step, frag) in enumerate(zip(steps, fragments), 1):
        out.append(f"Step {i}. {step}")
        out.extend("    " + line for line in frag)
        out.append("")
    out.append("Putting the pieces together gives the complete script:")
    out.append("```bgs")
    out.append(source.rstrip("\n"))
    out.append("```")
    return "\n".join(out) + "\n"


def strip_reasoning(text: str) -> str:
    """Program source embedded in an annotated response."""
    return extract_script(text)


def recover_program(text: str) -> DesignProgram:
    return parse(strip_reasoning(text))
