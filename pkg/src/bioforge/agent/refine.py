"""Apply critic suggestions to a program."""

from __future__ import annotations

from ..dsl import schema
from ..dsl.intent import make_block, stack_blocks
from ..dsl.program import Block, DesignProgram, Modifier

# suggestion names that live on modifiers rather than parameters
MODIFIER_PARAMS = {
    "sandwich_thickness": "sandwich",
    "smooth_levels": "smooth",
    "noise_deg": "noise",
    "gradient": "gradient",
}


def _scale_modifier(block: Block, kind: str, factor: float) -> bool:
    for i, mod in enumerate(block.modifiers):
        if mod.kind == kind:
            value = schema.clamp_modifier(kind, mod.value * factor)
            block.modifiers[i] = Modifier(kind, value, mod.axis)
            return True
    return False


def _set_modifier(block: Block, kind: str, value, axis: str | None = None) -> None:
    value = schema.clamp_modifier(kind, value)
    for i, mod in enumerate(block.modifiers):
        if mod.kind == kind:
            block.modifiers[i] = Modifier(kind, value, mod.axis or axis)
            return
    block.modifiers.append(Modifier(kind, value, axis))


def _applies(block: Block, name: str) -> bool:
    mod = MODIFIER_PARAMS.get(name)
    if mod is not None:
        return mod in schema.ALLOWED_MODIFIERS[block.kind]
    return schema.canonical_param(block.kind, name) == name


def refine(program: DesignProgram, critique, intent=None) -> DesignProgram:
    """New program with suggestions applied in critique order, then clamped."""
    out = program.copy()
    for sug in critique.suggestions:
        name, factor = sug["param"], float(sug["factor"])
        for block in out.blocks:
            if sug.get("kind") not in (None, block.kind) or not _applies(block, name):
                continue
            mod = MODIFIER_PARAMS.get(name)
            if mod is not None:
                _scale_modifier(block, mod, factor)
                continue
            spec = schema.param_spec(block.kind, name)
            current = block.params.get(name, spec.default)
            block.params[name] = spec.clamp(current * factor)

    restack = False
    for issue in critique.issues:
        code = issue["code"]
        if code == "PARAM_MISMATCH":
            name, want, kind = issue["name"], issue["want"], issue.get("kind")
            for block in out.blocks:
                if kind not in (None, block.kind) or not _applies(block, name):
                    continue
                mod = MODIFIER_PARAMS.get(name)
                if mod is not None:
                    _set_modifier(block, mod, want, "x" if mod == "gradient" else None)
                else:
                    block.params[name] = schema.param_spec(block.kind, name).clamp(want)
        elif code == "CLASS_MISMATCH":
            want = issue["want"]
            wanted = set(intent.classes) if intent is not None else {want}
            stray = next((b for b in out.blocks if b.kind not in wanted), None)
            new_block = make_block(want, intent)
            if stray is not None:
                out.blocks[out.blocks.index(stray)] = new_block
            else:
                out.blocks.append(new_block)
            restack = True
        elif code in ("FLOATING", "SELF_INTERSECT") and len(out.blocks) > 1:
            restack = True

    if restack and len(out.blocks) > 1:
        stack_blocks(out.blocks)
    for block in out.blocks:
        if block.kind == "tubular":
            from ..geometry.generators import fit_tubular_block

            fixed = intent is not None and "tubule_count" in intent.numeric_params
            fit_tubular_block(block, fixed_count=fixed)
    return out
