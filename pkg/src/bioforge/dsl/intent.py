"""Natural-language prompt <-> structured intent <-> program.

This is the deterministic stand-in for a finetuned prompt-to-script model:
prompts are scanned against class word banks, numerals are bound to nearby
parameter nouns, and programs are emitted from schema defaults.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

from . import schema
from .program import Block, DesignProgram, Modifier

COMPOSITE = "composite"

# noun -> canonical parameter
PARAM_NOUNS = {
    "plies": "plies", "ply": "plies", "layers": "plies", "layer": "plies", "lamellae": "plies",
    "degrees": "rotation_deg", "degree": "rotation_deg", "deg": "rotation_deg",
    "fibers": "fibers_per_ply", "fibres": "fibers_per_ply",
    "cells": "region_count", "regions": "region_count", "voids": "region_count",
    "tubules": "tubule_count", "tubes": "tubule_count", "channels": "tubule_count",
    "holes": "hole_count", "perforations": "hole_count",
    "levels": "smooth_levels", "subdivisions": "smooth_levels",
    "sides": "sides",
}

FLAG_WORDS = {
    "fibrous": "fibrous", "fiber": "fibrous", "fibre": "fibrous", "fibers": "fibrous",
    "fibres": "fibrous", "fibrils": "fibrous",
    "layered": "layered", "laminated": "layered", "stacked": "layered", "layers": "layered",
    "multilayer": "layered", "lamellae": "layered",
    "gradient": "gradient", "graded": "gradient", "gradually": "gradient",
    "smooth": "smoothed", "smoothed": "smoothed", "smoothly": "smoothed", "rounded": "smoothed",
    "sandwich": "sandwich", "skins": "sandwich", "shell": "sandwich", "shells": "sandwich",
    "face-sheets": "sandwich",
    "thin": "thin", "thinner": "thin",
    "irregular": "irregular", "noisy": "irregular", "perturbed": "irregular",
}

_WORD_RE = re.compile(r"\d+x\d+|\d+(?:\.\d+)?|[a-z]+(?:[-'][a-z]+)*")
_GRID_RE = re.compile(r"(\d+)x(\d+)\Z")
_NUM_RE = re.compile(r"\d+(?:\.\d+)?\Z")
BIND_WINDOW = 3


@dataclass(frozen=True)
class WordBanks:
    motif_bank: dict
    primitive_bank: dict
    templates: list
    constraints: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, doc: dict) -> "WordBanks":
        banks = cls(
            motif_bank={k: list(v) for k, v in doc["motif_bank"].items()},
            primitive_bank={k: list(v) for k, v in doc["primitive_bank"].items()},
            templates=list(doc["templates"]),
            constraints={k: list(v) for k, v in doc.get("constraints", {}).items()},
        )
        banks.check()
        return banks

    @classmethod
    def load(cls, path: str | Path) -> "WordBanks":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_dict(self) -> dict:
        return {
            "motif_bank": self.motif_bank,
            "primitive_bank": self.primitive_bank,
            "templates": self.templates,
            "constraints": self.constraints,
        }

    def check(self) -> None:
        for cls_name, phrases in self.motif_bank.items():
            if len(phrases) < 3:
                raise ValueError(f"motif bank for {cls_name!r} needs at least 3 phrases")
        fillable = {"verb", "Verb", "VERB", "verb_third", "verb_ing", "verb_past",
                    "medium", "MEDIUM", "phrase", "PHRASE", "constraint"}
        for template in self.templates:
            for slot in re.findall(r"\{(\w+)\}", template):
                if slot not in fillable:
                    raise ValueError(f"template slot {slot!r} cannot be filled")


@lru_cache(maxsize=1)
def default_banks() -> WordBanks:
    text = resources.files("bioforge.data").joinpath("wordbanks.json").read_text("utf-8")
    return WordBanks.from_dict(json.loads(text))


@dataclass
class IntentSpec:
    target_class: str
    classes: list = field(default_factory=list)
    numeric_params: dict = field(default_factory=dict)
    motif_flags: set = field(default_factory=set)
    free_terms: list = field(default_factory=list)
    phrases: list = field(default_factory=list)

    @property
    def underspecified(self) -> bool:
        return not self.classes

    def to_dict(self) -> dict:
        return {
            "target_class": self.target_class,
            "classes": list(self.classes),
            "numeric_params": dict(sorted(self.numeric_params.items())),
            "motif_flags": sorted(self.motif_flags),
            "free_terms": list(self.free_terms),
            "phrases": list(self.phrases),
        }


def tokenize_prompt(prompt: str) -> list[str]:
    return _WORD_RE.findall(prompt.lower())


@lru_cache(maxsize=8)
def _phrase_table(banks_key: int, items: tuple) -> list[tuple[tuple[str, ...], str]]:
    table = [(tuple(tokenize_prompt(p)), cls) for cls, p in items]
    # longest phrase first; stable for equal lengths
    table.sort(key=lambda t: -len(t[0]))
    return table


def _numeric(text: str):
    v = float(text)
    return int(v) if v.is_integer() and "." not in text else v


def parse_intent(prompt: str, banks: WordBanks | None = None) -> IntentSpec:
    if not prompt or not prompt.strip():
        raise ValueError("prompt must be nonempty")
    banks = banks or default_banks()
    tokens = tokenize_prompt(prompt)
    items = tuple((cls, p) for cls, phrases in banks.motif_bank.items() for p in phrases)
    table = _phrase_table(id(banks), items)

    consumed = [False] * len(tokens)
    found: list[tuple[int, str, str]] = []
    for phrase, cls in table:
        n = len(phrase)
        if n == 0:
            continue
        for i in range(len(tokens) - n + 1):
            if any(consumed[i:i + n]) or tuple(tokens[i:i + n]) != phrase:
                continue
            for j in range(i, i + n):
                consumed[j] = True
            found.append((i, cls, " ".join(phrase)))
    found.sort()
    classes: list[str] = []
    for _, cls, _ in found:
        if cls not in classes:
            classes.append(cls)

    flags = {FLAG_WORDS[t] for t in tokens if t in FLAG_WORDS}

    numeric: dict = {}
    nouns = [(i, PARAM_NOUNS[t]) for i, t in enumerate(tokens)
             if not consumed[i] and t in PARAM_NOUNS]
    used = set()
    for i, tok in enumerate(tokens):
        grid = _GRID_RE.match(tok)
        if grid:
            numeric.setdefault("count_x", int(grid.group(1)))
            numeric.setdefault("count_y", int(grid.group(2)))
            used.add(i)
            continue
        if not _NUM_RE.match(tok):
            continue
        best = None
        for j, key in nouns:
            d = abs(j - i)
            if d > BIND_WINDOW:
                continue
            # nearest noun; ties prefer the noun that follows the numeral
            rank = (d, 0 if j > i else 1)
            if best is None or rank < best[0]:
                best = (rank, key)
        if best is not None:
            numeric.setdefault(best[1], _numeric(tok))
            used.add(i)

    free = [t for i, t in enumerate(tokens)
            if not consumed[i] and i not in used and t not in PARAM_NOUNS and t not in FLAG_WORDS]
    target = classes[0] if len(classes) == 1 else COMPOSITE
    return IntentSpec(
        target_class=target,
        classes=classes,
        numeric_params=numeric,
        motif_flags=flags,
        free_terms=free,
        phrases=[p for _, _, p in found],
    )


# ---------------------------------------------------------------------------
# intent -> program

def _block_height(block: Block) -> float:
    p = {**schema.defaults(block.kind), **block.params}
    if block.kind == "helical":
        return p["plies"] * p["ply_thickness"]
    if block.kind == "cellular":
        sandwich = block.modifier("sandwich")
        return p["size_z"] + 2 * (sandwich.value if sandwich else 0.0)
    if block.kind == "primitive":
        return p["base_thickness"] + p["height"]
    return p["height"]


def block_height(block: Block) -> float:
    return _block_height(block)


def _shape_sides(phrases: list[str]) -> int | None:
    for phrase in phrases:
        if "cylinder" in phrase:
            return 32
        if "hexagonal" in phrase:
            return 6
        if "prism" in phrase:
            return 5
        if "cube" in phrase or "box" in phrase:
            return 0
    return None


def make_block(kind: str, intent: IntentSpec | None = None, base: Block | None = None) -> Block:
    """Block of ``kind`` with every parameter explicit.

    ``base`` (e.g. a retrieved design) supplies values for parameters the
    intent leaves open; schema defaults fill the rest.
    """
    params = schema.defaults(kind)
    modifiers: list[Modifier] = []
    if base is not None and base.kind == kind:
        params.update(base.params)
        modifiers = list(base.modifiers)
    flags = intent.motif_flags if intent else set()
    numeric = intent.numeric_params if intent else {}

    for key, value in numeric.items():
        if key in params:
            params[key] = schema.param_spec(kind, key).clamp(value)
    if kind == "primitive" and intent is not None:
        sides = _shape_sides(intent.phrases)
        if sides is not None and "sides" not in numeric:
            params["sides"] = sides

    def put(mod: Modifier) -> None:
        nonlocal modifiers
        modifiers = [m for m in modifiers if m.kind != mod.kind] + [mod]

    if kind == "cellular":
        if "smooth_levels" in numeric:
            put(Modifier("smooth", schema.clamp_modifier("smooth", numeric["smooth_levels"])))
        elif "smoothed" in flags and not any(m.kind == "smooth" for m in modifiers):
            put(Modifier("smooth", 2))
        if "thin" in flags:
            put(Modifier("sandwich", 0.4))
        elif ("sandwich" in flags or "layered" in flags) and not any(
                m.kind == "sandwich" and m.value > 0 for m in modifiers):
            put(Modifier("sandwich", 1.0))
    elif kind == "tubular":
        if "gradient" in flags and not any(m.kind == "gradient" for m in modifiers):
            put(Modifier("gradient", 1.5, "x"))
    elif kind == "helical":
        if "irregular" in flags and not any(m.kind == "noise" for m in modifiers):
            put(Modifier("noise", 5.0))
    elif kind == "primitive":
        if "smoothed" in flags and not any(m.kind == "smooth" for m in modifiers):
            put(Modifier("smooth", 1))
    block = Block(kind, params, modifiers)
    if kind == "tubular":
        from ..geometry.generators import fit_tubular_block

        fit_tubular_block(block, fixed_count="tubule_count" in numeric)
    elif kind == "slab":
        from ..geometry.generators import fit_slab_block

        fit_slab_block(block)
    return block


def stack_blocks(blocks: list[Block]) -> None:
    """Place blocks on top of each other along z, centred in x/y."""
    z = 0.0
    for block in blocks:
        block.params["offset_z"] = round(z, 9)
        z += _block_height(block)


def program_from_intent(intent: IntentSpec, seed: int = 0, name: str = "design",
                        bases: dict | None = None) -> DesignProgram:
    kinds = list(intent.classes) or ["primitive"]
    bases = bases or {}
    blocks = [make_block(kind, intent, bases.get(kind)) for kind in kinds]
    if len(blocks) > 1:
        stack_blocks(blocks)
    return DesignProgram(name=name, seed=seed, blocks=blocks)
