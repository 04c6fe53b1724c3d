"""Template-based natural-language instructions for design classes."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..dsl.intent import WordBanks, default_banks
from ..dsl.parser import format_number
from ..rng import Rng

# value ranges used when a constraint slot is not supplied by the caller
SLOT_RANGES = {
    "plies": (4, 16),
    "rotation_deg": (5, 45),
    "fibers_per_ply": (6, 20),
    "region_count": (6, 48),
    "tubule_count": (4, 25),
    "hole_count": (4, 25),
    "count_x": (1, 5),
    "count_y": (1, 5),
}
CONSTRAINT_PROB = 0.75

_SLOT = re.compile(r"\{(\w+)\}")


@dataclass
class Instruction:
    text: str
    cls: str
    phrase: str
    params: dict = field(default_factory=dict)


def _fill_constraint(template: str, rng: Rng, values: dict | None) -> tuple[str, dict]:
    params = {}
    for slot in _SLOT.findall(template):
        if values is not None and slot in values:
            params[slot] = values[slot]
        else:
            lo, hi = SLOT_RANGES[slot]
            params[slot] = rng.randint(lo, hi)
    text = _SLOT.sub(lambda m: format_number(params[m.group(1)]), template)
    return text, params


def sample_instruction(cls: str, banks: WordBanks | None = None, rng: Rng | None = None,
                       values: dict | None = None, phrases: list[str] | None = None) -> Instruction:
    """Instruction plus the motif phrase and numeric constraints it states.

    ``values`` pins constraint numbers (e.g. to a concrete program's
    parameters); ``phrases`` narrows the motif bank to a subset.
    """
    banks = banks or default_banks()
    rng = rng or Rng(0)
    if cls not in banks.motif_bank:
        raise ValueError(f"no motif bank for class {cls!r}")
    pool = [p for p in banks.motif_bank[cls] if not phrases or p in phrases]
    phrase = rng.choice(pool or banks.motif_bank[cls])
    template = rng.choice(banks.templates)
    prim = banks.primitive_bank
    verb_i = rng.randint(0, len(prim["verbs"]) - 1)
    medium = rng.choice(prim["mediums"])

    constraint, params = "", {}
    options = banks.constraints.get(cls, [])
    usable = [c for c in options
              if values is None or all(s in values for s in _SLOT.findall(c))]
    if usable and rng.uniform() < CONSTRAINT_PROB:
        constraint, params = _fill_constraint(rng.choice(usable), rng, values)

    slots = {
        "verb": prim["verbs"][verb_i],
        "Verb": prim["verbs"][verb_i].capitalize(),
        "VERB": prim["verbs"][verb_i].upper(),
        "verb_third": prim["verbs_third"][verb_i],
        "verb_ing": prim["verbs_ing"][verb_i],
        "verb_past": prim["verbs_past"][verb_i],
        "medium": medium,
        "MEDIUM": medium.upper(),
        "phrase": phrase,
        "PHRASE": phrase.upper(),
        "constraint": constraint,
    }
    text = _SLOT.sub(lambda m: slots[m.group(1)], template)
    if text[:1].islower():
        text = text[0].upper() + text[1:]
    return Instruction(text=text, cls=cls, phrase=phrase, params=params)


def generate_instruction(cls: str, banks: WordBanks | None = None, rng: Rng | None = None,
                         **kwargs) -> str:
    return sample_instruction(cls, banks, rng, **kwargs).text
