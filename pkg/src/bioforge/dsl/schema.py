"""Parameter schemas for every block kind.

Each kind lists its parameters in canonical print order together with type,
hard range and default.  Modifiers are declared separately because they map
onto generator options rather than plain block parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

KINDS = ("helical", "cellular", "tubular", "slab", "primitive")
BIO_CLASSES = ("helical", "cellular", "tubular")
MODIFIERS = ("gradient", "sandwich", "smooth", "noise")
AXES = ("x", "y", "z")


@dataclass(frozen=True)
class ParamSpec:
    name: str
    type: type
    lo: float
    hi: float
    default: float
    lo_open: bool = False
    aliases: tuple[str, ...] = ()
    doc: str = ""

    def contains(self, value) -> bool:
        if self.type is int and (isinstance(value, bool) or not float(value).is_integer()):
            return False
        if self.lo_open:
            if not value > self.lo:
                return False
        elif not value >= self.lo:
            return False
        return value <= self.hi

    def clamp(self, value):
        """Nearest in-range value; open lower bounds are nudged inside."""
        v = float(value)
        if self.type is int:
            v = round(v)
        v = min(max(v, self.lo), self.hi)
        if self.lo_open and v <= self.lo:
            v = self.lo + 1 if self.type is int else max(self.lo + 1e-3, self.default * 0.1)
        return self.type(v)


def _placement() -> list[ParamSpec]:
    return [
        ParamSpec("offset_x", float, -1000, 1000, 0.0),
        ParamSpec("offset_y", float, -1000, 1000, 0.0),
        ParamSpec("offset_z", float, -1000, 1000, 0.0),
    ]


SCHEMAS: dict[str, list[ParamSpec]] = {
    "helical": [
        ParamSpec("plies", int, 1, 64, 8, aliases=("layers", "ply_count")),
        ParamSpec("ply_thickness", float, 0, 10, 0.5, lo_open=True,
                  aliases=("thickness", "layer_thickness")),
        ParamSpec("rotation_deg", float, -180, 180, 16.0, aliases=("rotation", "angle")),
        ParamSpec("fibers_per_ply", int, 1, 200, 12, aliases=("fibers",)),
        ParamSpec("fiber_profile", int, 0, 1, 0, doc="0 cylindrical, 1 rectangular"),
        ParamSpec("fiber_width", float, 0, 10, 0.5, lo_open=True,
                  doc="in-plane width of rectangular fibers"),
        ParamSpec("fiber_segments", int, 8, 64, 12),
        ParamSpec("footprint", float, 1, 200, 10.0, aliases=("size",)),
        *_placement(),
    ],
    "cellular": [
        ParamSpec("region_count", int, 1, 200, 24, aliases=("regions", "cells")),
        ParamSpec("randomness", float, 0, 1, 0.5, aliases=("jitter",)),
        ParamSpec("wall_gap", float, 0, 5, 0.15, aliases=("gap",)),
        ParamSpec("size_x", float, 0, 200, 10.0, lo_open=True),
        ParamSpec("size_y", float, 0, 200, 10.0, lo_open=True),
        ParamSpec("size_z", float, 0, 200, 10.0, lo_open=True),
        *_placement(),
    ],
    "tubular": [
        ParamSpec("tubule_count", int, 0, 400, 16, aliases=("tubules",)),
        ParamSpec("tubule_radius", float, 0, 50, 0.6, lo_open=True, aliases=("radius",)),
        ParamSpec("ellipticity", float, 1, 10, 1.0),
        ParamSpec("spacing", float, 0, 100, 1.8, lo_open=True, aliases=("pitch",)),
        ParamSpec("cortical_thickness", float, 0, 50, 0.8, aliases=("cortex",)),
        ParamSpec("size_x", float, 0, 500, 10.0, lo_open=True),
        ParamSpec("size_y", float, 0, 500, 10.0, lo_open=True),
        ParamSpec("height", float, 0, 500, 4.0, lo_open=True, aliases=("size_z",)),
        ParamSpec("segments", int, 8, 256, 64),
        *_placement(),
    ],
    "slab": [
        ParamSpec("size_x", float, 0, 500, 10.0, lo_open=True, aliases=("length",)),
        ParamSpec("size_y", float, 0, 500, 10.0, lo_open=True, aliases=("width",)),
        ParamSpec("height", float, 0, 500, 2.0, lo_open=True, aliases=("size_z",)),
        ParamSpec("hole_count", int, 0, 400, 0, aliases=("holes",)),
        ParamSpec("hole_radius", float, 0, 50, 1.0, lo_open=True),
        ParamSpec("hole_sides", int, 3, 128, 32),
        ParamSpec("rotation_deg", float, -180, 180, 0.0, aliases=("rotation",)),
        *_placement(),
    ],
    "primitive": [
        ParamSpec("sides", int, 0, 128, 0, doc="0 box, >=3 regular prism"),
        ParamSpec("size", float, 0, 500, 2.0, lo_open=True),
        ParamSpec("height", float, 0, 500, 2.0, lo_open=True, aliases=("size_z",)),
        ParamSpec("count_x", int, 1, 20, 1),
        ParamSpec("count_y", int, 1, 20, 1),
        ParamSpec("spacing", float, 0, 1000, 3.0, lo_open=True),
        ParamSpec("rotate_step_deg", float, -180, 180, 0.0),
        ParamSpec("base_thickness", float, 0, 50, 0.0),
        *_placement(),
    ],
}

# Which modifiers each kind accepts.
ALLOWED_MODIFIERS: dict[str, tuple[str, ...]] = {
    "helical": ("noise",),
    "cellular": ("smooth", "sandwich"),
    "tubular": ("gradient",),
    "slab": (),
    "primitive": ("smooth",),
}

# Modifier value ranges: (type, lo, hi, lo_open)
MODIFIER_RANGES: dict[str, tuple[type, float, float, bool]] = {
    "gradient": (float, 0.0, 10.0, True),
    "sandwich": (float, 0.0, 50.0, False),
    "smooth": (int, 0, 3, False),
    "noise": (float, 0.0, 90.0, False),
}

# Block-level defaults for options that are only reachable through modifiers.
MODIFIER_DEFAULTS = {"smooth": 1, "sandwich": 0.0, "noise": 0.0}

_INDEX = {kind: {p.name: p for p in specs} for kind, specs in SCHEMAS.items()}
_ALIAS = {
    kind: {alias: p.name for p in specs for alias in (p.name, *p.aliases)}
    for kind, specs in SCHEMAS.items()
}


def param_spec(kind: str, name: str) -> ParamSpec:
    return _INDEX[kind][name]


def canonical_param(kind: str, word: str) -> str | None:
    """Canonical parameter name for ``word`` (an alias or the name itself)."""
    return _ALIAS[kind].get(word)


def param_order(kind: str) -> list[str]:
    return [p.name for p in SCHEMAS[kind]]


def defaults(kind: str) -> dict:
    return {p.name: p.type(p.default) for p in SCHEMAS[kind]}


def block_keywords(kind: str) -> list[str]:
    """Every word that may start a statement inside a block of ``kind``."""
    return sorted(set(_ALIAS[kind]) | set(ALLOWED_MODIFIERS[kind]))


def modifier_in_range(kind: str, value) -> bool:
    typ, lo, hi, lo_open = MODIFIER_RANGES[kind]
    if typ is int and (isinstance(value, bool) or not float(value).is_integer()):
        return False
    if lo_open and not value > lo:
        return False
    if not lo_open and not value >= lo:
        return False
    return value <= hi


def clamp_modifier(kind: str, value):
    typ, lo, hi, lo_open = MODIFIER_RANGES[kind]
    v = float(value)
    if typ is int:
        v = round(v)
    v = min(max(v, lo), hi)
    if lo_open and v <= lo:
        v = 1.0
    return typ(v)
