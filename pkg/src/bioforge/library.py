"""Shipped base designs (four per bioinspired class plus general shapes)."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .dsl import parse
from .dsl.program import DesignProgram


@dataclass(frozen=True)
class BaseDesign:
    id: str
    cls: str
    caption: str
    program_text: str

    @property
    def program(self) -> DesignProgram:
        return parse(self.program_text)


@dataclass(frozen=True)
class BaseLibrary:
    designs: tuple[BaseDesign, ...]

    def __len__(self) -> int:
        return len(self.designs)

    def by_class(self, cls: str) -> list[BaseDesign]:
        return [d for d in self.designs if d.cls == cls]

    def get(self, design_id: str) -> BaseDesign:
        for d in self.designs:
            if d.id == design_id:
                return d
        raise KeyError(design_id)


def _load(section: str) -> tuple[BaseDesign, ...]:
    text = resources.files("bioforge.data").joinpath("base_designs.json").read_text("utf-8")
    doc = json.loads(text)
    return tuple(BaseDesign(e["id"], e["class"], e["caption"], e["program"])
                 for e in doc[section])


@lru_cache(maxsize=1)
def bio_library() -> BaseLibrary:
    """The twelve bioinspired base designs."""
    return BaseLibrary(_load("bio"))


@lru_cache(maxsize=1)
def general_library() -> BaseLibrary:
    return BaseLibrary(_load("general"))
