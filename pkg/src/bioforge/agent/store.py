"""Caption + program retrieval store with token-frequency cosine ranking."""

from __future__ import annotations

import json
import logging
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

from ..dsl import parse
from ..geometry import compile_program
from ..geometry.mesh import mesh_metrics

log = logging.getLogger(__name__)

_TOKEN = re.compile(r"[a-z0-9]+(?:[-'][a-z0-9]+)*")


def term_vector(text: str) -> Counter:
    return Counter(_TOKEN.findall(text.lower()))


def cosine(a: Counter, b: Counter) -> float:
    if not a or not b:
        return 0.0
    small, large = (a, b) if len(a) <= len(b) else (b, a)
    dot = sum(v * large.get(k, 0) for k, v in small.items())
    na = math.sqrt(sum(v * v for v in a.values()))
    nb = math.sqrt(sum(v * v for v in b.values()))
    return dot / (na * nb)


def describe_program(program_text: str) -> dict:
    """Geometric summary of a compiled program, used as the reference 'render'."""
    program = parse(program_text)
    scene = compile_program(program)
    volume = sum(mesh_metrics(m)["volume"] for m in scene.meshes)
    lo, hi = scene.bbox()
    extent = (hi - lo).tolist()
    bbox_volume = extent[0] * extent[1] * extent[2]
    return {
        "classes": program.kinds,
        "mesh_count": len(scene.meshes),
        "volume": round(volume, 6),
        "extent": [round(e, 6) for e in extent],
        "porosity_vs_bbox": round(1.0 - volume / bbox_volume, 6) if bbox_volume else 0.0,
        "params": {b["kind"]: {k: v for k, v in b["params"].items()
                               if isinstance(v, (int, float)) and not k.startswith("offset")}
                   for b in scene.blocks},
    }


@dataclass(frozen=True)
class Entry:
    caption: str
    program_text: str
    descriptor: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return {"caption": self.caption, "program": self.program_text,
                "descriptor": self.descriptor}


class RetrievalStore:
    """Immutable list of entries with precomputed caption vectors."""

    def __init__(self, entries: list[Entry]):
        if not entries:
            raise ValueError("a retrieval store needs at least one entry")
        self.entries = tuple(entries)
        self._vectors = tuple(term_vector(e.caption) for e in self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def scores(self, query: str) -> list[float]:
        q = term_vector(query)
        return [cosine(q, v) for v in self._vectors]

    def to_dict(self) -> dict:
        return {"entries": [e.to_dict() for e in self.entries]}

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def from_dict(cls, doc: dict) -> "RetrievalStore":
        return cls([Entry(e["caption"], e["program"], e.get("descriptor", {}))
                    for e in doc["entries"]])

    @classmethod
    def load(cls, path) -> "RetrievalStore":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def retrieve(store: RetrievalStore, query: str, k: int) -> list[Entry]:
    """Top-k entries by cosine similarity; ties go to the lower entry index."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k > len(store):
        log.warning("k=%d exceeds store size %d; clamping", k, len(store))
        k = len(store)
    scores = store.scores(query)
    order = sorted(range(len(store)), key=lambda i: (-scores[i], i))
    return [store.entries[i] for i in order[:k]]


@lru_cache(maxsize=1)
def default_store() -> RetrievalStore:
    """Store over the twelve bioinspired base designs."""
    from ..library import bio_library

    return RetrievalStore([Entry(d.caption, d.program_text, describe_program(d.program_text))
                           for d in bio_library().designs])
