"""Benchmark prompt suite: loading, checking and the reproducible builder."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

from ..dsl import parse_intent
from ..dsl.intent import COMPOSITE, IntentSpec, default_banks
from ..rng import Rng

DIFFICULTIES = ("easy", "medium", "hard")
TEMPLATE = "Write a BGS script to make a {shape}"
SUITE_SIZE = 320
SUITE_SEED = 2024
SHARES = {"easy": 60, "medium": 80, "hard": 180}


@dataclass
class BenchPrompt:
    id: str
    text: str
    difficulty: str
    classes: list = field(default_factory=list)
    expected: dict = field(default_factory=dict)

    def intent(self) -> IntentSpec:
        """Scoring intent built from the annotations rather than the text."""
        classes = list(self.classes)
        return IntentSpec(
            target_class=classes[0] if len(classes) == 1 else COMPOSITE,
            classes=classes,
            numeric_params=dict(self.expected.get("params", {})),
            motif_flags=set(self.expected.get("flags", [])),
        )


@dataclass
class BenchmarkSuite:
    prompts: list[BenchPrompt]
    name: str = "bgs-320"

    def __post_init__(self):
        ids = [p.id for p in self.prompts]
        if len(set(ids)) != len(ids):
            raise ValueError("prompt ids must be unique")
        for p in self.prompts:
            if p.difficulty not in DIFFICULTIES:
                raise ValueError(f"{p.id}: difficulty must be one of {DIFFICULTIES}")

    def __len__(self) -> int:
        return len(self.prompts)

    def subset(self, difficulty: str) -> "BenchmarkSuite":
        return BenchmarkSuite([p for p in self.prompts if p.difficulty == difficulty],
                              f"{self.name}-{difficulty}")

    def to_dict(self) -> dict:
        return {"name": self.name, "prompts": [asdict(p) for p in self.prompts]}

    @classmethod
    def from_dict(cls, doc: dict) -> "BenchmarkSuite":
        return cls([BenchPrompt(**p) for p in doc["prompts"]], doc.get("name", "suite"))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n", encoding="utf-8")


def load_suite(path=None) -> BenchmarkSuite:
    """The shipped suite, or a suite file."""
    if path is None:
        text = resources.files("bioforge.data").joinpath("bench_suite.json").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return BenchmarkSuite.from_dict(json.loads(text))


# -- builder -----------------------------------------------------------------

EASY_TAILS = ("", " for a quick test", " as one solid part", " for a display model")
SINGLE = ("helical", "cellular", "tubular", "slab", "primitive")

# (template, param, low, high) for one explicit numeric constraint
MEDIUM_CONSTRAINTS = {
    "helical": [(" with {v} plies", "plies", 4, 16),
                (" with plies rotated {v} degrees", "rotation_deg", 8, 40),
                (" with {v} fibers in each ply", "fibers_per_ply", 6, 20)],
    "cellular": [(" with {v} cells", "region_count", 8, 48)],
    "tubular": [(" with {v} tubules", "tubule_count", 4, 25)],
    "slab": [(" with {v} holes", "hole_count", 2, 25)],
    "primitive": [(" arranged in a {v}", "grid", 1, 5)],
}
EXTREME = {
    "helical": (" with {v} plies", "plies", 20, 32),
    "cellular": (" with {v} cells", "region_count", 50, 80),
    "tubular": (" with {v} tubules", "tubule_count", 30, 64),
    "slab": (" with {v} holes", "hole_count", 30, 60),
    "primitive": (" arranged in a {v}", "grid", 6, 8),
}
FLAG_VARIANTS = [
    ("tubular", " with {v} tubules and gradient porosity", "tubule_count", 4, 16, ["gradient"]),
    ("tubular", " with graded tubules", None, 0, 0, ["gradient"]),
    ("helical", " with {v} plies and irregular perturbed angles", "plies", 4, 12, ["irregular"]),
    ("helical", " with noisy ply angles", None, 0, 0, ["irregular"]),
    ("cellular", " with {v} cells and dense outer skins", "region_count", 8, 32, ["sandwich"]),
    ("cellular", " with {v} cells between thin face-sheets", "region_count", 8, 32,
     ["thin", "sandwich"]),
    ("cellular", " smoothed with {v} levels", "smooth_levels", 1, 3, ["smoothed"]),
    ("primitive", " with smooth rounded edges", None, 0, 0, ["smoothed"]),
]


def _phrase(rng: Rng, cls: str) -> str:
    return rng.choice(default_banks().motif_bank[cls])


def _constraint(rng: Rng, template: str, param: str, lo: int, hi: int) -> tuple[str, dict]:
    if param == "grid":
        x, y = rng.randint(lo, hi), rng.randint(lo, hi)
        return template.format(v=f"{x}x{y} grid"), {"count_x": x, "count_y": y}
    v = rng.randint(lo, hi)
    return template.format(v=v), {param: v}


def _easy(rng: Rng, i: int) -> BenchPrompt:
    cls = SINGLE[i % len(SINGLE)]
    shape = _phrase(rng, cls) + rng.choice(EASY_TAILS)
    return BenchPrompt("", TEMPLATE.format(shape=shape), "easy", [cls],
                       {"params": {}, "flags": []})


def _medium(rng: Rng, i: int) -> BenchPrompt:
    cls = SINGLE[i % len(SINGLE)]
    text, params = _constraint(rng, *rng.choice(MEDIUM_CONSTRAINTS[cls]))
    return BenchPrompt("", TEMPLATE.format(shape=_phrase(rng, cls) + text), "medium", [cls],
                       {"params": params, "flags": []})


def _hard(rng: Rng, i: int) -> BenchPrompt:
    kind = i % 9
    if kind in (0, 1, 2):
        # two motifs stacked, the lower one with a constraint
        a, b = rng.sample(("helical", "cellular", "tubular", "slab"), 2)
        text, params = _constraint(rng, *rng.choice(MEDIUM_CONSTRAINTS[b]))
        shape = f"{_phrase(rng, a)} on top of a {_phrase(rng, b)}{text}"
        classes = [a, b]
        flags: list[str] = []
    elif kind in (3, 4, 5):
        cls, tmpl, param, lo, hi, flags = rng.choice(FLAG_VARIANTS)
        if param is None:
            text, params = tmpl, {}
        else:
            text, params = _constraint(rng, tmpl, param, lo, hi)
        shape, classes = _phrase(rng, cls) + text, [cls]
    elif kind in (6, 7):
        cls = rng.choice(SINGLE)
        text, params = _constraint(rng, *EXTREME[cls])
        shape, classes, flags = _phrase(rng, cls) + text, [cls], []
    else:
        a, b, c = rng.sample(("helical", "cellular", "tubular"), 3)
        shape = f"{_phrase(rng, a)} over a {_phrase(rng, b)} over a {_phrase(rng, c)}"
        classes, params, flags = [a, b, c], {}, []
    return BenchPrompt("", TEMPLATE.format(shape=shape), "hard", classes,
                       {"params": params, "flags": sorted(flags)})


def _consistent(p: BenchPrompt) -> bool:
    intent = parse_intent(p.text)
    return (intent.classes == p.classes
            and intent.numeric_params == p.expected["params"]
            and set(p.expected["flags"]) <= intent.motif_flags)


def build_suite(seed: int = SUITE_SEED, shares: dict | None = None) -> BenchmarkSuite:
    """Deterministic suite; every prompt's annotations agree with its parsed intent."""
    shares = shares or SHARES
    rng = Rng(seed)
    makers = {"easy": _easy, "medium": _medium, "hard": _hard}
    prompts, seen = [], set()
    for difficulty in DIFFICULTIES:
        i = 0
        while sum(p.difficulty == difficulty for p in prompts) < shares[difficulty]:
            if i > 50 * shares[difficulty]:
                raise RuntimeError(f"cannot draw enough distinct {difficulty} prompts")
            p = makers[difficulty](rng, i)
            i += 1
            if p.text in seen or not _consistent(p):
                continue
            seen.add(p.text)
            n = sum(q.difficulty == difficulty for q in prompts)
            p.id = f"{difficulty}_{n + 1:03d}"
            prompts.append(p)
    return BenchmarkSuite(prompts)
