"""Dataset factory: diversify bases, annotate, validate, render and pair with instructions."""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..dsl import parse, parse_intent, schema
from ..dsl.program import DesignProgram, ParseError
from ..geometry import GeometryError, compile_program
from ..library import BaseDesign, BaseLibrary, bio_library, general_library
from ..remote import extract_script
from ..rng import Rng, derive_seed, stable_hash
from ..validate import render_scene
from .instructions import SLOT_RANGES, sample_instruction
from .reasoning import embed_reasoning
from .variants import DEFAULT_JITTER, diversify, is_valid, restructure

log = logging.getLogger(__name__)

RECORD_KINDS = ("bio", "bio_reasoning", "general", "general_reasoning")
# the external-dataset share of the original mix is folded into general_reasoning
DEFAULT_COMPOSITION = {"bio": 0.18, "bio_reasoning": 0.20, "general": 0.16,
                       "general_reasoning": 0.46}
FRACTION_TOL = 1e-9


@dataclass
class PipelineConfig:
    variants_per_query: int = 5
    queries_per_base: int = 1
    composition: dict = field(default_factory=lambda: dict(DEFAULT_COMPOSITION))
    jitter: dict = field(default_factory=lambda: dict(DEFAULT_JITTER))
    seed: int = 0
    render: bool = True
    view: str = "iso"

    def __post_init__(self):
        if self.variants_per_query < 1:
            raise ValueError("variants_per_query must be >= 1")
        if self.queries_per_base < 1:
            raise ValueError("queries_per_base must be >= 1")
        unknown = set(self.composition) - set(RECORD_KINDS)
        if unknown:
            raise ValueError(f"unknown record kinds {sorted(unknown)}")
        if any(v < 0 for v in self.composition.values()):
            raise ValueError("composition fractions must be non-negative")
        if abs(sum(self.composition.values()) - 1.0) > FRACTION_TOL:
            raise ValueError("composition fractions must sum to 1")
        if any(v < 0 for v in self.jitter.values()):
            raise ValueError("jitter widths must be non-negative")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "PipelineConfig":
        known = {k: v for k, v in doc.items() if k in cls.__dataclass_fields__}
        return cls(**known)


@dataclass
class DatasetRecord:
    instruction: str
    response: str
    cls: str
    kind: str
    base_id: str
    seed: int
    validated: bool
    render_path: str | None

    def to_dict(self) -> dict:
        doc = asdict(self)
        # field order of the JSONL line: "class" replaces the Python-safe name
        return {"instruction": doc["instruction"], "response": doc["response"],
                "class": doc["cls"], "kind": doc["kind"], "base_id": doc["base_id"],
                "seed": doc["seed"], "validated": doc["validated"],
                "render_path": doc["render_path"]}

    @classmethod
    def from_dict(cls, doc: dict) -> "DatasetRecord":
        return cls(doc["instruction"], doc["response"], doc["class"], doc["kind"],
                   doc["base_id"], doc["seed"], doc["validated"], doc.get("render_path"))


@dataclass
class DatasetResult:
    records: list[DatasetRecord]
    stats: dict
    failures: list[dict]
    paths: dict = field(default_factory=dict)

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r.to_dict()) + "\n" for r in self.records)


def allocate(total: int, composition: dict) -> dict:
    """Integer counts summing to ``total`` by largest remainder."""
    kinds = [k for k in RECORD_KINDS if k in composition]
    exact = {k: total * composition[k] for k in kinds}
    counts = {k: int(np.floor(exact[k] + 1e-9)) for k in kinds}
    left = total - sum(counts.values())
    order = sorted(kinds, key=lambda k: (-(exact[k] - counts[k]), RECORD_KINDS.index(k)))
    for k in order[:left]:
        counts[k] += 1
    return counts


def constraint_values(program: DesignProgram, cls: str) -> dict:
    """Parameter values an instruction may state for this program."""
    for block in program.blocks:
        if block.kind == cls:
            resolved = {**schema.defaults(block.kind), **block.params}
            return {k: resolved[k] for k in SLOT_RANGES if k in resolved}
    return {}


def _percentile(values: list[int], q: float) -> float:
    return float(np.percentile(values, q)) if values else 0.0


def _length_stats(values: list[int]) -> dict:
    return {"count": len(values), "mean": float(np.mean(values)) if values else 0.0,
            "p50": _percentile(values, 50), "p90": _percentile(values, 90),
            "max": int(max(values)) if values else 0}


def whitespace_tokens(text: str) -> int:
    return len(text.split())


def compute_stats(records: list[DatasetRecord], failures: list[dict], slots: int,
                  cfg: PipelineConfig, targets: dict) -> dict:
    n = len(records)
    counts = {k: sum(1 for r in records if r.kind == k) for k in RECORD_KINDS}
    classes: dict[str, int] = {}
    for r in records:
        classes[r.cls] = classes.get(r.cls, 0) + 1
    return {
        "seed": cfg.seed,
        "slots": slots,
        "emitted": n,
        "failures": len(failures),
        "targets": targets,
        "counts": counts,
        "fractions": {k: (counts[k] / n if n else 0.0) for k in RECORD_KINDS},
        "composition": {k: cfg.composition.get(k, 0.0) for k in RECORD_KINDS},
        "classes": dict(sorted(classes.items())),
        "response_tokens": {
            "all": _length_stats([whitespace_tokens(r.response) for r in records]),
            **{k: _length_stats([whitespace_tokens(r.response) for r in records if r.kind == k])
               for k in RECORD_KINDS},
        },
        "instruction_tokens": _length_stats([whitespace_tokens(r.instruction) for r in records]),
    }


def stats_table(stats: dict) -> str:
    lines = [f"{'kind':<18} {'count':>6} {'target':>7} {'fraction':>9} {'config':>7} "
             f"{'tok mean':>9} {'tok p90':>8}"]
    for k in RECORD_KINDS:
        tok = stats["response_tokens"][k]
        lines.append(f"{k:<18} {stats['counts'][k]:>6} {stats['targets'].get(k, 0):>7} "
                     f"{stats['fractions'][k]:>9.3f} {stats['composition'][k]:>7.3f} "
                     f"{tok['mean']:>9.1f} {tok['p90']:>8.1f}")
    tok = stats["response_tokens"]["all"]
    lines.append(f"{'total':<18} {stats['emitted']:>6} {stats['slots']:>7} {1.0:>9.3f} "
                 f"{1.0:>7.3f} {tok['mean']:>9.1f} {tok['p90']:>8.1f}")
    lines.append(f"failures: {stats['failures']}")
    return "\n".join(lines) + "\n"


def _check_record(response: str, expected: DesignProgram) -> tuple[DesignProgram | None, str]:
    try:
        program = parse(extract_script(response))
    except ParseError as err:
        return None, f"parse: {err}"
    if program != expected:
        return None, "response does not reproduce the variant"
    if not is_valid(program):
        return None, "validation"
    return program, ""


def _pools(library: BaseLibrary, general: BaseLibrary) -> dict:
    return {"bio": list(library.designs), "bio_reasoning": list(library.designs),
            "general": list(general.designs), "general_reasoning": list(general.designs)}


def build_dataset(cfg: PipelineConfig | None = None, library: BaseLibrary | None = None,
                  general: BaseLibrary | None = None, out_dir=None) -> DatasetResult:
    cfg = cfg or PipelineConfig()
    library = library or bio_library()
    general = general or general_library()
    vpq = cfg.variants_per_query
    slots = (len(library) + len(general)) * cfg.queries_per_base * vpq
    targets = allocate(slots, cfg.composition)
    pools = _pools(library, general)

    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        (out / "renders").mkdir(parents=True, exist_ok=True)

    records: list[DatasetRecord] = []
    failures: list[dict] = []
    cursor = {"bio": 0, "general": 0}
    for kind_i, kind in enumerate(RECORD_KINDS):
        count = targets.get(kind, 0)
        family = kind.split("_")[0]
        pool = pools[kind]
        for q in range(-(-count // vpq)):
            base: BaseDesign = pool[cursor[family] % len(pool)]
            cursor[family] += 1
            n = min(vpq, count - q * vpq)
            query_seed = derive_seed(cfg.seed, kind_i, q, stable_hash(base.id))
            variants = diversify(base.program, n, Rng(query_seed), cfg.jitter)
            phrases = parse_intent(base.caption).phrases
            for v, variant in enumerate(variants):
                rec_seed = derive_seed(query_seed, v)
                rng = Rng(rec_seed)
                text = restructure(variant, rng, note=f"{base.id} variant {v + 1}")
                response = embed_reasoning(variant, text) if kind.endswith("reasoning") else text
                instruction = sample_instruction(base.cls, rng=rng, phrases=phrases,
                                                 values=constraint_values(variant, base.cls))
                key = f"{kind}-{q:04d}-{v}"
                program, reason = _check_record(response, variant)
                render_path = None
                if program is not None and cfg.render:
                    try:
                        image = render_scene(compile_program(program), cfg.view)
                    except GeometryError as err:
                        program, reason = None, f"render: {err}"
                    else:
                        if out is not None:
                            render_path = f"renders/{key}.ppm"
                            image.save(out / render_path)
                if program is None:
                    failures.append({"key": key, "base_id": base.id, "reason": reason})
                    log.info("dropped %s: %s", key, reason)
                    continue
                records.append(DatasetRecord(instruction.text, response, base.cls, kind, base.id,
                                             rec_seed, True, render_path))

    stats = compute_stats(records, failures, slots, cfg, targets)
    result = DatasetResult(records, stats, failures)
    if out is not None:
        result.paths = write_dataset(result, out)
    return result


def write_dataset(result: DatasetResult, out: Path) -> dict:
    from ..plotting import bar_chart, histogram

    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "dataset": out / "dataset.jsonl",
        "stats": out / "stats.json",
        "table": out / "stats.txt",
        "composition_figure": out / "composition.png",
        "length_figure": out / "response_lengths.png",
    }
    paths["dataset"].write_text(result.to_jsonl(), encoding="utf-8")
    doc = {**result.stats, "failed_records": result.failures}
    paths["stats"].write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    paths["table"].write_text(stats_table(result.stats), encoding="utf-8")
    stats = result.stats
    bar_chart(paths["composition_figure"], list(RECORD_KINDS),
              [stats["fractions"][k] for k in RECORD_KINDS], "Record composition", "fraction",
              ylim=(0, 1))
    histogram(paths["length_figure"],
              {k: [whitespace_tokens(r.response) for r in result.records if r.kind == k]
               for k in RECORD_KINDS},
              "Response length", "whitespace tokens")
    return {k: str(v) for k, v in paths.items()}


def load_records(path) -> list[DatasetRecord]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return [DatasetRecord.from_dict(json.loads(line)) for line in lines if line.strip()]


def replay(records: list[DatasetRecord]) -> list[bool]:
    """Re-extract, re-parse and re-validate every record."""
    out = []
    for r in records:
        try:
            program = parse(extract_script(r.response))
        except ParseError:
            out.append(False)
            continue
        out.append(is_valid(program))
    return out
